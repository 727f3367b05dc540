#pragma once

#include "unfold/graph.hpp"
#include "unfold/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace unfold::kernels {

enum class KernelMethod {
    pca,
    mds,
    isomap,
    spectral_clustering,
    laplacian_eigenmap_pinv,
    laplacian_eigenmap_normalized,
    lle_shift,
    lle_pinv,
    diffusion,
};

std::string_view method_name(KernelMethod m);
KernelMethod parse_method(std::string_view name);
std::vector<KernelMethod> all_methods();

struct KernelMatrix {
    Matrix values;
    bool centered = false;
    bool psd_checked = false;
    std::string method;

    Index size() const { return values.rows(); }
};

/// H K H. Idempotent.
KernelMatrix center_kernel(const KernelMatrix& k);

/// Sets psd_checked when min eigenvalue >= -rel_tol * max eigenvalue.
bool check_psd(KernelMatrix& k, double rel_tol = 1e-9);
double min_eigenvalue(const Matrix& sym);

KernelMatrix pca_kernel(const Dataset& data);
/// -1/2 H D H for squared distances D.
KernelMatrix distance_kernel(const graph::DistanceMatrix& dist);
KernelMatrix normalized_adjacency_kernel(const Matrix& adjacency, std::string method = "spectral-clustering");
KernelMatrix laplacian_pinv_kernel(const Matrix& laplacian);
KernelMatrix lle_shift_kernel(const Matrix& alignment);
KernelMatrix lle_pinv_kernel(const Matrix& alignment);
/// Symmetric form of the diffusion operator. For a random-walk operator with
/// stored degrees this is D^{1/2} P D^{-1/2}; a symmetric operator is used as is.
KernelMatrix diffusion_kernel(const graph::AlignmentMatrix& op);

struct CatalogOptions {
    int k = 8;
    /// rbf bandwidth for graph weights; nullopt means the median edge length.
    std::optional<double> sigma;
    double lle_reg = 1e-3;
    double diffusion_alpha = 0.5;
    int diffusion_t = 1;
};

/// Builds every graph/distance product the method needs from raw data.
KernelMatrix build_catalog_kernel(KernelMethod method, const Dataset& data, const CatalogOptions& opts = {});

/// tr(K_l H K H) / (n-1)^2.
double hsic(const Matrix& k, const Matrix& k_labels);

KernelMatrix delta_kernel(const std::vector<std::string>& labels);

}  // namespace unfold::kernels
