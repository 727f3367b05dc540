#pragma once

#include "unfold/types.hpp"

#include <optional>
#include <vector>

namespace unfold::oos {

/// Eigenfunction scheme with an rbf smoothing kernel r(x, x_i).
struct EigenModel {
    Matrix training;   // d x n
    double bandwidth = 1.0;
    double eta = 0.0;
    Matrix p;          // p x n, rows p_k

    Index dims() const { return p.rows(); }
};

struct EigenOptions {
    /// Smoothing bandwidth; median pairwise training distance when unset.
    std::optional<double> bandwidth;
    /// Regularizer; 1e-6 · tr(R) / n when unset.
    std::optional<double> eta;
};

/// Rows p_k = δ_k^{-1/2} v_kᵀ R (R + ηI)⁻¹ K (R + ηI)⁻¹ for the top `dims` eigenpairs of K.
Matrix eigen_projection(const Matrix& r, const Matrix& k, int dims, double eta);

EigenModel fit_oos_eigen(const Matrix& training, const Matrix& k, int dims, const EigenOptions& opts = {});

/// Smoothing-kernel column r(x) against the training points.
Vector smoothing_column(const EigenModel& model, const Eigen::Ref<const Vector>& x);
Vector embed_oos_eigen(const EigenModel& model, const Eigen::Ref<const Vector>& x);
/// Embeds every column of `test` (d x n_t); returns dims x n_t.
Matrix embed_oos_eigen_batch(const EigenModel& model, const Matrix& test);

/// Kernel-mapping scheme with per-point bandwidths σ_j = γ · (nearest-neighbor distance of x_j).
struct KernelMap {
    Matrix training;  // d x n
    Vector sigma;     // n
    double gamma = 0.3;
    Matrix a;         // n x p

    Index dims() const { return a.cols(); }
};

/// Row-normalized kernel K″(i, j) = k_j(x_i) / Σ_l k_l(x_i) between the columns of `points` and the map's training set.
/// Rows whose kernel sum underflows are left zero and reported in `zero_rows`.
Matrix normalized_kernel(const Matrix& training, const Vector& sigma, const Matrix& points,
                         std::vector<Index>* zero_rows = nullptr);

/// A = K″⁺ Y with Y given as p x n (one column per training point).
KernelMap fit_kernel_map(const Matrix& training, const Matrix& embedding, double gamma = 0.3);

struct MappedPoints {
    Matrix coordinates;           // p x n_t
    std::vector<Index> zero_rows;  // test points with no kernel support
};

MappedPoints embed_oos_kernel_map(const KernelMap& map, const Matrix& test);

/// Median distance over all training pairs.
double median_pairwise_distance(const Matrix& points);

}  // namespace unfold::oos
