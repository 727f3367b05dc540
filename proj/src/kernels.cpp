#include "unfold/kernels.hpp"

#include "unfold/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace unfold::kernels {

namespace {

constexpr std::array kNames{
    std::pair{KernelMethod::pca, "pca"},
    std::pair{KernelMethod::mds, "mds"},
    std::pair{KernelMethod::isomap, "isomap"},
    std::pair{KernelMethod::spectral_clustering, "spectral-clustering"},
    std::pair{KernelMethod::laplacian_eigenmap_pinv, "laplacian-eigenmap-pinv"},
    std::pair{KernelMethod::laplacian_eigenmap_normalized, "laplacian-eigenmap-normalized"},
    std::pair{KernelMethod::lle_shift, "lle-shift"},
    std::pair{KernelMethod::lle_pinv, "lle-pinv"},
    std::pair{KernelMethod::diffusion, "diffusion"},
};

KernelMatrix make(Matrix values, std::string method, bool centered = false) {
    return {symmetrized(values), centered, false, std::move(method)};
}

}  // namespace

std::string_view method_name(KernelMethod m) {
    for (const auto& [k, name] : kNames) {
        if (k == m) return name;
    }
    return "unknown";
}

KernelMethod parse_method(std::string_view name) {
    for (const auto& [k, n] : kNames) {
        if (name == n) return k;
    }
    throw InvalidArgument("unknown kernel method '" + std::string(name) + "'");
}

std::vector<KernelMethod> all_methods() {
    std::vector<KernelMethod> out;
    for (const auto& [k, name] : kNames) out.push_back(k);
    return out;
}

KernelMatrix center_kernel(const KernelMatrix& k) {
    require_symmetric(k.values, "kernel");
    KernelMatrix out = k;
    out.values = symmetrized(double_center(k.values));
    out.centered = true;
    out.psd_checked = false;
    return out;
}

double min_eigenvalue(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

bool check_psd(KernelMatrix& k, double rel_tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(k.values), Eigen::EigenvaluesOnly);
    const Vector& ev = es.eigenvalues();
    const double top = std::max(0.0, ev(ev.size() - 1));
    k.psd_checked = ev(0) >= -rel_tol * top;
    return k.psd_checked;
}

KernelMatrix pca_kernel(const Dataset& data) {
    data.validate();
    return make(data.points.transpose() * data.points, "pca");
}

KernelMatrix distance_kernel(const graph::DistanceMatrix& dist) {
    require_symmetric(dist.values, "distance matrix");
    const char* tag = dist.kind == graph::DistanceKind::geodesic ? "isomap" : "mds";
    return make(-0.5 * double_center(dist.values), tag, true);
}

KernelMatrix normalized_adjacency_kernel(const Matrix& adjacency, std::string method) {
    require_symmetric(adjacency, "adjacency");
    const Vector deg = adjacency.rowwise().sum();
    for (Index i = 0; i < deg.size(); ++i) {
        if (!(deg(i) > 0.0)) throw DataError("node " + std::to_string(i) + " has zero degree");
    }
    const Vector s = deg.cwiseSqrt().cwiseInverse();
    return make(s.asDiagonal() * adjacency * s.asDiagonal(), std::move(method));
}

KernelMatrix laplacian_pinv_kernel(const Matrix& laplacian) {
    require_symmetric(laplacian, "Laplacian");
    return make(symmetric_pinv(laplacian), "laplacian-eigenmap-pinv");
}

KernelMatrix lle_shift_kernel(const Matrix& alignment) {
    require_symmetric(alignment, "alignment matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(alignment), Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    Matrix k = -alignment;
    k.diagonal().array() += top;
    return make(k, "lle-shift");
}

KernelMatrix lle_pinv_kernel(const Matrix& alignment) {
    require_symmetric(alignment, "alignment matrix");
    return make(symmetric_pinv(alignment), "lle-pinv");
}

KernelMatrix diffusion_kernel(const graph::AlignmentMatrix& op) {
    const Matrix& p = op.values;
    if (p.rows() != p.cols()) throw InvalidArgument("diffusion operator must be square");
    if (op.degrees.size() == 0) {
        require_symmetric(p, "diffusion operator");
        return make(p, "diffusion");
    }
    if (op.degrees.size() != p.rows() || (op.degrees.array() <= 0.0).any()) {
        throw InvalidArgument("diffusion degrees must be positive, one per node");
    }
    const Vector root = op.degrees.cwiseSqrt();
    const Matrix k = root.asDiagonal() * p * root.cwiseInverse().asDiagonal();
    require_symmetric(k, "conjugated diffusion operator", 1e-8);
    return make(k, "diffusion");
}

KernelMatrix build_catalog_kernel(KernelMethod method, const Dataset& data, const CatalogOptions& opts) {
    data.validate();
    if (method == KernelMethod::pca) return pca_kernel(data);
    if (method == KernelMethod::mds) return distance_kernel(graph::euclidean_distances(data));

    const auto g = graph::build_knn_graph(data, opts.k);
    const double sigma = opts.sigma ? *opts.sigma : graph::median_edge_length(g);
    switch (method) {
        case KernelMethod::isomap:
            return distance_kernel(graph::geodesic_distances(g));
        case KernelMethod::spectral_clustering:
        case KernelMethod::laplacian_eigenmap_normalized:
            return normalized_adjacency_kernel(graph::adjacency_matrix(g, graph::EdgeWeight::rbf(sigma)),
                                               std::string(method_name(method)));
        case KernelMethod::laplacian_eigenmap_pinv:
            return laplacian_pinv_kernel(graph::graph_laplacian(g, graph::EdgeWeight::rbf(sigma)).laplacian);
        case KernelMethod::lle_shift:
            return lle_shift_kernel(graph::lle_alignment(data, g, opts.lle_reg).values);
        case KernelMethod::lle_pinv:
            return lle_pinv_kernel(graph::lle_alignment(data, g, opts.lle_reg).values);
        case KernelMethod::diffusion:
            return diffusion_kernel(graph::diffusion_operator(g, sigma, opts.diffusion_alpha, opts.diffusion_t));
        default:
            break;
    }
    throw InvalidArgument("unsupported kernel method");
}

double hsic(const Matrix& k, const Matrix& k_labels) {
    const Index n = k.rows();
    if (n < 2) throw InvalidArgument("HSIC needs at least 2 points");
    if (k.cols() != n || k_labels.rows() != n || k_labels.cols() != n) {
        throw InvalidArgument("HSIC kernels must be square and of equal size");
    }
    require_symmetric(k, "kernel");
    require_symmetric(k_labels, "label kernel");
    const Matrix hkh = double_center(k);
    const double value = (k_labels.array() * hkh.array()).sum();
    return value / static_cast<double>((n - 1) * (n - 1));
}

KernelMatrix delta_kernel(const std::vector<std::string>& labels) {
    if (labels.empty()) throw InvalidArgument("delta kernel needs at least one label");
    const auto n = static_cast<Index>(labels.size());
    Matrix k(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) k(i, j) = labels[i] == labels[j] ? 1.0 : 0.0;
    }
    KernelMatrix out{k, false, true, "delta"};
    return out;
}

}  // namespace unfold::kernels
