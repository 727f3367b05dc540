#include "unfold/spectral.hpp"

#include "unfold/linalg.hpp"

#include <cmath>
#include <string>

namespace unfold::spectral {

Embedding embed_from_kernel(const Matrix& k, int p) {
    require_symmetric(k, "kernel");
    const Index n = k.rows();
    if (p < 1 || p > n) throw InvalidArgument("embedding dimension must satisfy 1 <= p <= n");
    const EigenPairs ep = eigen_descending(k);
    Embedding out;
    out.p = p;
    out.eigenvalues = ep.values;
    out.coordinates = Matrix::Zero(p, n);
    for (int d = 0; d < p; ++d) {
        const double delta = ep.values(d);
        if (delta < 0.0) {
            ++out.clamped;
            continue;
        }
        out.coordinates.row(d) = std::sqrt(delta) * ep.vectors.col(d).transpose();
    }
    return out;
}

double KernelFunction::operator()(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const {
    if (kind == Kind::linear) return a.dot(b);
    return std::exp(-(a - b).squaredNorm() / (2.0 * bandwidth * bandwidth));
}

EigenfunctionModel::EigenfunctionModel(const Dataset& training, KernelFunction kernel)
    : points_(training.points), kernel_(kernel) {
    training.validate();
    if (kernel_.kind == KernelFunction::Kind::rbf && !(kernel_.bandwidth > 0.0)) {
        throw InvalidArgument("rbf bandwidth must be positive");
    }
    const Index n = points_.cols();
    Matrix k(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel_(points_.col(i), points_.col(j));
    }
    row_means_ = k.rowwise().mean();
    grand_mean_ = k.mean();
    const EigenPairs ep = eigen_descending(double_center(k));
    values_ = ep.values;
    vectors_ = ep.vectors;
}

int EigenfunctionModel::positive_count(double rel_tol) const {
    const double top = values_.size() ? values_(0) : 0.0;
    int c = 0;
    for (Index d = 0; d < values_.size(); ++d) {
        if (values_(d) > rel_tol * top && values_(d) > 0.0) ++c;
    }
    return c;
}

Vector EigenfunctionModel::centered_column(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != points_.rows()) throw InvalidArgument("point dimension does not match the training data");
    const Index n = points_.cols();
    Vector col(n);
    for (Index i = 0; i < n; ++i) col(i) = kernel_(points_.col(i), x);
    const double mean = col.mean();
    col.array() += grand_mean_ - mean;
    col -= row_means_;
    return col;
}

double eval_eigenfunction(const EigenfunctionModel& model, int k, const Eigen::Ref<const Vector>& x) {
    if (k < 0 || k >= model.size()) throw InvalidArgument("eigenfunction index out of range");
    const double delta = model.eigenvalues()(k);
    if (!(delta > 1e-12 * std::max(1.0, model.eigenvalues()(0)))) {
        throw InvalidArgument("eigenvalue " + std::to_string(k) + " is not positive (rank-deficient kernel)");
    }
    const double n = static_cast<double>(model.size());
    return std::sqrt(n) / delta * model.eigenvectors().col(k).dot(model.centered_column(x));
}

Vector embed_out_of_sample(const EigenfunctionModel& model, const Eigen::Ref<const Vector>& x, int p) {
    if (p < 1 || p > model.positive_count()) {
        throw InvalidArgument("out-of-sample dimension exceeds the number of positive eigenvalues");
    }
    const Vector col = model.centered_column(x);
    Vector y(p);
    for (int d = 0; d < p; ++d) {
        y(d) = model.eigenvectors().col(d).dot(col) / std::sqrt(model.eigenvalues()(d));
    }
    return y;
}

int intrinsic_dimension(const Vector& eigenvalues, double gap_ratio) {
    if (!(gap_ratio > 1.0)) throw InvalidArgument("gap ratio must exceed 1");
    const Index n = eigenvalues.size();
    if (n == 0 || !(eigenvalues(0) > 0.0)) throw InvalidArgument("no positive eigenvalue");
    for (Index p = 0; p < n; ++p) {
        if (!(eigenvalues(p) > 0.0)) return static_cast<int>(p);
        const double next = p + 1 < n ? eigenvalues(p + 1) : 0.0;
        if (next <= 0.0 || eigenvalues(p) / next >= gap_ratio) return static_cast<int>(p + 1);
    }
    return static_cast<int>(n);
}

}  // namespace unfold::spectral
