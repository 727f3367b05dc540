#include "unfold/oos.hpp"

#include "unfold/linalg.hpp"
#include "unfold/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace unfold::oos {

namespace {

/// Squared distances of mean-centered points; centering keeps the Gram
/// expansion accurate for data far from the origin.
Matrix centered_sq_distances(const Matrix& points) {
    const Vector mean = points.rowwise().mean();
    return par::pairwise_sq_distances(points.colwise() - mean);
}

double rbf(double sq, double sigma) { return std::exp(-sq / (2.0 * sigma * sigma)); }

void require_points(const Matrix& points, const char* what) {
    if (points.cols() < 1 || points.rows() < 1) throw InvalidArgument(std::string(what) + " must not be empty");
    if (!points.allFinite()) throw InvalidArgument(std::string(what) + " contains non-finite values");
}

}  // namespace

double median_pairwise_distance(const Matrix& points) {
    const Matrix sq = centered_sq_distances(points);
    std::vector<double> d;
    for (Index j = 0; j < sq.cols(); ++j)
        for (Index i = j + 1; i < sq.rows(); ++i) d.push_back(std::sqrt(sq(i, j)));
    if (d.empty()) throw InvalidArgument("median distance needs at least 2 points");
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    if (d.size() % 2 == 1) return *mid;
    return 0.5 * (*mid + *std::max_element(d.begin(), mid));
}

Matrix eigen_projection(const Matrix& r, const Matrix& k, int dims, double eta) {
    const Index n = k.rows();
    if (k.cols() != n || r.rows() != n || r.cols() != n) throw InvalidArgument("R and K must be n x n");
    if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
    if (dims < 1 || dims > n) throw InvalidArgument("dimension must lie in [1, n]");
    require_symmetric(r, "smoothing kernel");
    require_symmetric(k, "learned kernel");

    const EigenPairs ep = eigen_descending(symmetrized(k));
    for (int c = 0; c < dims; ++c) {
        if (!(ep.values(c) > 0.0)) {
            throw DataError("eigenvalue " + std::to_string(c + 1) + " of the learned kernel is not positive");
        }
    }
    Matrix reg = symmetrized(r);
    reg.diagonal().array() += eta;
    const Eigen::LDLT<Matrix> ldlt(reg);
    if (ldlt.info() != Eigen::Success) throw DataError("R + eta I could not be factored");
    const Matrix b = ldlt.solve(Matrix::Identity(n, n));  // (R + ηI)⁻¹
    const Matrix right = symmetrized(b * k * b);
    Matrix p(dims, n);
    for (int c = 0; c < dims; ++c) {
        p.row(c) = (ep.vectors.col(c).transpose() * r * right) / std::sqrt(ep.values(c));
    }
    return p;
}

EigenModel fit_oos_eigen(const Matrix& training, const Matrix& k, int dims, const EigenOptions& opts) {
    require_points(training, "training set");
    const Index n = training.cols();
    if (k.rows() != n || k.cols() != n) throw InvalidArgument("kernel side must match the training set");
    EigenModel m;
    m.training = training;
    m.bandwidth = opts.bandwidth ? *opts.bandwidth : median_pairwise_distance(training);
    if (!(m.bandwidth > 0.0)) throw InvalidArgument("smoothing bandwidth must be positive");
    const Matrix sq = centered_sq_distances(training);
    Matrix r(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) r(i, j) = rbf(sq(i, j), m.bandwidth);
    m.eta = opts.eta ? *opts.eta : 1e-6 * r.trace() / static_cast<double>(n);
    m.p = eigen_projection(r, k, dims, m.eta);
    return m;
}

Vector smoothing_column(const EigenModel& model, const Eigen::Ref<const Vector>& x) {
    if (x.size() != model.training.rows()) throw InvalidArgument("point dimension does not match the model");
    Vector out(model.training.cols());
    for (Index i = 0; i < out.size(); ++i) out(i) = rbf((model.training.col(i) - x).squaredNorm(), model.bandwidth);
    return out;
}

Vector embed_oos_eigen(const EigenModel& model, const Eigen::Ref<const Vector>& x) {
    return model.p * smoothing_column(model, x);
}

Matrix embed_oos_eigen_batch(const EigenModel& model, const Matrix& test) {
    Matrix out(model.dims(), test.cols());
    for (Index j = 0; j < test.cols(); ++j) out.col(j) = embed_oos_eigen(model, test.col(j));
    return out;
}

Matrix normalized_kernel(const Matrix& training, const Vector& sigma, const Matrix& points, std::vector<Index>* zero_rows) {
    if (points.rows() != training.rows()) throw InvalidArgument("point dimension does not match the training set");
    const Index n = training.cols();
    Matrix out(points.cols(), n);
    for (Index i = 0; i < points.cols(); ++i) {
        for (Index j = 0; j < n; ++j) out(i, j) = rbf((points.col(i) - training.col(j)).squaredNorm(), sigma(j));
        const double sum = out.row(i).sum();
        if (sum > std::numeric_limits<double>::min()) {
            out.row(i) /= sum;
        } else {
            out.row(i).setZero();
            if (zero_rows) zero_rows->push_back(i);
        }
    }
    return out;
}

KernelMap fit_kernel_map(const Matrix& training, const Matrix& embedding, double gamma) {
    require_points(training, "training set");
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    const Index n = training.cols();
    if (embedding.cols() != n) throw InvalidArgument("embedding must have one column per training point");
    KernelMap map;
    map.training = training;
    map.gamma = gamma;
    map.sigma = Vector::Ones(n);
    if (n > 1) {
        const Matrix sq = centered_sq_distances(training);
        for (Index j = 0; j < n; ++j) {
            double nearest = std::numeric_limits<double>::infinity();
            for (Index i = 0; i < n; ++i) {
                if (i != j) nearest = std::min(nearest, sq(i, j));
            }
            if (!(nearest > 0.0)) {
                throw DataError("training point " + std::to_string(j) + " duplicates another point (zero bandwidth)");
            }
            map.sigma(j) = gamma * std::sqrt(nearest);
        }
    }
    std::vector<Index> zero;
    const Matrix kn = normalized_kernel(training, map.sigma, training, &zero);
    if (!zero.empty()) throw DataError("training kernel row underflowed");
    const Eigen::BDCSVD<Matrix> svd(kn, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cutoff = 1e-10 * s(0);
    Vector inv = Vector::Zero(s.size());
    for (Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff) inv(i) = 1.0 / s(i);
    }
    map.a = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * embedding.transpose();
    return map;
}

MappedPoints embed_oos_kernel_map(const KernelMap& map, const Matrix& test) {
    MappedPoints out;
    const Matrix kt = normalized_kernel(map.training, map.sigma, test, &out.zero_rows);
    out.coordinates = (kt * map.a).transpose();
    return out;
}

}  // namespace unfold::oos
