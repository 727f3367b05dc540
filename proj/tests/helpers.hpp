#pragma once

#include "unfold/sdp.hpp"
#include "unfold/types.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <random>

namespace testing {

inline unfold::Matrix random_matrix(unfold::Index rows, unfold::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    unfold::Matrix m(rows, cols);
    for (unfold::Index j = 0; j < cols; ++j)
        for (unfold::Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
    return m;
}

inline unfold::Matrix random_spd(unfold::Index n, std::mt19937_64& rng) {
    const unfold::Matrix b = random_matrix(n, n, rng);
    return b * b.transpose() + 0.5 * unfold::Matrix::Identity(n, n);
}

inline unfold::Matrix random_symmetric(unfold::Index n, std::mt19937_64& rng) {
    const unfold::Matrix b = random_matrix(n, n, rng);
    return 0.5 * (b + b.transpose());
}

/// Relative Frobenius distance after matching each row's sign.
inline double rowwise_sign_distance(const unfold::Matrix& a, const unfold::Matrix& b) {
    double err = 0.0;
    for (unfold::Index r = 0; r < a.rows(); ++r) {
        const double plus = (a.row(r) - b.row(r)).squaredNorm();
        const double minus = (a.row(r) + b.row(r)).squaredNorm();
        err += std::min(plus, minus);
    }
    return std::sqrt(err) / std::max(1e-300, b.norm());
}

}  // namespace testing

namespace testing {

/// Dataset from a list of point coordinates.
inline unfold::Dataset make_points(std::initializer_list<std::initializer_list<double>> cols) {
    const auto d = static_cast<unfold::Index>(cols.begin()->size());
    unfold::Matrix p(d, static_cast<unfold::Index>(cols.size()));
    unfold::Index j = 0;
    for (const auto& c : cols) {
        unfold::Index i = 0;
        for (double v : c) p(i++, j) = v;
        ++j;
    }
    return unfold::Dataset(p);
}

/// Archimedean spiral r = theta from theta = 1, roughly even in arc length.
inline unfold::Matrix spiral_points(unfold::Index n, double turns = 2.0) {
    unfold::Matrix p(2, n);
    const double end = 1.0 + 2.0 * 3.141592653589793 * turns;
    for (unfold::Index i = 0; i < n; ++i) {
        const double t = std::sqrt(1.0 + (end * end - 1.0) * static_cast<double>(i) / static_cast<double>(n - 1));
        p(0, i) = t * std::cos(t);
        p(1, i) = t * std::sin(t);
    }
    return p;
}

/// Optimum of an SDP of dimension 2 or 3 with one equality tr(A S) = b (A positive
/// definite, b > 0) and at most one inequality, by grid search over rank-one points
/// S = w wᵀ followed by local grid refinement. Such feasible sets have only rank-one
/// extreme points.
inline double brute_force_sdp(const unfold::sdp::SdpProblem& pb, int grid = 400) {
    using unfold::Matrix;
    using unfold::Vector;
    constexpr double pi = 3.141592653589793;
    constexpr double inf = std::numeric_limits<double>::infinity();
    const unfold::Index m = pb.dim;
    const Matrix a = pb.equalities.at(0).a.to_dense();
    const double b = pb.equalities[0].rhs;
    const bool bounded = !pb.inequalities.empty();
    const Matrix d = bounded ? pb.inequalities[0].a.to_dense() : Matrix::Zero(m, m);
    const double e = bounded ? pb.inequalities[0].rhs : 0.0;
    const double sign = pb.sense == unfold::sdp::Sense::maximize ? -1.0 : 1.0;
    Vector u(m);
    const auto value = [&](double theta, double phi) {
        if (m == 2)
            u << std::cos(theta), std::sin(theta);
        else
            u << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
        const double scale = b / u.dot(a * u);
        if (bounded && scale * u.dot(d * u) > e) return inf;
        return sign * scale * u.dot(pb.objective * u);
    };
    const int phis = m == 2 ? 1 : 2 * grid;
    double step_theta = pi / grid;
    double step_phi = m == 2 ? 0.0 : 2.0 * pi / phis;
    double best = inf, best_theta = 0.0, best_phi = 0.0;
    for (int i = 0; i <= grid; ++i)
        for (int j = 0; j < phis; ++j) {
            const double v = value(i * step_theta, j * step_phi);
            if (v < best) best = v, best_theta = i * step_theta, best_phi = j * step_phi;
        }
    for (int round = 0; round < 5; ++round) {
        step_theta /= 10.0;
        step_phi /= 10.0;
        const double t0 = best_theta, p0 = best_phi;
        for (int i = -20; i <= 20; ++i)
            for (int j = m == 2 ? 0 : -20; j <= (m == 2 ? 0 : 20); ++j) {
                const double v = value(t0 + i * step_theta, p0 + j * step_phi);
                if (v < best) best = v, best_theta = t0 + i * step_theta, best_phi = p0 + j * step_phi;
            }
    }
    return sign * best;
}

/// Random SDP of dimension m with tr(A S) = 1 for a random positive definite A and,
/// when `bounded`, one inequality passing through the point A⁻¹/m.
inline unfold::sdp::SdpProblem random_small_sdp(unfold::Index m, bool bounded, bool maximize, std::mt19937_64& rng) {
    using namespace unfold::sdp;
    SdpProblem pb;
    pb.dim = m;
    pb.objective = random_symmetric(m, rng);
    pb.sense = maximize ? Sense::maximize : Sense::minimize;
    const unfold::Matrix a = random_spd(m, rng);
    pb.equalities.push_back({ConstraintMatrix::dense(a), 1.0});
    if (bounded) {
        const unfold::Matrix d = random_symmetric(m, rng);
        const unfold::Matrix center = a.inverse() / static_cast<double>(m);
        pb.inequalities.push_back({ConstraintMatrix::dense(d), (d.array() * center.array()).sum()});
    }
    return pb;
}

/// S such that W S Wᵀ = K for K in the range of the basis W.
inline unfold::Matrix reduce_kernel(const unfold::Matrix& k, const unfold::Matrix& w) {
    const unfold::Matrix pinv = (w.transpose() * w).ldlt().solve(w.transpose());
    const unfold::Matrix s = pinv * k * pinv.transpose();
    return 0.5 * (s + s.transpose());
}

}  // namespace testing
