#include "unfold/datasets.hpp"

#include "unfold/random.hpp"

#include <cmath>
#include <numbers>

namespace unfold::datasets {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSpiralStart = 1.0;
constexpr double kSpiralTurns = 2.0;
constexpr double kRollStart = 1.5 * kPi;
constexpr double kRollEnd = 4.5 * kPi;

/// Sample positions equally spaced in arc length for a curve given by `at`,
/// using a dense cumulative-length table inverted by interpolation.
template <class Curve>
Matrix equal_arc_samples(Index n, Index dim, double lo, double hi, bool closed, Curve&& at, Vector& arc) {
    constexpr Index kTable = 20000;
    Vector s(kTable + 1);
    s(0) = 0.0;
    Vector prev = at(lo);
    for (Index i = 1; i <= kTable; ++i) {
        const Vector cur = at(lo + (hi - lo) * static_cast<double>(i) / kTable);
        s(i) = s(i - 1) + (cur - prev).norm();
        prev = cur;
    }
    const double total = s(kTable);
    const double step = closed ? total / static_cast<double>(n) : total / static_cast<double>(n - 1);
    Matrix pts(dim, n);
    arc.resize(n);
    Index seg = 0;
    for (Index j = 0; j < n; ++j) {
        const double target = std::min(step * static_cast<double>(j), total);
        while (seg + 1 < kTable && s(seg + 1) < target) ++seg;
        const double span = s(seg + 1) - s(seg);
        const double frac = span > 0.0 ? (target - s(seg)) / span : 0.0;
        const double p = lo + (hi - lo) * (static_cast<double>(seg) + frac) / kTable;
        pts.col(j) = at(p);
        arc(j) = target;
    }
    return pts;
}

Generated spiral(Index n) {
    Generated g;
    const double s0 = spiral_arc_length(kSpiralStart);
    const double s1 = spiral_arc_length(kSpiralStart + 2.0 * kPi * kSpiralTurns);
    Matrix pts(2, n);
    g.parameters.resize(1, n);
    for (Index j = 0; j < n; ++j) {
        const double s = s0 + (s1 - s0) * static_cast<double>(j) / static_cast<double>(n - 1);
        const double th = spiral_angle_at(s);
        pts(0, j) = th * std::cos(th);
        pts(1, j) = th * std::sin(th);
        g.parameters(0, j) = s - s0;
    }
    g.data = Dataset(pts);
    g.parameter_names = {"arc_length"};
    return g;
}

Generated trefoil(Index n) {
    auto at = [](double t) {
        Vector p(3);
        p << std::sin(t) + 2.0 * std::sin(2.0 * t), std::cos(t) - 2.0 * std::cos(2.0 * t), -std::sin(3.0 * t);
        return p;
    };
    Generated g;
    Vector arc;
    g.data = Dataset(equal_arc_samples(n, 3, 0.0, 2.0 * kPi, true, at, arc));
    g.parameters = arc.transpose();
    g.parameter_names = {"arc_length"};
    return g;
}

Generated hinge(Index n) {
    Matrix pts(2, n);
    Generated g;
    g.parameters.resize(1, n);
    for (Index j = 0; j < n; ++j) {
        pts(0, j) = static_cast<double>((j + 1) / 2);
        pts(1, j) = static_cast<double>(j / 2);
        g.parameters(0, j) = static_cast<double>(j);
    }
    g.data = Dataset(pts);
    g.parameter_names = {"arc_length"};
    return g;
}

Generated swiss_roll(Index n, Rng& rng) {
    // Uniform in area: the roll's arc length grows as t²/2, so draw t² uniformly.
    Matrix pts(3, n);
    Generated g;
    g.parameters.resize(2, n);
    for (Index j = 0; j < n; ++j) {
        const double t = std::sqrt(rng.uniform(kRollStart * kRollStart, kRollEnd * kRollEnd));
        const double h = rng.uniform(0.0, kSwissRollHeight);
        pts(0, j) = t * std::cos(t);
        pts(1, j) = h;
        pts(2, j) = t * std::sin(t);
        g.parameters(0, j) = t;
        g.parameters(1, j) = h;
    }
    g.data = Dataset(pts);
    g.parameter_names = {"t", "height"};
    return g;
}

Generated s_curve(Index n, Rng& rng) {
    // The S is two unit half circles, so t is already proportional to arc length.
    Matrix pts(3, n);
    Generated g;
    g.parameters.resize(2, n);
    for (Index j = 0; j < n; ++j) {
        const double t = 3.0 * kPi * (rng.uniform() - 0.5);
        const double v = rng.uniform(0.0, 2.0);
        pts(0, j) = std::sin(t);
        pts(1, j) = v;
        pts(2, j) = std::copysign(1.0, t) * (std::cos(t) - 1.0);
        g.parameters(0, j) = t;
        g.parameters(1, j) = v;
    }
    g.data = Dataset(pts);
    g.parameter_names = {"t", "v"};
    return g;
}

}  // namespace

void ManifoldSpec::validate() const {
    bool known = false;
    for (const auto& m : manifold_names()) known = known || m == name;
    if (!known) throw InvalidArgument("unknown manifold '" + name + "'");
    if (n < 2) throw InvalidArgument("manifold needs n >= 2 points");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidArgument("noise must be a nonnegative number");
}

const std::vector<std::string>& manifold_names() {
    static const std::vector<std::string> names{"swiss-roll-3d", "spiral-2d", "trefoil-3d", "s-curve-3d", "hinge-chain"};
    return names;
}

double spiral_arc_length(double theta) {
    return 0.5 * (theta * std::sqrt(1.0 + theta * theta) + std::asinh(theta));
}

double spiral_angle_at(double arc_length) {
    if (arc_length < 0.0) throw InvalidArgument("arc length must be nonnegative");
    double th = std::sqrt(2.0 * arc_length);
    for (int it = 0; it < 60; ++it) {
        const double step = (spiral_arc_length(th) - arc_length) / std::sqrt(1.0 + th * th);
        th -= step;
        if (std::abs(step) <= 1e-15 * (1.0 + th)) break;
    }
    return th;
}

Generated generate(const ManifoldSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    Generated g;
    if (spec.name == "spiral-2d") {
        g = spiral(spec.n);
    } else if (spec.name == "trefoil-3d") {
        g = trefoil(spec.n);
    } else if (spec.name == "hinge-chain") {
        g = hinge(spec.n);
    } else if (spec.name == "swiss-roll-3d") {
        g = swiss_roll(spec.n, rng);
    } else {
        g = s_curve(spec.n, rng);
    }
    if (spec.noise > 0.0) {
        for (Index j = 0; j < g.data.points.cols(); ++j)
            for (Index i = 0; i < g.data.points.rows(); ++i) g.data.points(i, j) += spec.noise * rng.normal();
    }
    return g;
}

}  // namespace unfold::datasets
