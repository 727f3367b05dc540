#include "unfold/variants.hpp"

#include "unfold/linalg.hpp"
#include "unfold/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace unfold::variants {

namespace {

const std::vector<std::string>& require_labels(const Dataset& data) {
    if (!data.labels) throw InvalidArgument("this variant requires class labels");
    return *data.labels;
}

/// Components of the union of the given pairs over n points.
std::vector<std::vector<Index>> pair_components(Index n, const std::vector<mvu::PairConstraint>& pairs) {
    std::vector<Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (const auto& p : pairs) parent[static_cast<std::size_t>(find(p.i))] = find(p.j);
    std::vector<std::vector<Index>> groups(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) groups[static_cast<std::size_t>(find(i))].push_back(i);
    std::vector<std::vector<Index>> out;
    for (auto& g : groups) {
        if (!g.empty()) out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end());
    return out;
}

double sq_dist(const Dataset& data, Index i, Index j) { return (data.point(i) - data.point(j)).squaredNorm(); }

}  // namespace

std::vector<Index> class_representatives(const Dataset& data) {
    const auto classes = index_classes(require_labels(data));
    std::vector<Index> reps;
    for (const auto& members : classes.members) {
        Vector mean = Vector::Zero(data.dim());
        for (Index i : members) mean += data.point(i);
        mean /= static_cast<double>(members.size());
        Index best = members.front();
        double best_d = (data.point(best) - mean).squaredNorm();
        for (Index i : members) {
            const double d = (data.point(i) - mean).squaredNorm();
            if (d < best_d || (d == best_d && i < best)) {
                best = i;
                best_d = d;
            }
        }
        reps.push_back(best);
    }
    return reps;
}

graph::NeighborGraph within_class_graph(const Dataset& data, int k) {
    data.validate();
    if (k < 1) throw InvalidArgument("k must be >= 1");
    const auto classes = index_classes(require_labels(data));
    const Matrix sq = par::pairwise_sq_distances(data.points);
    std::vector<graph::NeighborGraph::Row> rows(static_cast<std::size_t>(data.size()));
    for (const auto& members : classes.members) {
        const int kc = std::min(k, static_cast<int>(members.size()) - 1);
        if (kc < 1) continue;
        const auto lists = par::knn_lists(sq, members, kc);
        for (std::size_t a = 0; a < members.size(); ++a) {
            for (Index j : lists[a]) rows[static_cast<std::size_t>(members[a])].emplace_back(j, std::sqrt(sq(members[a], j)));
        }
    }
    return graph::NeighborGraph(std::move(rows), k);
}

mvu::KernelProgram smvu1_program(const Dataset& data, const graph::NeighborGraph& graph,
                                 const SupervisedConfig& cfg) {
    data.validate();
    if (!(cfg.alpha > 1.0)) throw InvalidArgument("alpha must be > 1");
    const auto classes = index_classes(require_labels(data));
    const Index c = classes.count();
    if (c < 2) throw InvalidArgument("class-wise unfolding needs at least 2 classes");
    const Index n = data.size();
    const auto reps = class_representatives(data);

    mvu::KernelProgram prog;
    prog.n = n;
    prog.objective = Matrix::Zero(n, n);
    for (const auto& members : classes.members) {
        const double inv = 1.0 / static_cast<double>(members.size());
        for (Index i : members) {
            prog.objective(i, i) += 1.0;
            for (Index j : members) prog.objective(i, j) -= inv;
        }
    }
    for (const auto& p : mvu::isometry_pairs(data, &graph)) {
        if (classes.of_point[static_cast<std::size_t>(p.i)] != classes.of_point[static_cast<std::size_t>(p.j)]) {
            throw InvalidArgument("class-wise unfolding needs a within-class graph");
        }
        prog.equalities.push_back(p);
    }
    std::set<std::pair<Index, Index>> rep_pairs;
    for (Index a = 0; a + 1 < c; ++a) {
        for (Index b : {a + 1, c - 1}) {
            const Index i = reps[static_cast<std::size_t>(a)];
            const Index j = reps[static_cast<std::size_t>(b)];
            rep_pairs.emplace(std::min(i, j), std::max(i, j));
        }
    }
    for (const auto& [i, j] : rep_pairs) prog.equalities.push_back({i, j, cfg.alpha * cfg.alpha * sq_dist(data, i, j)});

    auto comps = pair_components(n, prog.equalities);
    if (comps.size() > 1) throw DisconnectedGraph(std::move(comps));

    // Moving each class rigidly by (alpha - 1) times its representative keeps
    // within-class distances and stretches every representative pair by alpha.
    Matrix shifted = data.points;
    for (Index i = 0; i < n; ++i) {
        const Index r = reps[static_cast<std::size_t>(classes.of_point[static_cast<std::size_t>(i)])];
        shifted.col(i) += (cfg.alpha - 1.0) * data.point(r);
    }
    prog.anchor = symmetrized(double_center(shifted.transpose() * shifted));
    return prog;
}

std::pair<Matrix, Matrix> fisher_matrices(const Dataset& data, const std::vector<Index>& reps) {
    const auto classes = index_classes(require_labels(data));
    if (static_cast<Index>(reps.size()) != classes.count()) throw InvalidArgument("one representative per class required");
    const Index n = data.size();
    for (Index r : reps) {
        if (r < 0 || r >= n) throw InvalidArgument("representative index out of range");
    }
    auto add_pair = [](Matrix& m, Index i, Index j, double w) {
        m(i, i) += w;
        m(j, j) += w;
        m(i, j) -= w;
        m(j, i) -= w;
    };
    Matrix cw = Matrix::Zero(n, n);
    for (Index c = 0; c < classes.count(); ++c) {
        const auto& members = classes.members[static_cast<std::size_t>(c)];
        const double w = 1.0 / static_cast<double>(members.size());
        for (Index i : members) {
            if (i != reps[static_cast<std::size_t>(c)]) add_pair(cw, i, reps[static_cast<std::size_t>(c)], w);
        }
    }
    Matrix cb = Matrix::Zero(n, n);
    for (Index a : reps) {
        for (Index b : reps) {
            if (a != b) add_pair(cb, a, b, 1.0);
        }
    }
    return {cw, cb};
}

Scatters fisher_scatters(const Matrix& k, const Dataset& data, const std::vector<Index>& reps) {
    if (k.rows() != data.size() || k.cols() != data.size()) throw InvalidArgument("kernel must be n x n");
    const auto [cw, cb] = fisher_matrices(data, reps);
    return {(cw.array() * k.array()).sum(), (cb.array() * k.array()).sum()};
}

mvu::KernelProgram smvu2_program(const Dataset& data, const graph::NeighborGraph& graph) {
    const auto classes = index_classes(require_labels(data));
    if (classes.count() < 2) throw InvalidArgument("Fisher unfolding needs at least 2 classes");
    mvu::KernelProgram prog = mvu::mvu_program(data, &graph);
    const auto [cw, cb] = fisher_matrices(data, class_representatives(data));
    prog.objective = static_cast<double>(classes.count()) * (cb - cw);
    return prog;
}

mvu::KernelProgram colored_program(const Dataset& data, const graph::NeighborGraph& graph, const Matrix& label_kernel) {
    if (label_kernel.rows() != data.size() || label_kernel.cols() != data.size()) {
        throw InvalidArgument("label kernel must be n x n");
    }
    require_symmetric(label_kernel, "label kernel");
    mvu::KernelProgram prog = mvu::mvu_program(data, &graph);
    prog.objective = symmetrized(double_center(label_kernel));
    return prog;
}

mvu::KernelProgram are_program(const Dataset& data, const graph::NeighborGraph* graph, const mvu::MvuOptions& opts) {
    if (!data.actions) throw InvalidArgument("action respecting embedding requires actions");
    mvu::KernelProgram prog = mvu::mvu_program(data, graph, opts);
    const auto& acts = *data.actions;
    const Index steps = static_cast<Index>(acts.size());
    for (Index i = 0; i < steps; ++i) {
        for (Index j = i + 1; j < steps; ++j) {
            if (acts[static_cast<std::size_t>(i)] == acts[static_cast<std::size_t>(j)]) {
                prog.differences.push_back({i, j, i + 1, j + 1});
            }
        }
    }
    return prog;
}

double edge_deviation(const Dataset& data, const graph::NeighborGraph& graph, Index i, Index j) {
    const Vector mid = 0.5 * (data.point(i) + data.point(j));
    std::vector<Index> hood = graph.neighbors(i);
    const auto nj = graph.neighbors(j);
    hood.insert(hood.end(), nj.begin(), nj.end());
    std::sort(hood.begin(), hood.end());
    hood.erase(std::unique(hood.begin(), hood.end()), hood.end());
    if (hood.empty()) return 0.0;
    double sum = 0.0;
    for (Index l : hood) sum += (data.point(l) - mid).squaredNorm();
    return sum / static_cast<double>(hood.size());
}

PruneResult prune_short_circuits(const graph::NeighborGraph& graph, const Dataset& data, const PruneThreshold& threshold) {
    if (graph.size() != data.size()) throw InvalidArgument("graph and dataset sizes differ");
    const auto edges = graph.edges();
    if (edges.empty()) throw InvalidArgument("graph has no edges");
    std::vector<double> dev;
    dev.reserve(edges.size());
    for (const auto& e : edges) dev.push_back(edge_deviation(data, graph, e.from, e.to));

    std::vector<double> sorted = dev;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };

    PruneResult out;
    switch (threshold.kind) {
        case PruneThreshold::Kind::scree:
            if (!(threshold.value > 0.0)) throw InvalidArgument("scree factor must be positive");
            out.threshold = quantile(0.5) * threshold.value;
            break;
        case PruneThreshold::Kind::absolute:
            if (!(threshold.value > 0.0)) throw InvalidArgument("deviation threshold must be positive");
            out.threshold = threshold.value;
            break;
        case PruneThreshold::Kind::quantile:
            if (!(threshold.value > 0.0 && threshold.value < 1.0)) throw InvalidArgument("quantile must lie in (0, 1)");
            out.threshold = quantile(threshold.value);
            break;
    }

    std::vector<graph::NeighborGraph::Row> rows(static_cast<std::size_t>(graph.size()));
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (dev[e] > out.threshold) {
            out.removed.push_back(edges[e]);
        } else {
            rows[static_cast<std::size_t>(edges[e].from)].emplace_back(edges[e].to, edges[e].length);
            out.kept_deviations.push_back(dev[e]);
        }
    }
    out.graph = graph::NeighborGraph(std::move(rows), graph.k());
    out.disconnected = !out.graph.connected();
    return out;
}

Vector conformal_scales(const graph::NeighborGraph& graph) {
    const Index n = graph.size();
    const auto sym = graph.symmetric_adjacency();
    Vector s(n);
    for (Index i = 0; i < n; ++i) {
        const auto& row = graph.rows()[static_cast<std::size_t>(i)];
        const auto& fallback = sym[static_cast<std::size_t>(i)];
        const auto& use = row.empty() ? fallback : row;
        if (use.empty()) throw InvalidArgument("point " + std::to_string(i) + " has no neighbors");
        double sum = 0.0;
        for (const auto& [j, len] : use) sum += len;
        s(i) = sum / static_cast<double>(use.size());
    }
    return s;
}

std::vector<mvu::PairConstraint> conformal_targets(const graph::NeighborGraph& graph, const Dataset& data) {
    const Vector s = conformal_scales(graph);
    auto pairs = mvu::isometry_pairs(data, &graph);
    for (auto& p : pairs) p.target *= s(p.i) * s(p.j);
    return pairs;
}

mvu::KernelProgram conformal_program(const Dataset& data, const graph::NeighborGraph& graph, bool upper_bound) {
    mvu::KernelProgram prog = mvu::mvu_program(data, &graph);
    const Vector s = conformal_scales(graph);
    double mean_scale = 0.0;
    for (auto& p : prog.equalities) {
        const double f = s(p.i) * s(p.j);
        p.target *= f;
        mean_scale += f;
    }
    mean_scale /= static_cast<double>(std::max<std::size_t>(prog.equalities.size(), 1));
    // Exact when every scale is equal, approximate otherwise.
    *prog.anchor *= mean_scale;
    if (upper_bound) {
        prog.inequalities = std::move(prog.equalities);
        prog.equalities.clear();
        prog.anchor.reset();
    }
    return prog;
}

Matrix LandmarkModel::q_original() const {
    Matrix out(q.rows(), q.cols());
    for (std::size_t r = 0; r < order.size(); ++r) out.row(order[r]) = q.row(static_cast<Index>(r));
    return out;
}

std::vector<Index> select_landmarks(Index n, Index m, std::uint64_t seed) {
    if (m < 1 || m > n) throw InvalidArgument("landmark count must lie in [1, n]");
    Rng rng(seed);
    auto picks = rng.sample(n, m);
    std::sort(picks.begin(), picks.end());
    return picks;
}

LandmarkModel landmark_q(const graph::AlignmentMatrix& m, const std::vector<Index>& landmarks) {
    const Index n = m.values.rows();
    if (m.values.cols() != n) throw InvalidArgument("alignment matrix must be square");
    LandmarkModel out;
    out.landmarks = landmarks;
    std::vector<bool> is_landmark(static_cast<std::size_t>(n), false);
    for (Index l : landmarks) {
        if (l < 0 || l >= n) throw InvalidArgument("landmark index out of range");
        if (is_landmark[static_cast<std::size_t>(l)]) throw InvalidArgument("duplicate landmark");
        is_landmark[static_cast<std::size_t>(l)] = true;
    }
    const Index nl = static_cast<Index>(landmarks.size());
    if (nl < 1) throw InvalidArgument("at least one landmark is required");
    out.order = landmarks;
    std::vector<Index> rest;
    for (Index i = 0; i < n; ++i) {
        if (!is_landmark[static_cast<std::size_t>(i)]) rest.push_back(i);
    }
    out.order.insert(out.order.end(), rest.begin(), rest.end());

    const Index nu = n - nl;
    out.q = Matrix::Zero(n, nl);
    out.q.topRows(nl).setIdentity();
    if (nu == 0) return out;

    Matrix muu(nu, nu);
    Matrix mul(nu, nl);
    for (Index a = 0; a < nu; ++a) {
        const Index i = rest[static_cast<std::size_t>(a)];
        for (Index b = 0; b < nu; ++b) muu(a, b) = m.values(i, rest[static_cast<std::size_t>(b)]);
        for (Index b = 0; b < nl; ++b) mul(a, b) = m.values(i, landmarks[static_cast<std::size_t>(b)]);
    }
    muu = symmetrized(muu);
    Eigen::LDLT<Matrix> ldlt(muu);
    const Vector dg = ldlt.vectorD().cwiseAbs();
    const double scale = std::max(dg.maxCoeff(), 1e-300);
    if (ldlt.info() != Eigen::Success || dg.minCoeff() <= 1e-10 * scale) {
        muu.diagonal().array() += 1e-8 * std::max(muu.trace(), 1e-300);
        ldlt.compute(muu);
        const Vector d2 = ldlt.vectorD().cwiseAbs();
        if (ldlt.info() != Eigen::Success || d2.minCoeff() <= 1e-14 * d2.maxCoeff()) {
            throw DataError("non-landmark block of the alignment matrix is singular");
        }
    }
    out.q.bottomRows(nu) = -ldlt.solve(mul);
    return out;
}

Matrix landmark_basis(const Matrix& q_original) {
    const Index m = q_original.cols();
    const Vector v = q_original.transpose() * Vector::Ones(q_original.rows());
    if (v.norm() <= 1e-12 * std::sqrt(static_cast<double>(q_original.rows()))) return q_original;
    if (m < 2) throw InvalidArgument("a centered landmark kernel needs at least 2 landmarks");
    return q_original * complement_basis(v);
}

mvu::KernelProgram landmark_program(const Dataset& data, const graph::NeighborGraph& graph) {
    data.validate();
    auto comps = graph.components();
    if (comps.size() > 1) throw DisconnectedGraph(std::move(comps));
    mvu::KernelProgram prog;
    prog.n = data.size();
    prog.objective = Matrix::Identity(prog.n, prog.n);
    prog.inequalities = mvu::isometry_pairs(data, &graph);
    return prog;
}

LandmarkResult solve_landmark(const Dataset& data, const graph::NeighborGraph& graph,
                              const std::vector<Index>& landmarks, const mvu::MvuOptions& opts, double lle_reg) {
    const auto prog = landmark_program(data, graph);
    LandmarkResult out;
    out.model = landmark_q(graph::lle_alignment(data, graph, lle_reg), landmarks);
    const Matrix q = out.model.q_original();
    out.result = mvu::solve_program(prog, graph.max_length(), opts, landmark_basis(q), &data);
    const Matrix& k = out.result.kernel.values;
    const Index nl = static_cast<Index>(landmarks.size());
    out.model.l.resize(nl, nl);
    for (Index a = 0; a < nl; ++a)
        for (Index b = 0; b < nl; ++b) out.model.l(a, b) = k(landmarks[static_cast<std::size_t>(a)], landmarks[static_cast<std::size_t>(b)]);
    out.result.kernel.method = "landmark-mvu";
    return out;
}

}  // namespace unfold::variants
