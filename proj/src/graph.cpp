#include "unfold/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace unfold::graph {

NeighborGraph::NeighborGraph(std::vector<Row> rows, int k) : rows_(std::move(rows)), k_(k) {
    const Index n = size();
    for (Index i = 0; i < n; ++i) {
        auto& row = rows_[static_cast<std::size_t>(i)];
        for (const auto& [j, len] : row) {
            if (j < 0 || j >= n) throw InvalidArgument("neighbor index out of range");
            if (j == i) throw InvalidArgument("self-edge in neighbor graph");
            if (!(len >= 0.0) || !std::isfinite(len)) throw InvalidArgument("edge length must be finite and nonnegative");
        }
        std::sort(row.begin(), row.end());
        auto dup = std::adjacent_find(row.begin(), row.end(),
                                      [](const auto& a, const auto& b) { return a.first == b.first; });
        if (dup != row.end()) throw InvalidArgument("duplicate edge in neighbor graph");
    }
}

std::vector<Index> NeighborGraph::neighbors(Index i) const {
    std::vector<Index> out;
    for (const auto& [j, len] : rows_[static_cast<std::size_t>(i)]) out.push_back(j);
    return out;
}

bool NeighborGraph::tau(Index i, Index j) const {
    const auto& row = rows_[static_cast<std::size_t>(i)];
    auto it = std::lower_bound(row.begin(), row.end(), j, [](const auto& e, Index v) { return e.first < v; });
    return it != row.end() && it->first == j;
}

double NeighborGraph::length(Index i, Index j) const {
    const auto& row = rows_[static_cast<std::size_t>(i)];
    auto it = std::lower_bound(row.begin(), row.end(), j, [](const auto& e, Index v) { return e.first < v; });
    if (it == row.end() || it->first != j) throw InvalidArgument("not an edge of the graph");
    return it->second;
}

std::vector<Edge> NeighborGraph::edges() const {
    std::vector<Edge> out;
    for (Index i = 0; i < size(); ++i) {
        for (const auto& [j, len] : rows_[static_cast<std::size_t>(i)]) out.push_back({i, j, len});
    }
    return out;
}

std::size_t NeighborGraph::edge_count() const {
    std::size_t c = 0;
    for (const auto& r : rows_) c += r.size();
    return c;
}

std::vector<std::pair<Index, Index>> NeighborGraph::undirected_pairs() const {
    std::vector<std::pair<Index, Index>> out;
    for (Index i = 0; i < size(); ++i) {
        for (const auto& [j, len] : rows_[static_cast<std::size_t>(i)]) {
            out.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

par::Adjacency NeighborGraph::symmetric_adjacency() const {
    par::Adjacency adj(rows_.size());
    for (auto [i, j] : undirected_pairs()) {
        const double len = tau(i, j) ? length(i, j) : length(j, i);
        adj[static_cast<std::size_t>(i)].emplace_back(j, len);
        adj[static_cast<std::size_t>(j)].emplace_back(i, len);
    }
    return adj;
}

std::vector<std::vector<Index>> NeighborGraph::components() const {
    const Index n = size();
    const auto adj = symmetric_adjacency();
    std::vector<Index> comp(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<Index>> out;
    for (Index s = 0; s < n; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) continue;
        const Index id = static_cast<Index>(out.size());
        out.emplace_back();
        std::vector<Index> stack{s};
        comp[static_cast<std::size_t>(s)] = id;
        while (!stack.empty()) {
            const Index u = stack.back();
            stack.pop_back();
            out.back().push_back(u);
            for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
                if (comp[static_cast<std::size_t>(v)] < 0) {
                    comp[static_cast<std::size_t>(v)] = id;
                    stack.push_back(v);
                }
            }
        }
        std::sort(out.back().begin(), out.back().end());
    }
    return out;
}

double NeighborGraph::max_length() const {
    double m = 0.0;
    for (const auto& row : rows_) {
        for (const auto& [j, len] : row) m = std::max(m, len);
    }
    return m;
}

NeighborGraph build_knn_graph(const Dataset& data, int k, KnnMode mode) {
    data.validate();
    const Index n = data.size();
    if (k < 1 || k >= n) {
        throw InvalidArgument("k must satisfy 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }
    const Matrix sq = par::pairwise_sq_distances(data.points);

    std::vector<std::vector<Index>> groups;
    if (mode == KnnMode::within_class) {
        if (!data.labels) throw InvalidArgument("within-class kNN requires labels");
        auto classes = index_classes(*data.labels);
        for (Index c = 0; c < classes.count(); ++c) {
            const auto& members = classes.members[static_cast<std::size_t>(c)];
            if (static_cast<Index>(members.size()) <= k) {
                throw InvalidArgument("class '" + classes.names[static_cast<std::size_t>(c)] + "' has " +
                                      std::to_string(members.size()) + " points; within-class kNN needs more than k=" +
                                      std::to_string(k));
            }
        }
        groups = std::move(classes.members);
    } else {
        groups.emplace_back(static_cast<std::size_t>(n));
        std::iota(groups.back().begin(), groups.back().end(), Index{0});
    }

    std::vector<NeighborGraph::Row> rows(static_cast<std::size_t>(n));
    for (const auto& members : groups) {
        const auto lists = par::knn_lists(sq, members, k);
        for (std::size_t a = 0; a < members.size(); ++a) {
            const Index i = members[a];
            auto& row = rows[static_cast<std::size_t>(i)];
            for (Index j : lists[a]) row.emplace_back(j, std::sqrt(sq(i, j)));
        }
    }
    return NeighborGraph(std::move(rows), k);
}

DistanceMatrix euclidean_distances(const Dataset& data) {
    return {par::pairwise_sq_distances(data.points), DistanceKind::euclidean};
}

DistanceMatrix geodesic_distances(const NeighborGraph& graph) {
    auto comps = graph.components();
    if (comps.size() > 1) throw DisconnectedGraph(std::move(comps));
    Matrix d = par::shortest_paths(graph.symmetric_adjacency());
    // Dijkstra from each side may round differently; enforce symmetry.
    d = (0.5 * (d + d.transpose())).eval();
    return {d.array().square().matrix(), DistanceKind::geodesic};
}

double median_edge_length(const NeighborGraph& graph) {
    std::vector<double> lens;
    for (const auto& e : graph.edges()) lens.push_back(e.length);
    if (lens.empty()) throw InvalidArgument("graph has no edges");
    const auto mid = lens.begin() + static_cast<std::ptrdiff_t>(lens.size() / 2);
    std::nth_element(lens.begin(), mid, lens.end());
    if (lens.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(lens.begin(), mid);
    return 0.5 * (lower + upper);
}

Matrix adjacency_matrix(const NeighborGraph& graph, const EdgeWeight& weight) {
    if (weight.kind == WeightKind::rbf && !(weight.sigma > 0.0)) throw InvalidArgument("rbf bandwidth must be positive");
    const Index n = graph.size();
    Matrix w = Matrix::Zero(n, n);
    for (const auto& [i, j] : graph.undirected_pairs()) {
        double v = 1.0;
        if (weight.kind == WeightKind::rbf) {
            const double len = graph.tau(i, j) ? graph.length(i, j) : graph.length(j, i);
            v = std::exp(-len * len / (2.0 * weight.sigma * weight.sigma));
        }
        w(i, j) = w(j, i) = v;
    }
    return w;
}

LaplacianPair graph_laplacian(const NeighborGraph& graph, const EdgeWeight& weight) {
    LaplacianPair out;
    out.adjacency = adjacency_matrix(graph, weight);
    out.laplacian = -out.adjacency;
    out.laplacian.diagonal() = out.adjacency.rowwise().sum();
    return out;
}

Matrix lle_weights(const Dataset& data, const NeighborGraph& graph, double reg) {
    if (reg < 0.0) throw InvalidArgument("LLE regularization must be nonnegative");
    const Index n = data.size();
    if (graph.size() != n) throw InvalidArgument("graph and dataset sizes differ");
    Matrix w = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        const auto nb = graph.neighbors(i);
        const Index k = static_cast<Index>(nb.size());
        if (k == 0) continue;
        Matrix z(data.dim(), k);
        for (Index a = 0; a < k; ++a) z.col(a) = data.point(nb[static_cast<std::size_t>(a)]) - data.point(i);
        Matrix c = z.transpose() * z;
        if (reg > 0.0) {
            const double tr = c.trace();
            c.diagonal().array() += reg * (tr > 0.0 ? tr : 1.0);
        }
        Eigen::ColPivHouseholderQR<Matrix> qr(c);
        qr.setThreshold(1e-12);
        if (qr.rank() < k) {
            throw DataError("singular local Gram matrix at point " + std::to_string(i) +
                            " (increase the LLE regularization)");
        }
        Vector wi = qr.solve(Vector::Ones(k));
        wi /= wi.sum();
        for (Index a = 0; a < k; ++a) w(i, nb[static_cast<std::size_t>(a)]) = wi(a);
    }
    return w;
}

AlignmentMatrix lle_alignment(const Dataset& data, const NeighborGraph& graph, double reg) {
    const Matrix w = lle_weights(data, graph, reg);
    const Matrix iw = Matrix::Identity(w.rows(), w.cols()) - w;
    AlignmentMatrix out;
    out.values = iw.transpose() * iw;
    out.values = (0.5 * (out.values + out.values.transpose())).eval();
    out.source = AlignmentSource::lle;
    return out;
}

AlignmentMatrix diffusion_operator(const NeighborGraph& graph, double sigma, double alpha, int t) {
    if (!(sigma > 0.0)) throw InvalidArgument("diffusion bandwidth must be positive");
    if (t < 1) throw InvalidArgument("diffusion time must be >= 1");
    if (alpha < 0.0 || alpha > 1.0) throw InvalidArgument("diffusion alpha must lie in [0, 1]");
    auto comps = graph.components();
    if (comps.size() > 1) throw DisconnectedGraph(std::move(comps));

    const Matrix w = adjacency_matrix(graph, EdgeWeight::rbf(sigma));
    const Vector deg = w.rowwise().sum();
    const Vector scale = deg.array().pow(-alpha);
    const Matrix wa = scale.asDiagonal() * w * scale.asDiagonal();
    const Vector deg_a = wa.rowwise().sum();
    const Matrix step = deg_a.cwiseInverse().asDiagonal() * wa;

    Matrix power = step;
    for (int s = 1; s < t; ++s) power = (power * step).eval();
    return {power, AlignmentSource::diffusion_operator, deg_a};
}

}  // namespace unfold::graph
