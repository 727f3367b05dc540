#pragma once

#include "unfold/parallel.hpp"
#include "unfold/types.hpp"

#include <utility>
#include <vector>

namespace unfold::graph {

enum class KnnMode { all_data, within_class };

struct Edge {
    Index from;
    Index to;
    double length;
};

/// Directed kNN graph: row i lists the out-neighbors j with tau(i, j) = 1.
/// Immutable once built.
class NeighborGraph {
public:
    using Row = std::vector<std::pair<Index, double>>;

    NeighborGraph() = default;
    /// Rows must not contain self-edges or duplicates; lengths must be finite and >= 0.
    NeighborGraph(std::vector<Row> rows, int k);

    Index size() const { return static_cast<Index>(rows_.size()); }
    /// Neighbor count requested at construction (pruned graphs may have fewer per row).
    int k() const { return k_; }
    const std::vector<Row>& rows() const { return rows_; }
    std::vector<Index> neighbors(Index i) const;

    bool tau(Index i, Index j) const;
    double length(Index i, Index j) const;
    std::vector<Edge> edges() const;
    std::size_t edge_count() const;

    /// Union-symmetrized unordered pairs (i < j), lexicographically sorted.
    std::vector<std::pair<Index, Index>> undirected_pairs() const;
    par::Adjacency symmetric_adjacency() const;
    std::vector<std::vector<Index>> components() const;
    bool connected() const { return components().size() <= 1; }
    /// Longest edge length (0 for an edgeless graph).
    double max_length() const;

private:
    std::vector<Row> rows_;
    int k_ = 0;
};

enum class DistanceKind { euclidean, geodesic };

/// Squared distances.
struct DistanceMatrix {
    Matrix values;
    DistanceKind kind = DistanceKind::euclidean;
};

enum class AlignmentSource { lle, diffusion_operator };

struct AlignmentMatrix {
    Matrix values;
    AlignmentSource source = AlignmentSource::lle;
    /// Degrees of the alpha-normalized adjacency (diffusion operator only).
    Vector degrees;
};

enum class WeightKind { binary, rbf };

struct EdgeWeight {
    WeightKind kind = WeightKind::binary;
    /// rbf bandwidth; <= 0 is rejected. Use median_edge_length() for the default.
    double sigma = 1.0;

    static EdgeWeight binary() { return {}; }
    static EdgeWeight rbf(double s) { return {WeightKind::rbf, s}; }
};

struct LaplacianPair {
    Matrix adjacency;  // W
    Matrix laplacian;  // L = D - W
};

NeighborGraph build_knn_graph(const Dataset& data, int k, KnnMode mode = KnnMode::all_data);

DistanceMatrix euclidean_distances(const Dataset& data);
/// Squared shortest-path lengths over the symmetrized weighted graph.
DistanceMatrix geodesic_distances(const NeighborGraph& graph);

double median_edge_length(const NeighborGraph& graph);
/// Symmetrized weight matrix with zero diagonal.
Matrix adjacency_matrix(const NeighborGraph& graph, const EdgeWeight& weight);
LaplacianPair graph_laplacian(const NeighborGraph& graph, const EdgeWeight& weight);

/// Row i holds the reconstruction weights of point i from its out-neighbors.
Matrix lle_weights(const Dataset& data, const NeighborGraph& graph, double reg = 1e-3);
/// M = (I - W)ᵀ(I - W).
AlignmentMatrix lle_alignment(const Dataset& data, const NeighborGraph& graph, double reg = 1e-3);

/// t-th power of the alpha-normalized random-walk transition operator.
AlignmentMatrix diffusion_operator(const NeighborGraph& graph, double sigma, double alpha, int t);

}  // namespace unfold::graph
