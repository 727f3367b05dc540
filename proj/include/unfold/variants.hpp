#pragma once

#include "unfold/graph.hpp"
#include "unfold/mvu.hpp"
#include "unfold/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace unfold::variants {

/// Per class (in ClassIndex order), the point nearest its class mean.
std::vector<Index> class_representatives(const Dataset& data);

/// kNN within each class with k_c = min(k, n_c - 1); singleton classes get no edges.
graph::NeighborGraph within_class_graph(const Dataset& data, int k);

struct SupervisedConfig {
    double alpha = 2.0;
};

/// Class-wise unfolding: within-class spread objective, within-class isometry,
/// and representative pairs (consecutive classes and each class to the last)
/// stretched by alpha.
mvu::KernelProgram smvu1_program(const Dataset& data, const graph::NeighborGraph& graph,
                                 const SupervisedConfig& cfg);

struct Scatters {
    double within = 0.0;
    double between = 0.0;
};

/// Linear functionals of K: within-class scatter about the representatives
/// and between-representative scatter over ordered class pairs.
Scatters fisher_scatters(const Matrix& k, const Dataset& data, const std::vector<Index>& reps);
/// Matrices C_W, C_B with σ_W = tr(C_W K), σ_B = tr(C_B K).
std::pair<Matrix, Matrix> fisher_matrices(const Dataset& data, const std::vector<Index>& reps);

/// Fisher objective C·(σ_B - σ_W) under kNN isometry.
mvu::KernelProgram smvu2_program(const Dataset& data, const graph::NeighborGraph& graph);

/// HSIC objective tr(H K H K_l) under kNN isometry.
mvu::KernelProgram colored_program(const Dataset& data, const graph::NeighborGraph& graph, const Matrix& label_kernel);

/// Isometry on the graph pairs (every pair when graph is null) plus equal
/// embedded distance changes for equally-labelled actions.
mvu::KernelProgram are_program(const Dataset& data, const graph::NeighborGraph* graph,
                               const mvu::MvuOptions& opts = {});

/// Mean of ‖x_l - (x_i + x_j)/2‖² over l in kNN(i) ∪ kNN(j).
double edge_deviation(const Dataset& data, const graph::NeighborGraph& graph, Index i, Index j);

struct PruneThreshold {
    enum class Kind { scree, absolute, quantile } kind = Kind::scree;
    double value = 10.0;  // scree factor on the median, absolute deviation, or quantile in (0, 1)

    static PruneThreshold scree(double factor = 10.0) { return {Kind::scree, factor}; }
    static PruneThreshold absolute(double v) { return {Kind::absolute, v}; }
    static PruneThreshold quantile(double q) { return {Kind::quantile, q}; }
};

struct PruneResult {
    graph::NeighborGraph graph;
    std::vector<graph::Edge> removed;
    /// Deviation of every kept edge, in the order of graph.edges().
    std::vector<double> kept_deviations;
    double threshold = 0.0;
    bool disconnected = false;
};

/// Drops directed edges whose deviation (over the input graph) exceeds the threshold.
PruneResult prune_short_circuits(const graph::NeighborGraph& graph, const Dataset& data,
                                 const PruneThreshold& threshold = {});

/// Mean distance of each point to its out-neighbors.
Vector conformal_scales(const graph::NeighborGraph& graph);
/// Isometry targets scaled by s(x_i)·s(x_j).
std::vector<mvu::PairConstraint> conformal_targets(const graph::NeighborGraph& graph, const Dataset& data);

/// Plain MVU with conformally scaled targets. Non-uniform scales can make the
/// equalities unrealizable; `upper_bound` turns them into <= constraints.
mvu::KernelProgram conformal_program(const Dataset& data, const graph::NeighborGraph& graph, bool upper_bound = false);

struct LandmarkModel {
    std::vector<Index> landmarks;
    /// Point order used by q: landmarks first, then the remaining points ascending.
    std::vector<Index> order;
    Matrix q;  // n x m, top m x m block is the identity
    Matrix l;  // m x m landmark kernel (empty until solved)

    /// Q with rows back in the original point order.
    Matrix q_original() const;
};

/// m distinct landmarks drawn uniformly with the given seed, sorted ascending.
std::vector<Index> select_landmarks(Index n, Index m, std::uint64_t seed);

/// Q = [I; -(M_uu)⁻¹ M_ul] after moving the landmarks first.
LandmarkModel landmark_q(const graph::AlignmentMatrix& m, const std::vector<Index>& landmarks);

/// Reduced basis Q·V for K = Q L Qᵀ with L = V S Vᵀ and the centering constraint built in.
Matrix landmark_basis(const Matrix& q_original);

/// Inequality isometry over K = Q L Qᵀ; solve it with landmark_basis().
mvu::KernelProgram landmark_program(const Dataset& data, const graph::NeighborGraph& graph);

struct LandmarkResult {
    LandmarkModel model;
    mvu::MvuResult result;
};

LandmarkResult solve_landmark(const Dataset& data, const graph::NeighborGraph& graph,
                              const std::vector<Index>& landmarks, const mvu::MvuOptions& opts = {},
                              double lle_reg = 1e-3);

}  // namespace unfold::variants
