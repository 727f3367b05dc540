#pragma once

#include "unfold/graph.hpp"
#include "unfold/kernels.hpp"
#include "unfold/sdp.hpp"
#include "unfold/spectral.hpp"
#include "unfold/types.hpp"

#include <optional>
#include <vector>

namespace unfold::mvu {

/// K_ii + K_jj - 2 K_ij (=, or <= for landmark programs) target.
struct PairConstraint {
    Index i = 0;
    Index j = 0;
    double target = 0.0;
};

/// (K_ii + K_jj - 2K_ij) - (K_kk + K_ll - 2K_kl) = 0
struct PairDifference {
    Index i = 0, j = 0, k = 0, l = 0;
};

/// A kernel-learning program over n x n kernels of the form K = W S Wᵀ,
/// maximizing tr(C K). W spans the admissible subspace (centering built in).
struct KernelProgram {
    Index n = 0;
    Matrix objective;  // C, n x n
    std::vector<PairConstraint> equalities;
    std::vector<PairConstraint> inequalities;
    std::vector<PairDifference> differences;
    /// Optional known feasible kernel (used for the warm start).
    std::optional<Matrix> anchor;
};

struct MvuOptions {
    sdp::SdpOptions solver;
    /// Embedding dimension; intrinsic_dimension of the learned spectrum when unset.
    std::optional<int> dimension;
    double gap_ratio = 10.0;
    /// Full-pair programs have n(n-1)/2 constraints.
    Index full_pair_cap = 80;
    bool allow_large_full_pair = false;
    /// When the exact program has no positive definite feasible point (rigid
    /// sub-frameworks), each equality is relaxed to a band of this width,
    /// relative to the largest target.
    double band = 1e-7;
    /// Newton steps spent on the exact program before falling back to the band.
    int exact_attempt_newton = 60;
    /// Start the barrier at t0 = (barrier degree) / |objective at the warm start|
    /// instead of solver.t0.
    bool auto_t0 = true;
};

struct ConstraintReport {
    double max_isometry_residual = 0.0;   // absolute, in squared-distance units
    double max_inequality_violation = 0.0;
    double max_target = 0.0;
    double centering = 0.0;               // ‖K1‖ / ‖K‖
    double min_eigenvalue = 0.0;          // relative to λ_max
    int dropped_constraints = 0;
};

struct MvuResult {
    kernels::KernelMatrix kernel;
    spectral::Embedding embedding;
    double objective_trace = 0.0;  // tr(K)
    double objective_value = 0.0;  // tr(C K) for the program's objective
    ConstraintReport report;
    double variance_bound = 0.0;   // n³τ²/2
    double tau = 0.0;
    double gram_trace = 0.0;       // tr(HGH)
    int newton_iterations = 0;
    int outer_iterations = 0;
    bool converged = false;
    /// Equalities were solved as two-sided bands of half-width `band` · max target.
    bool relaxed = false;
    std::vector<double> objective_history;
};

/// Squared input distances over the symmetrized graph pairs, or every pair when graph is null.
std::vector<PairConstraint> isometry_pairs(const Dataset& data, const graph::NeighborGraph* graph);

/// Centered Gram matrix HGH of the input.
Matrix centered_gram(const Dataset& data);

/// Plain MVU program (kNN when a graph is given, full pairs otherwise).
KernelProgram mvu_program(const Dataset& data, const graph::NeighborGraph* graph, const MvuOptions& opts = {});

/// Reduced SDP for K = W S Wᵀ. Returns the problem together with W.
struct AssembledSdp {
    sdp::SdpProblem problem;
    Matrix basis;  // W
    std::optional<Matrix> warm_start;
};
/// band > 0 turns every equality into |value - target| <= band (in target units).
AssembledSdp assemble(const KernelProgram& program, const std::optional<Matrix>& basis = std::nullopt,
                      double band = 0.0);

/// Assembles the plain MVU program in reduced form.
AssembledSdp assemble_mvu(const Dataset& data, const graph::NeighborGraph* graph, const MvuOptions& opts = {});

/// Solves a kernel program, rebuilds K and embeds it. `tau` feeds the variance bound.
MvuResult solve_program(const KernelProgram& program, double tau, const MvuOptions& opts = {},
                        const std::optional<Matrix>& basis = std::nullopt, const Dataset* data = nullptr);

MvuResult solve_mvu(const Dataset& data, const graph::NeighborGraph* graph, const MvuOptions& opts = {});

/// Longest constrained pair distance (the longest edge for kNN programs).
double max_pair_length(const std::vector<PairConstraint>& pairs);

}  // namespace unfold::mvu
