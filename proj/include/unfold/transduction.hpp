#pragma once

#include "unfold/sdp.hpp"
#include "unfold/types.hpp"

#include <vector>

namespace unfold::transduction {

/// Candidate kernels over train + test points (training points first) and
/// ±1 labels for the training block.
struct TransductionProblem {
    std::vector<Matrix> kernels;
    std::vector<int> labels;
    /// Trace of the learned kernel; n when unset (<= 0).
    double c1 = 0.0;
    double c2 = 1.0;
    /// Ridge added to G(K_tr) inside the LMI.
    double tau_reg = 1e-3;
    /// Box on the bias multiplier λ. The program is unbounded in λ when all
    /// labels agree; the box keeps a central path without moving the optimum.
    double lambda_bound = 1e4;

    Index size() const { return kernels.empty() ? 0 : kernels.front().rows(); }
    Index training_size() const { return static_cast<Index>(labels.size()); }
    void validate() const;
};

struct TransductionResult {
    Matrix kernel;   // Σ μ_i K_i
    Vector mu;
    Vector nu;
    Vector delta;
    double lambda = 0.0;
    double t = 0.0;
    /// Smallest eigenvalue of the assembled LMI block at the solution.
    double lmi_min_eigenvalue = 0.0;
    /// Scale used for the LMI check: largest |entry| of the block.
    double lmi_scale = 0.0;
    int newton_iterations = 0;
    bool converged = false;
};

/// The block [[G(K_tr) + τI, e + ν − δ + λy], [·ᵀ, t − 2c₂ δᵀe]].
Matrix lmi_block(const TransductionProblem& problem, const Vector& mu, const Vector& nu, const Vector& delta,
                 double lambda, double t);

/// Minimizes t over nonnegative combinations of the candidate kernels with tr(K) = c₁.
TransductionResult solve_transduction_kernel(const TransductionProblem& problem, const sdp::SdpOptions& opts = {});

/// f(x) = Σ α_i k(x_i, x) + b
double kernel_predict(const Vector& alphas, double b, const Vector& kernel_column);
inline int predict_label(double score) { return score >= 0.0 ? 1 : -1; }

}  // namespace unfold::transduction
