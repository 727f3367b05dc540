#pragma once

#include "unfold/types.hpp"

#include <optional>
#include <ostream>
#include <vector>

namespace unfold::sdp {

/// Symmetric matrix in factored form A = U C Uᵀ (U is m x r, C is r x r).
class ConstraintMatrix {
public:
    ConstraintMatrix() = default;
    ConstraintMatrix(Matrix factor, Matrix core);

    static ConstraintMatrix dense(const Matrix& a);
    /// scale * a aᵀ
    static ConstraintMatrix rank_one(const Vector& a, double scale = 1.0);
    /// a aᵀ - b bᵀ
    static ConstraintMatrix difference(const Vector& a, const Vector& b);

    Index dim() const { return factor_.rows(); }
    Index rank() const { return factor_.cols(); }
    const Matrix& factor() const { return factor_; }
    const Matrix& core() const { return core_; }

    Matrix to_dense() const;
    /// tr(A S)
    double inner(const Matrix& s) const;

private:
    Matrix factor_;
    Matrix core_;
};

struct Constraint {
    ConstraintMatrix a;
    double rhs = 0.0;
};

enum class Sense { minimize, maximize };

struct SdpProblem {
    Index dim = 0;
    Matrix objective;
    Sense sense = Sense::minimize;
    std::vector<Constraint> equalities;    // tr(A_i S) = b_i
    std::vector<Constraint> inequalities;  // tr(D_j S) <= e_j

    void validate() const;
};

struct SdpOptions {
    double t0 = 1.0;
    double mu = 10.0;
    double tolerance = 1e-7;         // stop when (m + #inequalities) / t < tolerance
    double newton_tolerance = 1e-9;  // on λ²/2
    int max_outer = 50;
    int max_inner = 100;
    double ls_alpha = 0.3;
    double ls_beta = 0.5;
    /// Equality residual accepted as converged, relative to 1 + max |b_i|.
    double feasibility_tolerance = 1e-6;
    /// Newton steps allowed before the equalities are met; more usually means the
    /// feasible set has no positive definite point.
    int max_infeasible_newton = 200;
    /// Step budget of the first centering, which starts from an arbitrary point.
    int max_first_inner = 1000;
    /// When the Newton system loses precision before the stopping rule is met,
    /// the last centered iterate is accepted if (m + #inequalities)/t is below
    /// this fraction of max(1, |objective|).
    double stall_gap_tolerance = 1e-5;
    /// One JSON object per outer iteration when set.
    std::ostream* trace = nullptr;
};

struct SdpSolution {
    Matrix s;
    double objective_value = 0.0;
    double equality_residual = 0.0;
    double inequality_residual = 0.0;
    double barrier_parameter = 0.0;
    int newton_iterations = 0;
    int outer_iterations = 0;
    bool converged = false;
    /// Centering stopped early because the Newton direction lost precision.
    bool stalled = false;
    std::vector<double> objective_trace;
    /// Equality rows dropped by the presolve as linearly dependent.
    int dropped_equalities = 0;
};

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& opts = {},
                      const std::optional<Matrix>& warm_start = std::nullopt);

struct FeasibilityReport {
    Vector equality_residuals;    // tr(A_i S) - b_i
    Vector inequality_residuals;  // max(0, tr(D_j S) - e_j)
    double min_eigenvalue = 0.0;
    double max_equality = 0.0;
    double max_inequality = 0.0;

    bool feasible(double tol) const {
        return max_equality <= tol && max_inequality <= tol && min_eigenvalue >= -tol;
    }
};

FeasibilityReport check_feasibility(const SdpProblem& problem, const Matrix& s);

}  // namespace unfold::sdp
