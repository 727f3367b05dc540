#pragma once

#include "unfold/sdp.hpp"
#include "unfold/types.hpp"

#include <optional>
#include <vector>

namespace unfold::sdp {

struct NewtonStep {
    Vector u;
    Vector nu;
};

/// Solves [[H, Aᵀ], [A, 0]] [u; ν] = [-∇f; -(A x - b)].
NewtonStep newton_equality_step(const Vector& gradient, const Matrix& hessian, const Matrix& a, const Vector& b,
                                const Vector& x);

/// F0 + Σ x_i F_i ⪰ 0
struct LmiBlock {
    Matrix f0;
    std::vector<Matrix> fi;

    Matrix at(const Vector& x) const;
};

/// minimize ½xᵀQx + cᵀx  s.t.  A x = b,  G x <= h,  every LMI block PSD.
struct BarrierProblem {
    Matrix q;  // empty means zero
    Vector c;
    Matrix a;
    Vector b;
    Matrix g;
    Vector h;
    std::vector<LmiBlock> lmis;

    Index size() const { return c.size(); }
    Index barrier_degree() const;
    void validate() const;
};

struct BarrierSolution {
    Vector x;
    double objective_value = 0.0;
    double equality_residual = 0.0;
    double barrier_parameter = 0.0;
    int newton_iterations = 0;
    bool converged = false;
};

BarrierSolution barrier_solve(const BarrierProblem& problem, const SdpOptions& opts = {},
                              const std::optional<Vector>& start = std::nullopt);

}  // namespace unfold::sdp
