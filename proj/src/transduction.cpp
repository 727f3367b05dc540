#include "unfold/transduction.hpp"

#include "unfold/barrier.hpp"
#include "unfold/linalg.hpp"

#include <cmath>
#include <string>

namespace unfold::transduction {

void TransductionProblem::validate() const {
    if (kernels.empty()) throw InvalidArgument("at least one candidate kernel is required");
    const Index n = size();
    const Index ntr = training_size();
    if (ntr < 1) throw InvalidArgument("at least one training label is required");
    if (ntr > n) throw InvalidArgument("more labels than kernel rows");
    for (int y : labels) {
        if (y != 1 && y != -1) throw InvalidArgument("labels must be +1 or -1");
    }
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        const Matrix& k = kernels[i];
        if (k.rows() != n || k.cols() != n) throw InvalidArgument("candidate kernels must share one square size");
        require_symmetric(k, "candidate kernel");
        const Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(k), Eigen::EigenvaluesOnly);
        const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
        if (es.eigenvalues()(0) < -1e-9 * top) {
            throw InvalidArgument("candidate kernel " + std::to_string(i) + " is not positive semidefinite");
        }
    }
    if (c1 < 0.0 || c2 < 0.0 || tau_reg < 0.0) throw InvalidArgument("c1, c2 and tau_reg must be nonnegative");
    if (!(lambda_bound > 0.0)) throw InvalidArgument("lambda bound must be positive");
}

namespace {

double target_trace(const TransductionProblem& p) { return p.c1 > 0.0 ? p.c1 : static_cast<double>(p.size()); }

/// G(K_tr)_ij = y_i y_j K_ij over the training block.
Matrix label_gram(const Matrix& k, const Vector& y) {
    const Index ntr = y.size();
    return y.asDiagonal() * k.topLeftCorner(ntr, ntr) * y.asDiagonal();
}

}  // namespace

Matrix lmi_block(const TransductionProblem& problem, const Vector& mu, const Vector& nu, const Vector& delta,
                 double lambda, double t) {
    const Index ntr = problem.training_size();
    Vector y(ntr);
    for (Index i = 0; i < ntr; ++i) y(i) = problem.labels[static_cast<std::size_t>(i)];
    Matrix block = Matrix::Zero(ntr + 1, ntr + 1);
    for (std::size_t i = 0; i < problem.kernels.size(); ++i) {
        block.topLeftCorner(ntr, ntr) += mu(static_cast<Index>(i)) * label_gram(problem.kernels[i], y);
    }
    block.topLeftCorner(ntr, ntr).diagonal().array() += problem.tau_reg;
    const Vector z = Vector::Ones(ntr) + nu - delta + lambda * y;
    block.topRightCorner(ntr, 1) = z;
    block.bottomLeftCorner(1, ntr) = z.transpose();
    block(ntr, ntr) = t - 2.0 * problem.c2 * delta.sum();
    return block;
}

TransductionResult solve_transduction_kernel(const TransductionProblem& problem, const sdp::SdpOptions& opts) {
    problem.validate();
    const Index m = static_cast<Index>(problem.kernels.size());
    const Index ntr = problem.training_size();
    const double c1 = target_trace(problem);
    Vector traces(m);
    for (Index i = 0; i < m; ++i) traces(i) = problem.kernels[static_cast<std::size_t>(i)].trace();
    if (!(traces.maxCoeff() > 0.0)) throw SolverError("infeasible: no nonnegative combination reaches the trace target");

    Vector y(ntr);
    for (Index i = 0; i < ntr; ++i) y(i) = problem.labels[static_cast<std::size_t>(i)];

    // x = [μ (m), ν (ntr), δ (ntr), λ, t]
    const Index nv = m + 2 * ntr + 2;
    const Index il = m + 2 * ntr;
    const Index it = il + 1;
    sdp::BarrierProblem bp;
    bp.c = Vector::Zero(nv);
    bp.c(it) = 1.0;
    bp.a = Matrix::Zero(1, nv);
    bp.a.leftCols(m) = traces.transpose();
    bp.b = Vector::Constant(1, c1);

    const Index nineq = m + 2 * ntr + 2;
    bp.g = Matrix::Zero(nineq, nv);
    bp.h = Vector::Zero(nineq);
    for (Index i = 0; i < m + 2 * ntr; ++i) bp.g(i, i) = -1.0;  // μ, ν, δ >= 0
    bp.g(m + 2 * ntr, il) = 1.0;
    bp.g(m + 2 * ntr + 1, il) = -1.0;
    bp.h(m + 2 * ntr) = problem.lambda_bound;
    bp.h(m + 2 * ntr + 1) = problem.lambda_bound;

    sdp::LmiBlock lmi;
    const Index side = ntr + 1;
    lmi.f0 = Matrix::Zero(side, side);
    lmi.f0.topLeftCorner(ntr, ntr).diagonal().array() = problem.tau_reg;
    lmi.f0.topRightCorner(ntr, 1).setOnes();
    lmi.f0.bottomLeftCorner(1, ntr).setOnes();
    lmi.fi.assign(static_cast<std::size_t>(nv), Matrix::Zero(side, side));
    for (Index i = 0; i < m; ++i) {
        lmi.fi[static_cast<std::size_t>(i)].topLeftCorner(ntr, ntr) = label_gram(problem.kernels[static_cast<std::size_t>(i)], y);
    }
    for (Index i = 0; i < ntr; ++i) {
        Matrix& fn = lmi.fi[static_cast<std::size_t>(m + i)];
        fn(i, ntr) = fn(ntr, i) = 1.0;
        Matrix& fd = lmi.fi[static_cast<std::size_t>(m + ntr + i)];
        fd(i, ntr) = fd(ntr, i) = -1.0;
        fd(ntr, ntr) = -2.0 * problem.c2;
    }
    Matrix& fl = lmi.fi[static_cast<std::size_t>(il)];
    fl.topRightCorner(ntr, 1) = y;
    fl.bottomLeftCorner(1, ntr) = y.transpose();
    lmi.fi[static_cast<std::size_t>(it)](ntr, ntr) = 1.0;
    bp.lmis.push_back(std::move(lmi));

    // Strict start: equal weights, unit ν, small δ, λ = 0 and t above the Schur bound.
    std::optional<Vector> start;
    {
        Vector x = Vector::Zero(nv);
        x.head(m).setConstant(c1 / traces.sum());
        for (Index i = 0; i < m; ++i) {
            if (!(traces(i) > 0.0)) x(i) = 1e-3 * c1 / traces.sum();
        }
        x.head(m) *= c1 / traces.dot(x.head(m));
        x.segment(m, ntr).setOnes();
        x.segment(m + ntr, ntr).setConstant(0.1);
        Matrix top = Matrix::Identity(ntr, ntr) * problem.tau_reg;
        for (Index i = 0; i < m; ++i) top += x(i) * label_gram(problem.kernels[static_cast<std::size_t>(i)], y);
        const Eigen::LLT<Matrix> llt(symmetrized(top));
        if (llt.info() == Eigen::Success) {
            const Vector z = Vector::Constant(ntr, 1.9);
            x(it) = z.dot(llt.solve(z)) + 2.0 * problem.c2 * 0.1 * static_cast<double>(ntr) + 1.0;
            start = x;
        }
    }

    const sdp::BarrierSolution sol = sdp::barrier_solve(bp, opts, start);
    TransductionResult out;
    out.mu = sol.x.head(m).cwiseMax(0.0);
    out.nu = sol.x.segment(m, ntr);
    out.delta = sol.x.segment(m + ntr, ntr);
    out.lambda = sol.x(il);
    out.t = sol.x(it);
    out.newton_iterations = sol.newton_iterations;
    out.converged = sol.converged;
    if (m == 1) out.mu(0) = c1 / traces(0);  // the trace equality pins the lone weight
    out.kernel = Matrix::Zero(problem.size(), problem.size());
    for (Index i = 0; i < m; ++i) out.kernel += out.mu(i) * problem.kernels[static_cast<std::size_t>(i)];

    const Matrix block = lmi_block(problem, out.mu, out.nu, out.delta, out.lambda, out.t);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(block), Eigen::EigenvaluesOnly);
    out.lmi_min_eigenvalue = es.eigenvalues()(0);
    out.lmi_scale = std::max(1.0, block.cwiseAbs().maxCoeff());
    return out;
}

double kernel_predict(const Vector& alphas, double b, const Vector& kernel_column) {
    if (alphas.size() != kernel_column.size()) throw InvalidArgument("coefficient and kernel column lengths differ");
    return alphas.dot(kernel_column) + b;
}

}  // namespace unfold::transduction
