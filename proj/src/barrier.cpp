#include "unfold/barrier.hpp"

#include "unfold/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

namespace unfold::sdp {

NewtonStep newton_equality_step(const Vector& gradient, const Matrix& hessian, const Matrix& a, const Vector& b,
                                const Vector& x) {
    const Index n = x.size();
    const Index p = a.rows();
    if (gradient.size() != n || hessian.rows() != n || hessian.cols() != n) {
        throw InvalidArgument("Newton step: gradient/Hessian shape mismatch");
    }
    if (p > 0 && (a.cols() != n || b.size() != p)) throw InvalidArgument("Newton step: constraint shape mismatch");
    const Matrix hs = symmetrized(hessian);
    const Vector residual = p > 0 ? Vector(a * x - b) : Vector();
    Vector d = Vector::Ones(n);
    for (Index i = 0; i < n; ++i) {
        if (hs(i, i) > 0.0) d(i) = 1.0 / std::sqrt(hs(i, i));
    }
    Eigen::LLT<Matrix> llt(d.asDiagonal() * hs * d.asDiagonal());
    if (llt.info() == Eigen::Success) {
        // Eliminate u: (A H⁻¹ Aᵀ) ν = (A x - b) - A H⁻¹ ∇f, with H⁻¹ = D (D H D)⁻¹ D.
        auto hsolve = [&](const Matrix& rhs) -> Matrix { return d.asDiagonal() * llt.solve(d.asDiagonal() * rhs); };
        const Vector hg = hsolve(gradient);
        if (p == 0) return {-hg, Vector()};
        const Matrix hat = hsolve(Matrix(a.transpose()));
        const Matrix schur = symmetrized(a * hat);
        Eigen::ColPivHouseholderQR<Matrix> qr(schur);
        qr.setThreshold(1e-13);
        if (qr.rank() < p) throw SolverError("singular KKT system (degenerate constraints)");
        const Vector nu = qr.solve(Vector(residual - a * hg));
        return {Vector(-hg - hat * nu), nu};
    }
    Matrix kkt = Matrix::Zero(n + p, n + p);
    kkt.topLeftCorner(n, n) = hs;
    Vector rhs(n + p);
    rhs.head(n) = -gradient;
    if (p > 0) {
        kkt.topRightCorner(n, p) = a.transpose();
        kkt.bottomLeftCorner(p, n) = a;
        rhs.tail(p) = -residual;
    }
    // Near the boundary the Hessian is badly scaled; equilibrate its diagonal and
    // accept any solve with a small residual.
    Vector scale = Vector::Ones(n + p);
    for (Index i = 0; i < n; ++i) {
        if (hs(i, i) > 0.0) scale(i) = 1.0 / std::sqrt(hs(i, i));
    }
    const Matrix scaled = scale.asDiagonal() * kkt * scale.asDiagonal();
    const Vector sol = scale.cwiseProduct(Eigen::PartialPivLU<Matrix>(scaled).solve(scale.cwiseProduct(rhs)));
    if (!sol.allFinite() || (kkt * sol - rhs).norm() > 1e-9 * (kkt.norm() * sol.norm() + rhs.norm())) {
        throw SolverError("singular KKT system (degenerate constraints)");
    }
    return {sol.head(n), sol.tail(p)};
}

Matrix LmiBlock::at(const Vector& x) const {
    Matrix f = f0;
    for (std::size_t i = 0; i < fi.size(); ++i) f += x(static_cast<Index>(i)) * fi[i];
    return f;
}

Index BarrierProblem::barrier_degree() const {
    Index d = h.size();
    for (const auto& l : lmis) d += l.f0.rows();
    return d;
}

void BarrierProblem::validate() const {
    const Index n = size();
    if (n < 1) throw InvalidArgument("barrier problem needs at least one variable");
    if (q.size() && (q.rows() != n || q.cols() != n)) throw InvalidArgument("Q must be n x n");
    if (a.rows() != b.size() || (a.rows() && a.cols() != n)) throw InvalidArgument("equality shape mismatch");
    if (g.rows() != h.size() || (g.rows() && g.cols() != n)) throw InvalidArgument("inequality shape mismatch");
    for (const auto& l : lmis) {
        if (static_cast<Index>(l.fi.size()) != n) throw InvalidArgument("LMI block needs one matrix per variable");
        require_symmetric(l.f0, "LMI constant term");
        for (const auto& f : l.fi) {
            if (f.rows() != l.f0.rows() || f.cols() != l.f0.cols()) throw InvalidArgument("LMI blocks differ in size");
        }
    }
}

namespace {

struct Point {
    Vector x;
    Vector slack;
    std::vector<Eigen::LLT<Matrix>> chol;
    double barrier = 0.0;  // -Σ log slack - Σ log det F
};

std::optional<Point> evaluate(const BarrierProblem& pb, const Vector& x) {
    Point pt;
    pt.x = x;
    if (pb.h.size()) {
        pt.slack = pb.h - pb.g * x;
        if (!(pt.slack.array() > 0.0).all()) return std::nullopt;
        pt.barrier -= pt.slack.array().log().sum();
    }
    for (const auto& l : pb.lmis) {
        Eigen::LLT<Matrix> llt(symmetrized(l.at(x)));
        if (llt.info() != Eigen::Success) return std::nullopt;
        const auto d = llt.matrixLLT().diagonal();
        if (!d.allFinite() || (d.array() <= 0.0).any()) return std::nullopt;
        pt.barrier -= 2.0 * d.array().log().sum();
        pt.chol.push_back(std::move(llt));
    }
    return pt;
}

double objective(const BarrierProblem& pb, const Vector& x) {
    double v = pb.c.dot(x);
    if (pb.q.size()) v += 0.5 * x.dot(pb.q * x);
    return v;
}

void derivatives(const BarrierProblem& pb, const Point& pt, double t, Vector& grad, Matrix& hess) {
    const Index n = pb.size();
    grad = t * pb.c;
    hess = Matrix::Zero(n, n);
    if (pb.q.size()) {
        grad += t * (pb.q * pt.x);
        hess += t * pb.q;
    }
    if (pb.h.size()) {
        const Vector inv = pt.slack.cwiseInverse();
        grad += pb.g.transpose() * inv;
        hess += pb.g.transpose() * inv.cwiseAbs2().asDiagonal() * pb.g;
    }
    for (std::size_t b = 0; b < pb.lmis.size(); ++b) {
        const auto& l = pb.lmis[b];
        std::vector<Matrix> sf(static_cast<std::size_t>(n));  // F^{-1} F_i
        for (Index i = 0; i < n; ++i) {
            sf[static_cast<std::size_t>(i)] = pt.chol[b].solve(l.fi[static_cast<std::size_t>(i)]);
            grad(i) -= sf[static_cast<std::size_t>(i)].trace();
        }
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j <= i; ++j) {
                const double v =
                    (sf[static_cast<std::size_t>(i)].array() * sf[static_cast<std::size_t>(j)].transpose().array()).sum();
                hess(i, j) += v;
                if (i != j) hess(j, i) += v;
            }
        }
    }
}

struct Run {
    Point pt;
    double t = 0.0;
    int newton = 0;
    bool converged = false;
};

template <class Stop>
Run run(const BarrierProblem& pb, Point start, const SdpOptions& opts, Stop&& stop) {
    Run r{std::move(start), opts.t0};
    const Index p = pb.a.rows();
    const double b_scale = 1.0 + (p ? pb.b.cwiseAbs().maxCoeff() : 0.0);
    auto eq_res = [&](const Vector& x) { return p ? (pb.a * x - pb.b).cwiseAbs().maxCoeff() : 0.0; };
    bool feasible = eq_res(r.pt.x) <= 1e-10 * b_scale;
    Vector nu = Vector::Zero(p);
    const double degree = static_cast<double>(std::max<Index>(pb.barrier_degree(), 1));

    auto residual = [&](const Point& pt, const Vector& lam, double t) {
        Vector g;
        Matrix h;
        derivatives(pb, pt, t, g, h);
        if (p) g += pb.a.transpose() * lam;
        const double pr = p ? (pb.a * pt.x - pb.b).squaredNorm() : 0.0;
        return std::sqrt(g.squaredNorm() + pr);
    };

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        const double t = r.t;
        for (int inner = 0; inner < opts.max_inner; ++inner) {
            Vector grad;
            Matrix hess;
            derivatives(pb, r.pt, t, grad, hess);
            const NewtonStep step = newton_equality_step(grad, hess, pb.a, pb.b, r.pt.x);
            const double lambda2 = step.u.dot(hess * step.u);
            if (feasible && lambda2 / 2.0 <= opts.newton_tolerance) break;
            ++r.newton;
            std::optional<Point> next;
            double alpha = 1.0;
            if (!feasible) {
                const Vector dnu = step.nu - nu;
                const double r0 = residual(r.pt, nu, t);
                for (; alpha >= 1e-14; alpha *= opts.ls_beta) {
                    next = evaluate(pb, r.pt.x + alpha * step.u);
                    if (next && residual(*next, nu + alpha * dnu, t) <= (1.0 - opts.ls_alpha * alpha) * r0) break;
                    next.reset();
                }
                if (!next) break;
                nu += alpha * dnu;
                feasible = eq_res(next->x) <= 1e-10 * b_scale;
            } else {
                const double slope = grad.dot(step.u);
                const double f0 = t * objective(pb, r.pt.x);
                for (; alpha >= 1e-14; alpha *= opts.ls_beta) {
                    next = evaluate(pb, r.pt.x + alpha * step.u);
                    if (next) {
                        const double df = t * objective(pb, next->x) - f0 + next->barrier - r.pt.barrier;
                        if (df <= opts.ls_alpha * alpha * slope) break;
                    }
                    next.reset();
                }
                if (!next) break;
            }
            r.pt = std::move(*next);
            if (stop(r.pt, feasible)) return r;
        }
        if (degree / t < opts.tolerance) {
            r.converged = feasible;
            break;
        }
        r.t *= opts.mu;
    }
    return r;
}

Vector least_squares_start(const BarrierProblem& pb) {
    if (pb.a.rows() == 0) return Vector::Zero(pb.size());
    return pb.a.completeOrthogonalDecomposition().solve(pb.b);
}

Point phase_one(const BarrierProblem& pb, const Vector& x0, const SdpOptions& opts) {
    // Variables (x, s): minimize s with every inequality and LMI relaxed by s.
    const Index n = pb.size();
    double worst = 0.0;
    if (pb.h.size()) worst = std::max(worst, (pb.g * x0 - pb.h).maxCoeff());
    for (const auto& l : pb.lmis) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(l.at(x0)), Eigen::EigenvaluesOnly);
        worst = std::max(worst, -es.eigenvalues()(0));
    }
    const double radius = 1e3 * (1.0 + x0.cwiseAbs().maxCoeff() + worst);

    BarrierProblem aux;
    aux.c = Vector::Zero(n + 1);
    aux.c(n) = 1.0;
    if (pb.a.rows()) {
        aux.a = Matrix::Zero(pb.a.rows(), n + 1);
        aux.a.leftCols(n) = pb.a;
        aux.b = pb.b;
    } else {
        aux.a.resize(0, n + 1);
    }
    const Index mg = pb.h.size();
    aux.g = Matrix::Zero(mg + 2 * n + 1, n + 1);
    aux.h = Vector::Zero(mg + 2 * n + 1);
    if (mg) {
        aux.g.topLeftCorner(mg, n) = pb.g;
        aux.g.block(0, n, mg, 1).setConstant(-1.0);
        aux.h.head(mg) = pb.h;
    }
    for (Index i = 0; i < n; ++i) {
        aux.g(mg + 2 * i, i) = 1.0;
        aux.g(mg + 2 * i + 1, i) = -1.0;
        aux.h(mg + 2 * i) = radius;
        aux.h(mg + 2 * i + 1) = radius;
    }
    aux.g(mg + 2 * n, n) = -1.0;  // s >= -1
    aux.h(mg + 2 * n) = 1.0;
    for (const auto& l : pb.lmis) {
        LmiBlock b{l.f0, l.fi};
        b.fi.push_back(Matrix::Identity(l.f0.rows(), l.f0.cols()));
        aux.lmis.push_back(std::move(b));
    }
    Vector z(n + 1);
    z.head(n) = x0;
    z(n) = worst + 1.0;
    auto st = evaluate(aux, z);
    if (!st) throw SolverError("phase I could not build a starting point");
    std::optional<Point> found;
    auto stop = [&](const Point& pt, bool feasible) {
        if (!feasible || pt.x(n) >= 0.0) return false;
        auto cand = evaluate(pb, pt.x.head(n));
        if (!cand) return false;
        found = std::move(cand);
        return true;
    };
    run(aux, std::move(*st), opts, stop);
    if (!found) throw SolverError("infeasible: phase I found no strictly feasible point");
    return std::move(*found);
}

}  // namespace

BarrierSolution barrier_solve(const BarrierProblem& problem, const SdpOptions& opts, const std::optional<Vector>& start) {
    problem.validate();
    std::optional<Point> pt;
    Vector x0 = start ? *start : least_squares_start(problem);
    if (x0.size() != problem.size()) throw InvalidArgument("start point has the wrong size");
    pt = evaluate(problem, x0);
    if (!pt) pt = phase_one(problem, x0, opts);
    Run r = run(problem, std::move(*pt), opts, [](const Point&, bool) { return false; });
    BarrierSolution sol;
    sol.x = r.pt.x;
    sol.objective_value = objective(problem, sol.x);
    sol.equality_residual = problem.a.rows() ? (problem.a * sol.x - problem.b).cwiseAbs().maxCoeff() : 0.0;
    sol.barrier_parameter = r.t;
    sol.newton_iterations = r.newton;
    sol.converged = r.converged;
    return sol;
}

}  // namespace unfold::sdp
