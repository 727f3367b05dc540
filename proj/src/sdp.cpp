#include "unfold/sdp.hpp"

#include "unfold/linalg.hpp"
#include "unfold/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>

namespace unfold::sdp {

ConstraintMatrix::ConstraintMatrix(Matrix factor, Matrix core) : factor_(std::move(factor)), core_(std::move(core)) {
    if (core_.rows() != core_.cols() || core_.rows() != factor_.cols()) {
        throw InvalidArgument("constraint core must be square and match the factor width");
    }
    require_symmetric(core_, "constraint core");
}

ConstraintMatrix ConstraintMatrix::dense(const Matrix& a) {
    require_symmetric(a, "constraint matrix");
    return {Matrix::Identity(a.rows(), a.rows()), symmetrized(a)};
}

ConstraintMatrix ConstraintMatrix::rank_one(const Vector& a, double scale) {
    return {Matrix(a), Matrix::Constant(1, 1, scale)};
}

ConstraintMatrix ConstraintMatrix::difference(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw InvalidArgument("difference constraint vectors differ in size");
    Matrix u(a.size(), 2);
    u.col(0) = a;
    u.col(1) = b;
    Matrix c = Matrix::Zero(2, 2);
    c(0, 0) = 1.0;
    c(1, 1) = -1.0;
    return {u, c};
}

Matrix ConstraintMatrix::to_dense() const { return symmetrized(factor_ * core_ * factor_.transpose()); }

double ConstraintMatrix::inner(const Matrix& s) const {
    const Matrix z = factor_.transpose() * s * factor_;
    return (core_.array() * z.array()).sum();
}

void SdpProblem::validate() const {
    if (dim < 1) throw InvalidArgument("SDP dimension must be positive");
    if (objective.rows() != dim || objective.cols() != dim) throw InvalidArgument("objective must be dim x dim");
    require_symmetric(objective, "objective");
    for (const auto* list : {&equalities, &inequalities}) {
        for (const auto& c : *list) {
            if (c.a.dim() != dim) throw InvalidArgument("constraint matrix side does not match the SDP dimension");
            if (!std::isfinite(c.rhs)) throw InvalidArgument("constraint right-hand side must be finite");
        }
    }
}

FeasibilityReport check_feasibility(const SdpProblem& problem, const Matrix& s) {
    if (s.rows() != problem.dim || s.cols() != problem.dim) throw InvalidArgument("S has the wrong shape");
    FeasibilityReport r;
    r.equality_residuals.resize(static_cast<Index>(problem.equalities.size()));
    r.inequality_residuals.resize(static_cast<Index>(problem.inequalities.size()));
    for (std::size_t i = 0; i < problem.equalities.size(); ++i) {
        const auto& c = problem.equalities[i];
        r.equality_residuals(static_cast<Index>(i)) = c.a.inner(s) - c.rhs;
    }
    for (std::size_t j = 0; j < problem.inequalities.size(); ++j) {
        const auto& c = problem.inequalities[j];
        r.inequality_residuals(static_cast<Index>(j)) = std::max(0.0, c.a.inner(s) - c.rhs);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(s), Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues()(0);
    r.max_equality = r.equality_residuals.size() ? r.equality_residuals.cwiseAbs().maxCoeff() : 0.0;
    r.max_inequality = r.inequality_residuals.size() ? r.inequality_residuals.maxCoeff() : 0.0;
    return r;
}

namespace {

constexpr double kMinStep = 1e-14;
constexpr double kCenteredDecrement = 1e-4;
constexpr double kPrecisionLoss = 1e3;

/// Internal minimization form with every constraint factor stacked in P.
struct Prepared {
    Index m = 0;
    Matrix c;
    Index n_eq = 0;
    Index n_ineq = 0;
    Vector rhs;
    Matrix p;
    par::FactorBlocks blocks;

    Index total() const { return n_eq + n_ineq; }
    Vector b() const { return rhs.head(n_eq); }
    Vector e() const { return rhs.tail(n_ineq); }
};

Prepared prepare(Index m, const Matrix& c, const std::vector<const Constraint*>& eq,
                 const std::vector<const Constraint*>& ineq) {
    Prepared pr;
    pr.m = m;
    pr.c = c;
    pr.n_eq = static_cast<Index>(eq.size());
    pr.n_ineq = static_cast<Index>(ineq.size());
    pr.rhs.resize(pr.total());
    Index width = 0;
    for (const auto* list : {&eq, &ineq}) {
        for (const auto* con : *list) width += con->a.rank();
    }
    pr.p.resize(m, width);
    pr.blocks.offsets.push_back(0);
    Index at = 0;
    Index row = 0;
    for (const auto* list : {&eq, &ineq}) {
        for (const auto* con : *list) {
            pr.p.middleCols(at, con->a.rank()) = con->a.factor();
            at += con->a.rank();
            pr.blocks.offsets.push_back(at);
            pr.blocks.cores.push_back(con->a.core());
            pr.rhs(row++) = con->rhs;
        }
    }
    return pr;
}

/// tr(A_i M) for every constraint, given MP = M * P.
Vector block_inner(const Prepared& pr, const Matrix& mp, Index first, Index count) {
    Vector out(count);
    for (Index i = 0; i < count; ++i) {
        const Index blk = first + i;
        const Index o = pr.blocks.offsets[blk];
        const Index r = pr.blocks.width(blk);
        if (r == 1) {
            out(i) = pr.blocks.cores[blk](0, 0) * pr.p.col(o).dot(mp.col(o));
        } else {
            const Matrix z = pr.p.middleCols(o, r).transpose() * mp.middleCols(o, r);
            out(i) = (pr.blocks.cores[blk].array() * z.array()).sum();
        }
    }
    return out;
}

/// Σ coef_i A_i over blocks [first, first + coef.size()).
Matrix combine(const Prepared& pr, const Vector& coef, Index first) {
    Matrix out = Matrix::Zero(pr.m, pr.m);
    if (coef.size() == 0) return out;
    const Index o0 = pr.blocks.offsets[first];
    const Index o1 = pr.blocks.offsets[first + coef.size()];
    Matrix t(pr.m, o1 - o0);
    for (Index i = 0; i < coef.size(); ++i) {
        const Index blk = first + i;
        const Index o = pr.blocks.offsets[blk];
        const Index r = pr.blocks.width(blk);
        t.middleCols(o - o0, r) = pr.p.middleCols(o, r) * (coef(i) * pr.blocks.cores[blk]);
    }
    out.noalias() = t * pr.p.middleCols(o0, o1 - o0).transpose();
    return symmetrized(out);
}

struct State {
    Matrix s;
    Eigen::LLT<Matrix> chol;
    double logdet = 0.0;
    Vector values;  // tr(A_i S) then tr(D_j S)
    Vector slack;   // e_j - tr(D_j S)
    Matrix sp;      // S P
};

std::optional<State> evaluate(const Prepared& pr, Matrix s) {
    State st;
    st.s = std::move(s);
    st.chol.compute(st.s);
    if (st.chol.info() != Eigen::Success) return std::nullopt;
    const auto diag = st.chol.matrixLLT().diagonal();
    if (!diag.allFinite() || (diag.array() <= 0.0).any()) return std::nullopt;
    st.logdet = 2.0 * diag.array().log().sum();
    st.sp.noalias() = st.s * pr.p;
    st.values = block_inner(pr, st.sp, 0, pr.total());
    st.slack = pr.e() - st.values.tail(pr.n_ineq);
    if (pr.n_ineq > 0 && !(st.slack.array() > 0.0).all()) return std::nullopt;
    return st;
}

Matrix gradient(const Prepared& pr, const State& st, double t) {
    Matrix sinv = st.chol.solve(Matrix::Identity(pr.m, pr.m));
    Matrix g = t * pr.c - symmetrized(sinv);
    if (pr.n_ineq > 0) g += combine(pr, st.slack.cwiseInverse(), pr.n_eq);
    return g;
}

struct Step {
    Matrix ds;
    Vector nu;
    Vector w;
    Matrix g;
    double lambda2 = 0.0;
};

Step newton_step(const Prepared& pr, const State& st, double t) {
    Step out;
    out.g = gradient(pr, st, t);
    // S G S = t S C S - S + S (Σ A_j / slack_j) S, formed without S⁻¹.
    Matrix lin = t * pr.c;
    if (pr.n_ineq > 0) lin += combine(pr, st.slack.cwiseInverse(), pr.n_eq);
    const Matrix x = symmetrized(st.s * lin * st.s - st.s);
    const Matrix xp = x * pr.p;
    const Vector ax = block_inner(pr, xp, 0, pr.total());

    const Matrix z = pr.p.transpose() * st.sp;
    Matrix schur = par::factor_gram(pr.blocks, z);
    Vector rhs = -ax;
    rhs.head(pr.n_eq) -= pr.b() - st.values.head(pr.n_eq);
    for (Index j = 0; j < pr.n_ineq; ++j) {
        const Index r = pr.n_eq + j;
        schur(r, r) += st.slack(j) * st.slack(j);
    }

    Vector sol;
    if (pr.total() > 0) {
        Eigen::LLT<Matrix> llt(schur);
        if (llt.info() == Eigen::Success) {
            sol = llt.solve(rhs);
        } else {
            Eigen::LDLT<Matrix> ldlt(schur);
            if (ldlt.info() != Eigen::Success) throw SolverError("singular Newton system (degenerate constraints)");
            sol = ldlt.solve(rhs);
        }
        if (!sol.allFinite()) throw SolverError("singular Newton system (degenerate constraints)");
    }
    out.nu = sol.head(pr.n_eq);
    out.w = sol.tail(pr.n_ineq);

    if (pr.total() > 0) lin += combine(pr, sol, 0);
    // ds = -S (G + Σ sol_i A_i) S and λ² = tr((S⁻¹ ds)²), again without S⁻¹.
    const Matrix sls = symmetrized(st.s * lin * st.s);
    out.ds = st.s - sls;
    const Matrix q = st.chol.solve(out.ds);
    out.lambda2 = (q.array() * q.transpose().array()).sum();
    for (Index j = 0; j < pr.n_ineq; ++j) {
        const double sw = st.slack(j) * out.w(j);
        out.lambda2 += sw * sw;
    }
    return out;
}

double residual_norm(const Prepared& pr, const State& st, const Vector& nu, double t) {
    Matrix dual = gradient(pr, st, t);
    if (pr.n_eq > 0) dual += combine(pr, nu, 0);
    const double primal = (st.values.head(pr.n_eq) - pr.b()).squaredNorm();
    return std::sqrt(dual.squaredNorm() + primal);
}

double equality_residual(const Prepared& pr, const State& st) {
    if (pr.n_eq == 0) return 0.0;
    return (st.values.head(pr.n_eq) - pr.b()).cwiseAbs().maxCoeff();
}

double objective(const Prepared& pr, const Matrix& s) { return (pr.c.array() * s.array()).sum(); }

/// Moves S back onto the equality constraints along S(Σλ_i A_i)S. Rounding in
/// the Newton step grows with t; this removes the accumulated residual.
void restore_equalities(const Prepared& pr, State& st) {
    if (pr.n_eq == 0) return;
    const Vector r = pr.b() - st.values.head(pr.n_eq);
    if (r.cwiseAbs().maxCoeff() == 0.0) return;
    par::FactorBlocks eq;
    eq.offsets.assign(pr.blocks.offsets.begin(), pr.blocks.offsets.begin() + pr.n_eq + 1);
    eq.cores.assign(pr.blocks.cores.begin(), pr.blocks.cores.begin() + pr.n_eq);
    const Index w = eq.offsets.back();
    const Matrix z = pr.p.leftCols(w).transpose() * st.sp.leftCols(w);
    const Matrix gram = par::factor_gram(eq, z);
    const Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success) return;
    const Vector lambda = ldlt.solve(r);
    if (!lambda.allFinite()) return;
    Vector coef = Vector::Zero(pr.total());
    coef.head(pr.n_eq) = lambda;
    const Matrix ds = symmetrized(st.s * combine(pr, coef, 0) * st.s);
    auto next = evaluate(pr, st.s + ds);
    if (!next) return;
    const double before = r.cwiseAbs().maxCoeff();
    const double after = (pr.b() - next->values.head(pr.n_eq)).cwiseAbs().maxCoeff();
    if (after < before) st = std::move(*next);
}

struct RunResult {
    State state;
    double t = 0.0;
    int newton = 0;
    int outer = 0;
    bool converged = false;
    bool stopped = false;
    bool stalled = false;
    std::vector<double> trace;
};

using StopPredicate = std::function<bool(const State&, bool feasible)>;

void emit_trace(std::ostream* os, int outer, double t, double obj, double eq_res, double ineq_res, int newton) {
    if (!os) return;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\"outer\":%d,\"t\":%.17g,\"objective\":%.17g,\"equality_residual\":%.17g,"
                  "\"inequality_residual\":%.17g,\"newton_iterations\":%d}\n",
                  outer, t, obj, eq_res, ineq_res, newton);
    *os << buf;
}

RunResult run_barrier(const Prepared& pr, State start, const SdpOptions& opts, double obj_sign,
                      const StopPredicate& stop = {}) {
    RunResult rr;
    rr.state = std::move(start);
    rr.t = opts.t0;
    const double b_scale = 1.0 + (pr.n_eq ? pr.b().cwiseAbs().maxCoeff() : 0.0);
    const double switch_tol = 1e-10 * b_scale;
    Vector nu = Vector::Zero(pr.n_eq);
    const double degree = static_cast<double>(pr.m + pr.n_ineq);
    bool feasible = equality_residual(pr, rr.state) <= switch_tol;
    int infeasible_steps = 0;

    std::optional<State> centered;
    double centered_t = 0.0;
    double centered_value = 0.0;
    for (rr.outer = 1; rr.outer <= opts.max_outer; ++rr.outer) {
        const double t = rr.t;
        const int budget = rr.outer == 1 ? std::max(opts.max_inner, opts.max_first_inner) : opts.max_inner;
        bool lost_precision = false;
        // The equality residual must vanish before t may grow; only the
        // infeasible-step budget bounds that phase.
        for (int inner = 0; inner < budget || !feasible; ++inner) {
            const Step step = newton_step(pr, rr.state, t);
            if (feasible && step.lambda2 / 2.0 <= opts.newton_tolerance) break;
            ++rr.newton;

            double alpha = 1.0;
            std::optional<State> next;
            if (!feasible) {
                if (++infeasible_steps > opts.max_infeasible_newton) {
                    throw SolverError("equality constraints not reached from the interior (no positive definite feasible point?)");
                }
                const Vector dnu = step.nu - nu;
                const double r0 = residual_norm(pr, rr.state, nu, t);
                for (; alpha >= kMinStep; alpha *= opts.ls_beta) {
                    next = evaluate(pr, rr.state.s + alpha * step.ds);
                    if (next && residual_norm(pr, *next, nu + alpha * dnu, t) <= (1.0 - opts.ls_alpha * alpha) * r0) break;
                    next.reset();
                }
                if (!next) {
                    throw SolverError("infeasible-start Newton stalled (no positive definite feasible point?)");
                }
                nu += alpha * dnu;
                feasible = equality_residual(pr, *next) <= switch_tol;
            } else {
                const double slope = (step.g.array() * step.ds.array()).sum();
                const double cds = objective(pr, step.ds);
                for (; alpha >= kMinStep; alpha *= opts.ls_beta) {
                    next = evaluate(pr, rr.state.s + alpha * step.ds);
                    if (next) {
                        double df = t * alpha * cds - (next->logdet - rr.state.logdet);
                        for (Index j = 0; j < pr.n_ineq; ++j) df -= std::log(next->slack(j) / rr.state.slack(j));
                        if (df <= opts.ls_alpha * alpha * slope) break;
                    }
                    next.reset();
                }
                if (!next) {
                    // A failed search with a small decrement is centering at
                    // working precision; with a large one the direction is wrong.
                    lost_precision = step.lambda2 / 2.0 > kCenteredDecrement;
                    break;
                }
            }
            rr.state = std::move(*next);
            if (stop && stop(rr.state, feasible)) {
                rr.stopped = true;
                return rr;
            }
        }
        if (feasible) restore_equalities(pr, rr.state);
        // Precision is lost when the step breaks the equalities or the
        // objective moves against the central path; keep the last good center.
        const double value = objective(pr, rr.state.s);
        const bool degraded =
            feasible && centered &&
            (equality_residual(pr, rr.state) > kPrecisionLoss * switch_tol ||
             (lost_precision && value > centered_value + 1e-12 * (1.0 + std::abs(centered_value))));
        if (degraded) {
            rr.state = std::move(*centered);
            rr.t = centered_t;
            rr.stalled = true;
            rr.converged = degree / rr.t <= opts.stall_gap_tolerance * std::max(1.0, std::abs(centered_value));
            break;
        }
        if (feasible) {
            centered = rr.state;
            centered_t = t;
            centered_value = value;
        }
        const double obj = obj_sign * objective(pr, rr.state.s);
        rr.trace.push_back(obj);
        const double ineq_res = pr.n_ineq ? std::max(0.0, -rr.state.slack.minCoeff()) : 0.0;
        emit_trace(opts.trace, rr.outer, t, obj, equality_residual(pr, rr.state), ineq_res, rr.newton);
        if (degree / t < opts.tolerance) {
            rr.converged = feasible;
            break;
        }
        rr.t *= opts.mu;
    }
    if (rr.outer > opts.max_outer) rr.outer = opts.max_outer;
    return rr;
}

std::vector<const Constraint*> presolve_equalities(const SdpProblem& problem, int& dropped) {
    std::vector<const Constraint*> all;
    for (const auto& c : problem.equalities) all.push_back(&c);
    dropped = 0;
    if (all.size() < 2) return all;

    const Prepared pr = prepare(problem.dim, Matrix::Zero(problem.dim, problem.dim), all, {});
    const Matrix gram = par::factor_gram(pr.blocks, pr.p.transpose() * pr.p);
    Eigen::ColPivHouseholderQR<Matrix> qr(gram);
    qr.setThreshold(1e-10);
    const Index rank = qr.rank();
    const Index q = gram.rows();
    if (rank == q) return all;

    const auto& perm = qr.colsPermutation().indices();
    std::vector<Index> keep(perm.data(), perm.data() + rank);
    std::sort(keep.begin(), keep.end());
    std::vector<bool> kept(static_cast<std::size_t>(q), false);
    for (Index i : keep) kept[static_cast<std::size_t>(i)] = true;

    Matrix gk(rank, rank);
    Vector bk(rank);
    for (Index a = 0; a < rank; ++a) {
        bk(a) = all[static_cast<std::size_t>(keep[a])]->rhs;
        for (Index c = 0; c < rank; ++c) gk(a, c) = gram(keep[a], keep[c]);
    }
    const Eigen::LDLT<Matrix> ldlt(gk);
    const double b_scale = 1.0 + bk.cwiseAbs().maxCoeff();
    for (Index j = 0; j < q; ++j) {
        if (kept[static_cast<std::size_t>(j)]) continue;
        Vector col(rank);
        for (Index a = 0; a < rank; ++a) col(a) = gram(keep[a], j);
        const Vector coef = ldlt.solve(col);
        const double predicted = coef.dot(bk);
        if (std::abs(predicted - all[static_cast<std::size_t>(j)]->rhs) > 1e-7 * b_scale) {
            throw SolverError("infeasible: equality constraints are dependent with inconsistent right-hand sides");
        }
    }
    std::vector<const Constraint*> out;
    for (Index i : keep) out.push_back(all[static_cast<std::size_t>(i)]);
    dropped = static_cast<int>(q - rank);
    return out;
}

ConstraintMatrix augment(const ConstraintMatrix& a, double corner) {
    const Index m = a.dim();
    const Index r = a.rank();
    const bool extra = corner != 0.0;
    Matrix u = Matrix::Zero(m + 1, r + (extra ? 1 : 0));
    u.topLeftCorner(m, r) = a.factor();
    Matrix c = Matrix::Zero(u.cols(), u.cols());
    c.topLeftCorner(r, r) = a.core();
    if (extra) {
        u(m, r) = 1.0;
        c(r, r) = corner;
    }
    return {u, c};
}

/// Strictly feasible start for the inequalities; equalities may be violated.
State initial_point(const SdpProblem& problem, const Prepared& pr, const SdpOptions& opts) {
    std::vector<double> scales{1.0, 0.1, 10.0, 1e-2, 1e2, 1e-3, 1e-4, 1e-6};
    double cap = std::numeric_limits<double>::infinity();
    for (const auto& c : problem.inequalities) {
        const double tr = c.a.to_dense().trace();
        if (tr > 0.0) cap = std::min(cap, c.rhs / tr);
    }
    if (std::isfinite(cap) && cap > 0.0) scales.insert(scales.begin(), 0.5 * cap);
    for (double sc : scales) {
        if (auto st = evaluate(pr, sc * Matrix::Identity(pr.m, pr.m))) return std::move(*st);
    }

    // Phase I over diag(S, σ): minimize σ with every inequality relaxed by σ - M.
    const Index m = problem.dim;
    double big = 1.0;
    for (const auto& c : problem.inequalities) big = std::max(big, std::abs(c.rhs));
    for (const auto& c : problem.equalities) big = std::max(big, std::abs(c.rhs));
    const double margin = big;
    SdpProblem aux;
    aux.dim = m + 1;
    aux.objective = Matrix::Zero(m + 1, m + 1);
    aux.objective(m, m) = 1.0;
    for (const auto& c : problem.equalities) aux.equalities.push_back({augment(c.a, 0.0), c.rhs});
    double sigma0 = 1.0;
    for (const auto& c : problem.inequalities) {
        aux.inequalities.push_back({augment(c.a, -1.0), c.rhs - margin});
        sigma0 = std::max(sigma0, margin + c.a.to_dense().trace() - c.rhs + 1.0);
    }
    const double radius = 1e4 * std::max<double>(static_cast<double>(m), big);
    Matrix trace_factor = Matrix::Zero(m + 1, m);
    trace_factor.topRows(m) = Matrix::Identity(m, m);
    aux.inequalities.push_back({ConstraintMatrix(trace_factor, Matrix::Identity(m, m)), radius});

    int dropped = 0;
    const auto eq = presolve_equalities(aux, dropped);
    std::vector<const Constraint*> ineq;
    for (const auto& c : aux.inequalities) ineq.push_back(&c);
    const Prepared apr = prepare(aux.dim, aux.objective, eq, ineq);
    Matrix s0 = Matrix::Identity(m + 1, m + 1);
    s0(m, m) = sigma0;
    auto st = evaluate(apr, s0);
    if (!st) throw SolverError("phase I could not build a starting point");

    const Vector e = pr.e();
    std::optional<State> found;
    auto stop = [&](const State& s, bool feasible) {
        if (!feasible) return false;
        auto cand = evaluate(pr, s.s.topLeftCorner(m, m));
        if (!cand) return false;
        if (pr.n_ineq && (cand->slack.array() <= 1e-9 * (1.0 + e.cwiseAbs().array())).any()) return false;
        found = std::move(cand);
        return true;
    };
    SdpOptions phase = opts;
    phase.trace = nullptr;
    run_barrier(apr, std::move(*st), phase, 1.0, stop);
    if (!found) throw SolverError("infeasible: phase I found no strictly feasible point");
    return std::move(*found);
}

/// When the kept equalities pin every coordinate of S, solve them directly.
std::optional<Matrix> determined_solution(Index m, const std::vector<const Constraint*>& eq) {
    const Index nv = m * (m + 1) / 2;
    if (static_cast<Index>(eq.size()) != nv) return std::nullopt;
    Matrix sys(nv, nv);
    Vector rhs(nv);
    for (Index r = 0; r < nv; ++r) {
        const Matrix a = eq[static_cast<std::size_t>(r)]->a.to_dense();
        Index c = 0;
        for (Index j = 0; j < m; ++j) {
            for (Index i = j; i < m; ++i) sys(r, c++) = i == j ? a(i, i) : 2.0 * a(i, j);
        }
        rhs(r) = eq[static_cast<std::size_t>(r)]->rhs;
    }
    const Vector x = sys.partialPivLu().solve(rhs);
    Matrix s(m, m);
    Index c = 0;
    for (Index j = 0; j < m; ++j) {
        for (Index i = j; i < m; ++i) s(i, j) = s(j, i) = x(c++);
    }
    return s;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& opts, const std::optional<Matrix>& warm_start) {
    problem.validate();
    if (!(opts.t0 > 0.0) || !(opts.mu > 1.0) || !(opts.tolerance > 0.0)) {
        throw InvalidArgument("barrier schedule needs t0 > 0, mu > 1, tolerance > 0");
    }
    SdpSolution sol;
    const auto eq = presolve_equalities(problem, sol.dropped_equalities);
    std::vector<const Constraint*> ineq;
    for (const auto& c : problem.inequalities) ineq.push_back(&c);
    if (auto pinned = determined_solution(problem.dim, eq)) {
        // The feasible set is at most one point.
        const auto report = check_feasibility(problem, *pinned);
        const double top = std::max(1.0, pinned->cwiseAbs().maxCoeff());
        if (report.min_eigenvalue < -1e-8 * top || report.max_inequality > opts.feasibility_tolerance * top) {
            throw SolverError("infeasible: the equality constraints pin S to a point outside the cone");
        }
        sol.s = *pinned;
        sol.objective_value = (problem.objective.array() * sol.s.array()).sum();
        sol.equality_residual = report.max_equality;
        sol.inequality_residual = report.max_inequality;
        sol.objective_trace.push_back(sol.objective_value);
        sol.converged = true;
        return sol;
    }
    const double sign = problem.sense == Sense::maximize ? -1.0 : 1.0;
    const Prepared pr = prepare(problem.dim, sign * symmetrized(problem.objective), eq, ineq);

    std::optional<State> start;
    if (warm_start) {
        if (warm_start->rows() != problem.dim || warm_start->cols() != problem.dim) {
            throw InvalidArgument("warm start has the wrong shape");
        }
        start = evaluate(pr, symmetrized(*warm_start));
    }
    if (!start) start = initial_point(problem, pr, opts);

    RunResult rr = run_barrier(pr, std::move(*start), opts, sign);
    sol.s = rr.state.s;
    sol.objective_value = (problem.objective.array() * sol.s.array()).sum();
    const auto report = check_feasibility(problem, sol.s);
    sol.equality_residual = report.max_equality;
    sol.inequality_residual = report.max_inequality;
    sol.barrier_parameter = rr.t;
    sol.newton_iterations = rr.newton;
    sol.outer_iterations = rr.outer;
    sol.stalled = rr.stalled;
    sol.objective_trace = std::move(rr.trace);
    double b_scale = 1.0;
    for (const auto& c : problem.equalities) b_scale = std::max(b_scale, 1.0 + std::abs(c.rhs));
    sol.converged = rr.converged && sol.equality_residual <= opts.feasibility_tolerance * b_scale &&
                    sol.inequality_residual <= opts.feasibility_tolerance * b_scale;
    return sol;
}

}  // namespace unfold::sdp
