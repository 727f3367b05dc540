#include "unfold/mvu.hpp"

#include "unfold/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace unfold::mvu {

std::vector<PairConstraint> isometry_pairs(const Dataset& data, const graph::NeighborGraph* graph) {
    std::vector<PairConstraint> out;
    const Index n = data.size();
    auto sq = [&](Index i, Index j) { return (data.point(i) - data.point(j)).squaredNorm(); };
    if (graph) {
        if (graph->size() != n) throw InvalidArgument("graph and dataset sizes differ");
        for (const auto& [i, j] : graph->undirected_pairs()) out.push_back({i, j, sq(i, j)});
    } else {
        for (Index i = 0; i < n; ++i)
            for (Index j = i + 1; j < n; ++j) out.push_back({i, j, sq(i, j)});
    }
    return out;
}

Matrix centered_gram(const Dataset& data) { return symmetrized(double_center(data.points.transpose() * data.points)); }

double max_pair_length(const std::vector<PairConstraint>& pairs) {
    double m = 0.0;
    for (const auto& p : pairs) m = std::max(m, p.target);
    return std::sqrt(m);
}

KernelProgram mvu_program(const Dataset& data, const graph::NeighborGraph* graph, const MvuOptions& opts) {
    data.validate();
    const Index n = data.size();
    if (graph) {
        auto comps = graph->components();
        if (comps.size() > 1) throw DisconnectedGraph(std::move(comps));
    } else if (n > opts.full_pair_cap && !opts.allow_large_full_pair) {
        throw InvalidArgument("full-pair MVU is limited to n <= " + std::to_string(opts.full_pair_cap) +
                              " points (n = " + std::to_string(n) + "); use a kNN graph or raise the cap");
    }
    KernelProgram prog;
    prog.n = n;
    prog.objective = Matrix::Identity(n, n);
    prog.equalities = isometry_pairs(data, graph);
    prog.anchor = centered_gram(data);
    return prog;
}

AssembledSdp assemble(const KernelProgram& program, const std::optional<Matrix>& basis, double band) {
    const Index n = program.n;
    if (n < 2) throw InvalidArgument("kernel programs need at least 2 points");
    if (program.objective.rows() != n || program.objective.cols() != n) {
        throw InvalidArgument("objective must be n x n");
    }
    AssembledSdp out;
    out.basis = basis ? *basis : centering_basis(n);
    const Matrix& w = out.basis;
    if (w.rows() != n || w.cols() < 1) throw InvalidArgument("basis must have n rows");
    const Index r = w.cols();

    auto row_diff = [&](Index i, Index j) -> Vector {
        if (i < 0 || j < 0 || i >= n || j >= n) throw InvalidArgument("constraint index out of range");
        return (w.row(i) - w.row(j)).transpose();
    };

    auto& pb = out.problem;
    pb.dim = r;
    pb.sense = sdp::Sense::maximize;
    pb.objective = symmetrized(w.transpose() * program.objective * w);
    auto add_equality = [&](sdp::ConstraintMatrix a, double target) {
        if (band <= 0.0) {
            pb.equalities.push_back({std::move(a), target});
            return;
        }
        pb.inequalities.push_back({a, target + band});
        pb.inequalities.push_back({sdp::ConstraintMatrix(a.factor(), -a.core()), band - target});
    };
    for (const auto& c : program.equalities) add_equality(sdp::ConstraintMatrix::rank_one(row_diff(c.i, c.j)), c.target);
    for (const auto& d : program.differences) {
        add_equality(sdp::ConstraintMatrix::difference(row_diff(d.i, d.j), row_diff(d.k, d.l)), 0.0);
    }
    for (const auto& c : program.inequalities) {
        pb.inequalities.push_back({sdp::ConstraintMatrix::rank_one(row_diff(c.i, c.j)), c.target});
    }
    if (program.anchor) {
        const Matrix& k0 = *program.anchor;
        const Matrix pinv = (w.transpose() * w).ldlt().solve(w.transpose());
        Matrix s0 = symmetrized(pinv * k0 * pinv.transpose());
        // With a band the shift must stay inside it: a pair moves by ε‖w_i - w_j‖².
        double eps = 1e-6 * (1.0 + k0.trace() / static_cast<double>(n));
        if (band > 0.0) {
            double spread = 0.0;
            for (Index i = 0; i < n; ++i) spread = std::max(spread, w.row(i).squaredNorm());
            eps = std::min(eps, band / (8.0 * std::max(spread, 1e-300)));
        }
        s0.diagonal().array() += eps;
        out.warm_start = s0;
    }
    return out;
}

AssembledSdp assemble_mvu(const Dataset& data, const graph::NeighborGraph* graph, const MvuOptions& opts) {
    return assemble(mvu_program(data, graph, opts));
}

namespace {

KernelProgram rescaled(const KernelProgram& program, double scale) {
    KernelProgram out = program;
    for (auto& c : out.equalities) c.target /= scale;
    for (auto& c : out.inequalities) c.target /= scale;
    if (out.anchor) *out.anchor /= scale;
    return out;
}

double pair_value(const Matrix& k, Index i, Index j) { return k(i, i) + k(j, j) - 2.0 * k(i, j); }

}  // namespace

MvuResult solve_program(const KernelProgram& program, double tau, const MvuOptions& opts,
                        const std::optional<Matrix>& basis, const Dataset* data) {
    double scale = 0.0;
    for (const auto* list : {&program.equalities, &program.inequalities}) {
        for (const auto& c : *list) scale = std::max(scale, c.target);
    }
    if (!(scale > 0.0)) scale = 1.0;

    const KernelProgram scaled = rescaled(program, scale);
    AssembledSdp sys = assemble(scaled, basis);
    auto solver_for = [&](const AssembledSdp& a) {
        sdp::SdpOptions o = opts.solver;
        if (opts.auto_t0 && a.warm_start) {
            const double degree = static_cast<double>(a.problem.dim) + static_cast<double>(a.problem.inequalities.size());
            const double start = std::max(
                {1.0, std::abs((a.problem.objective.array() * a.warm_start->array()).sum()), a.warm_start->trace()});
            o.t0 = std::min(o.t0, degree / start);
        }
        return o;
    };
    sdp::SdpSolution sol;
    bool relaxed = false;
    try {
        sdp::SdpOptions first = solver_for(sys);
        first.max_infeasible_newton = std::min(first.max_infeasible_newton, opts.exact_attempt_newton);
        first.trace = nullptr;
        sol = sdp::solve_sdp(sys.problem, first, sys.warm_start);
        relaxed = !sol.converged;
    } catch (const SolverError&) {
        relaxed = true;
    }
    const bool has_equalities = !program.equalities.empty() || !program.differences.empty();
    if (relaxed && has_equalities && opts.band > 0.0) {
        sys = assemble(scaled, basis, opts.band);
        sol = sdp::solve_sdp(sys.problem, solver_for(sys), sys.warm_start);
    } else if (relaxed) {
        sol = sdp::solve_sdp(sys.problem, solver_for(sys), sys.warm_start);
        relaxed = false;
    } else if (opts.solver.trace) {
        for (std::size_t i = 0; i < sol.objective_trace.size(); ++i) {
            *opts.solver.trace << "{\"outer\":" << i + 1 << ",\"objective\":" << sol.objective_trace[i] << "}\n";
        }
    }

    MvuResult out;
    out.relaxed = relaxed && has_equalities && opts.band > 0.0;
    const Matrix k = symmetrized(scale * (sys.basis * sol.s * sys.basis.transpose()));
    out.kernel = {k, true, false, "mvu"};
    out.objective_trace = k.trace();
    out.objective_value = (program.objective.array() * k.array()).sum();
    out.converged = sol.converged;
    out.newton_iterations = sol.newton_iterations;
    out.outer_iterations = sol.outer_iterations;
    for (double v : sol.objective_trace) out.objective_history.push_back(v * scale);

    auto& rep = out.report;
    rep.dropped_constraints = sol.dropped_equalities;
    for (const auto& c : program.equalities) {
        rep.max_isometry_residual = std::max(rep.max_isometry_residual, std::abs(pair_value(k, c.i, c.j) - c.target));
        rep.max_target = std::max(rep.max_target, c.target);
    }
    for (const auto& c : program.inequalities) {
        rep.max_inequality_violation = std::max(rep.max_inequality_violation, pair_value(k, c.i, c.j) - c.target);
        rep.max_target = std::max(rep.max_target, c.target);
    }
    for (const auto& d : program.differences) {
        rep.max_isometry_residual = std::max(
            rep.max_isometry_residual, std::abs(pair_value(k, d.i, d.j) - pair_value(k, d.k, d.l)));
    }
    const double knorm = k.norm();
    rep.centering = knorm > 0.0 ? (k * Vector::Ones(k.rows())).norm() / knorm : 0.0;

    const EigenPairs ep = eigen_descending(k);
    const double top = ep.values(0);
    rep.min_eigenvalue = top > 0.0 ? ep.values(ep.values.size() - 1) / top : ep.values(ep.values.size() - 1);
    out.kernel.psd_checked = rep.min_eigenvalue >= -1e-8;

    int p = 1;
    if (opts.dimension) {
        p = *opts.dimension;
    } else if (top > 0.0) {
        p = spectral::intrinsic_dimension(ep.values, opts.gap_ratio);
    }
    out.embedding = spectral::embed_from_kernel(k, p);

    out.tau = tau;
    const double n = static_cast<double>(program.n);
    out.variance_bound = n * n * n * tau * tau / 2.0;
    if (data) out.gram_trace = centered_gram(*data).trace();
    return out;
}

MvuResult solve_mvu(const Dataset& data, const graph::NeighborGraph* graph, const MvuOptions& opts) {
    const KernelProgram prog = mvu_program(data, graph, opts);
    const double tau = graph ? graph->max_length() : max_pair_length(prog.equalities);
    return solve_program(prog, tau, opts, std::nullopt, &data);
}

}  // namespace unfold::mvu
