#include "helpers.hpp"
#include "unfold/kernels.hpp"
#include "unfold/linalg.hpp"
#include "unfold/variants.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace unfold;
using namespace unfold::variants;
using testing::make_points;

namespace {

Dataset labelled(Dataset d, std::vector<std::string> labels) {
    d.labels = std::move(labels);
    return d;
}

double pair_distance(const Matrix& k, Index i, Index j) { return std::sqrt(k(i, i) + k(j, j) - 2.0 * k(i, j)); }

bool anchor_feasible(const mvu::KernelProgram& prog, const std::optional<Matrix>& basis = std::nullopt) {
    const auto sys = mvu::assemble(prog, basis);
    const Matrix s = testing::reduce_kernel(*prog.anchor, sys.basis);
    return sdp::check_feasibility(sys.problem, s).feasible(1e-8 * (1.0 + prog.anchor->norm()));
}

Dataset random_cloud(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return Dataset(testing::random_matrix(3, n, rng));
}

void check_bound(const mvu::MvuResult& r) {
    CHECK(r.objective_trace <= r.variance_bound * (1.0 + 1e-9));
}

}  // namespace

TEST_CASE("class representatives") {
    const Dataset d = labelled(make_points({{0.0}, {1.0}, {5.0}, {7.0}, {3.0}, {5.0}}), {"a", "a", "a", "b", "c", "c"});
    const auto reps = class_representatives(d);
    REQUIRE(reps.size() == 3);
    CHECK(reps[0] == 1);  // mean 2
    CHECK(reps[1] == 3);  // singleton
    CHECK(reps[2] == 4);  // 3 and 5 equidistant from 4: lower index
    CHECK_THROWS_AS(class_representatives(make_points({{0.0}, {1.0}})), InvalidArgument);
}

TEST_CASE("within-class graph caps k by class size") {
    const Dataset d = labelled(make_points({{0.0}, {1.0}, {10.0}, {11.0}, {12.0}, {50.0}}), {"a", "a", "b", "b", "b", "c"});
    const auto g = within_class_graph(d, 3);
    CHECK(g.neighbors(0) == std::vector<Index>{1});
    CHECK(g.neighbors(2).size() == 2);
    CHECK(g.neighbors(5).empty());
    for (const auto& e : g.edges()) CHECK((*d.labels)[e.from] == (*d.labels)[e.to]);
}

TEST_CASE("class-wise unfolding stretches representatives by alpha") {
    const double dist = 1.5;
    const Dataset d = labelled(make_points({{0.0, 0.0}, {dist, 0.0}}), {"a", "b"});
    const auto g = within_class_graph(d, 1);
    const auto prog = smvu1_program(d, g, {2.0});
    REQUIRE(prog.equalities.size() == 1);
    CHECK(prog.equalities[0].target == doctest::Approx(4.0 * dist * dist));
    CHECK(anchor_feasible(prog));
    const auto r = mvu::solve_program(prog, dist, {}, std::nullopt, &d);
    CHECK(pair_distance(r.kernel.values, 0, 1) == doctest::Approx(2.0 * dist).epsilon(1e-6));

    CHECK_THROWS_AS(smvu1_program(labelled(make_points({{0.0}, {1.0}}), {"a", "a"}), within_class_graph(labelled(make_points({{0.0}, {1.0}}), {"a", "a"}), 1), {2.0}),
                    InvalidArgument);
    CHECK_THROWS_AS(smvu1_program(d, g, {1.0}), InvalidArgument);
}

TEST_CASE("class-wise unfolding on three classes keeps within-class isometry") {
    const Dataset d = labelled(make_points({{0, 0}, {1, 0}, {0, 1}, {5, 0}, {6, 0}, {5, 1}, {0, 5}, {1, 5}, {0, 6}}),
                               {"a", "a", "a", "b", "b", "b", "c", "c", "c"});
    const auto g = within_class_graph(d, 2);
    const auto prog = smvu1_program(d, g, {1.5});
    // two consecutive pairs and one extra pair to the last class
    CHECK(prog.equalities.size() == g.undirected_pairs().size() + 3);
    CHECK(anchor_feasible(prog));
    const auto r = mvu::solve_program(prog, g.max_length(), {}, std::nullopt, &d);
    CHECK(r.report.max_isometry_residual <= 1e-5 * r.report.max_target);
    CHECK(r.report.min_eigenvalue >= -1e-8);
}

TEST_CASE("Fisher scatters") {
    SUBCASE("singleton classes have no within scatter") {
        const Dataset d = labelled(make_points({{0.0}, {1.0}, {3.0}}), {"a", "b", "c"});
        const Matrix k = kernels::delta_kernel(*d.labels).values;
        CHECK(fisher_scatters(k, d, class_representatives(d)).within == 0.0);
    }
    SUBCASE("identical representatives have no between scatter") {
        const Dataset d = labelled(make_points({{0.0}, {1.0}}), {"a", "b"});
        const Matrix k = Matrix::Ones(2, 2);
        CHECK(fisher_scatters(k, d, {0, 1}).between == doctest::Approx(0.0));
    }
    SUBCASE("ordered pairs are both counted") {
        const Dataset d = labelled(make_points({{0.0}, {1.0}}), {"a", "b"});
        Matrix k(2, 2);
        k << 1, -1, -1, 1;
        CHECK(fisher_scatters(k, d, {0, 1}).between == doctest::Approx(8.0));
    }
    SUBCASE("missing representative") {
        const Dataset d = labelled(make_points({{0.0}, {1.0}}), {"a", "b"});
        CHECK_THROWS_AS(fisher_scatters(Matrix::Identity(2, 2), d, {0}), InvalidArgument);
    }
}

TEST_CASE("Fisher unfolding objective is linear and pinned on two points") {
    const Dataset d = labelled(make_points({{0.0, 0.0}, {2.0, 0.0}}), {"a", "b"});
    const auto g = graph::build_knn_graph(d, 1);
    const auto prog = smvu2_program(d, g);
    std::mt19937_64 rng(3);
    const Matrix k = testing::random_spd(2, rng);
    const double once = (prog.objective.array() * k.array()).sum();
    const double twice = (prog.objective.array() * (2.0 * k).array()).sum();
    CHECK(twice == doctest::Approx(2.0 * once));

    CHECK(anchor_feasible(prog));
    const auto r = mvu::solve_program(prog, 2.0, {}, std::nullopt, &d);
    CHECK(pair_distance(r.kernel.values, 0, 1) == doctest::Approx(2.0).epsilon(1e-6));
    // C · σ_B with σ_B = 2 d²
    CHECK(r.objective_value == doctest::Approx(2.0 * 2.0 * 4.0).epsilon(1e-6));
}

TEST_CASE("colored unfolding") {
    const Dataset d = random_cloud(15, 11);
    const auto g = graph::build_knn_graph(d, 4);
    SUBCASE("identity label kernel recovers plain unfolding") {
        const auto colored = mvu::solve_program(colored_program(d, g, Matrix::Identity(15, 15)), g.max_length(), {},
                                                std::nullopt, &d);
        const auto plain = mvu::solve_mvu(d, &g);
        CHECK(std::abs(colored.objective_trace - plain.objective_trace) <= 1e-6 * plain.objective_trace);
        check_bound(colored);
    }
    SUBCASE("constant label kernel gives a zero objective") {
        const auto prog = colored_program(d, g, Matrix::Ones(15, 15));
        CHECK(prog.objective.norm() <= 1e-12);
        CHECK(anchor_feasible(prog));
    }
    SUBCASE("delta kernel on coincident classes counts within-class similarity") {
        const Dataset two = labelled(make_points({{0.0}, {0.0}, {3.0}, {3.0}}), {"a", "a", "b", "b"});
        const Matrix kl = kernels::delta_kernel(*two.labels).values;
        const auto prog = colored_program(two, graph::build_knn_graph(two, 2), kl);
        const Matrix k = mvu::centered_gram(two);
        const double value = (prog.objective.array() * k.array()).sum();
        // H K H = K; tr(K K_l) sums K over within-class blocks
        double expected = 0.0;
        for (Index i = 0; i < 4; ++i)
            for (Index j = 0; j < 4; ++j) expected += kl(i, j) * k(i, j);
        CHECK(value == doctest::Approx(expected));
        CHECK(value == doctest::Approx(4 * 2.25 + 4 * 2.25));
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(colored_program(d, g, Matrix::Identity(3, 3)), InvalidArgument);
    }
}

TEST_CASE("action respecting embedding") {
    SUBCASE("distinct actions reduce to full-pair unfolding") {
        Dataset d = random_cloud(10, 5);
        d.actions = std::vector<std::string>{"a", "b", "c", "d", "e", "f", "g", "h", "i"};
        const auto prog = are_program(d, nullptr);
        CHECK(prog.differences.empty());
        const auto are = mvu::solve_program(prog, mvu::max_pair_length(prog.equalities), {}, std::nullopt, &d);
        const auto plain = mvu::solve_mvu(d, nullptr);
        CHECK(std::abs(are.objective_trace - plain.objective_trace) <= 1e-6 * plain.objective_trace);
    }
    SUBCASE("equal translations on a line are already respected") {
        Dataset d = make_points({{0.0}, {1.0}, {2.0}, {3.0}});
        d.actions = std::vector<std::string>{"step", "other", "step"};
        const auto prog = are_program(d, nullptr);
        REQUIRE(prog.differences.size() == 1);
        CHECK(anchor_feasible(prog));
        const auto r = mvu::solve_program(prog, 3.0, {}, std::nullopt, &d);
        CHECK(r.objective_trace == doctest::Approx(mvu::centered_gram(d).trace()).epsilon(1e-6));
    }
    SUBCASE("kNN graph constraints with repeated actions") {
        Dataset d = make_points({{0, 0}, {1, 0}, {2, 0.3}, {3, 0.3}, {4, 0.6}, {5, 0.6}});
        d.actions = std::vector<std::string>{"r", "u", "r", "u", "r"};
        const auto g = graph::build_knn_graph(d, 2);
        const auto prog = are_program(d, &g);
        CHECK(prog.differences.size() == 4);
        const auto r = mvu::solve_program(prog, g.max_length(), {}, std::nullopt, &d);
        CHECK(r.report.max_isometry_residual <= 1e-5 * r.report.max_target);
        check_bound(r);
    }
    SUBCASE("missing actions") {
        CHECK_THROWS_AS(are_program(make_points({{0.0}, {1.0}}), nullptr), InvalidArgument);
    }
}

TEST_CASE("short-circuit deviation") {
    SUBCASE("neighborhood at the midpoint") {
        const Dataset d = make_points({{0.0, 0.0}, {2.0, 0.0}, {1.0, 0.0}});
        const graph::NeighborGraph g({{{2, 1.0}}, {{2, 1.0}}, {{0, 1.0}}}, 1);
        CHECK(edge_deviation(d, g, 0, 1) == 0.0);
    }
    SUBCASE("a chord across spiral arms ranks highest") {
        const Dataset d(testing::spiral_points(60));
        const auto knn = graph::build_knn_graph(d, 2);
        auto rows = knn.rows();
        const Index a = 8, b = 41;  // adjacent arms, about one turn apart
        rows[a].emplace_back(b, (d.point(a) - d.point(b)).norm());
        const graph::NeighborGraph g(rows, 2);
        const double chord = edge_deviation(d, g, a, b);
        for (const auto& e : g.edges()) {
            if (e.from == a && e.to == b) continue;
            CHECK(edge_deviation(d, g, e.from, e.to) < chord);
        }
        double second = 0.0;
        for (const auto& e : g.edges()) {
            if (!(e.from == a && e.to == b)) second = std::max(second, edge_deviation(d, g, e.from, e.to));
        }
        const auto pruned = prune_short_circuits(g, d, PruneThreshold::absolute(0.5 * (chord + second)));
        REQUIRE(pruned.removed.size() == 1);
        CHECK(pruned.removed[0].from == a);
        CHECK(pruned.removed[0].to == b);
        CHECK(!pruned.disconnected);
    }
}

TEST_CASE("pruning keeps only edges under the threshold") {
    const Dataset d = random_cloud(30, 17);
    const auto g = graph::build_knn_graph(d, 5);
    for (const auto& th : {PruneThreshold::scree(2.0), PruneThreshold::quantile(0.8), PruneThreshold::absolute(1.0)}) {
        const auto r = prune_short_circuits(g, d, th);
        CHECK(r.graph.edge_count() + r.removed.size() == g.edge_count());
        const auto kept = r.graph.edges();
        REQUIRE(kept.size() == r.kept_deviations.size());
        for (std::size_t e = 0; e < kept.size(); ++e) {
            CHECK(r.kept_deviations[e] <= r.threshold);
            CHECK(r.kept_deviations[e] == edge_deviation(d, g, kept[e].from, kept[e].to));
        }
        for (const auto& e : r.removed) CHECK(edge_deviation(d, g, e.from, e.to) > r.threshold);
        CHECK(r.disconnected == !r.graph.connected());
    }
    CHECK_THROWS_AS(prune_short_circuits(g, d, PruneThreshold::quantile(1.0)), InvalidArgument);
    CHECK_THROWS_AS(prune_short_circuits(g, d, PruneThreshold::absolute(0.0)), InvalidArgument);
}

TEST_CASE("conformal targets") {
    SUBCASE("two points") {
        const double dist = 1.7;
        const Dataset d = make_points({{0.0}, {dist}});
        const auto t = conformal_targets(graph::build_knn_graph(d, 1), d);
        REQUIRE(t.size() == 1);
        CHECK(t[0].target == doctest::Approx(std::pow(dist, 4)));
    }
    SUBCASE("uniform scale multiplies every target") {
        const Dataset d = make_points({{0.0}, {2.0}, {4.0}, {6.0}});
        const graph::NeighborGraph g({{{1, 2.0}}, {{2, 2.0}}, {{3, 2.0}}, {{2, 2.0}}}, 1);
        const auto t = conformal_targets(g, d);
        const auto plain = mvu::isometry_pairs(d, &g);
        REQUIRE(t.size() == plain.size());
        for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i].target == doctest::Approx(4.0 * plain[i].target));
    }
}

TEST_CASE("conformal unfolding") {
    // Equally spaced circle, k = 2: every scale equals the chord c.
    const Index n = 16;
    Matrix pts(2, n);
    for (Index i = 0; i < n; ++i) {
        const double a = 2.0 * 3.141592653589793 * static_cast<double>(i) / static_cast<double>(n);
        pts(0, i) = 3.0 * std::cos(a);
        pts(1, i) = 3.0 * std::sin(a);
    }
    const Dataset d(pts);
    const auto g = graph::build_knn_graph(d, 2);
    const double c = (d.point(1) - d.point(0)).norm();
    const auto prog = conformal_program(d, g);
    CHECK(anchor_feasible(prog));
    const auto plain = mvu::solve_mvu(d, &g);
    const auto conf = mvu::solve_program(prog, g.max_length() * c, {}, std::nullopt, &d);
    CHECK(conf.converged);
    CHECK_FALSE(conf.relaxed);
    CHECK(conf.objective_trace == doctest::Approx(c * c * plain.objective_trace).epsilon(1e-6));
    check_bound(conf);

    const auto bound = mvu::solve_program(conformal_program(d, g, true), g.max_length() * c, {}, std::nullopt, &d);
    CHECK(bound.converged);
    CHECK(bound.objective_trace >= conf.objective_trace * (1.0 - 1e-6));
    CHECK(bound.report.max_inequality_violation <= 1e-6 * bound.report.max_target);
}

TEST_CASE("landmark reconstruction matrix") {
    SUBCASE("all landmarks") {
        const Dataset d = random_cloud(6, 2);
        const auto g = graph::build_knn_graph(d, 3);
        const auto m = landmark_q(graph::lle_alignment(d, g), {0, 1, 2, 3, 4, 5});
        CHECK(m.q.isApprox(Matrix::Identity(6, 6)));
    }
    SUBCASE("interior point between two landmarks") {
        const Dataset d = make_points({{0.0}, {1.0}, {2.0}});
        const auto g = graph::build_knn_graph(d, 2);
        const auto m = landmark_q(graph::lle_alignment(d, g), {0, 2});
        const Matrix q = m.q_original();
        CHECK(q.row(0).isApprox(Vector::Unit(2, 0).transpose()));
        CHECK(q(1, 0) == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(q(1, 1) == doctest::Approx(0.5).epsilon(1e-6));
    }
    SUBCASE("rows of the lower block sum to one") {
        const Dataset d(testing::spiral_points(25));
        const auto g = graph::build_knn_graph(d, 4);
        const auto m = landmark_q(graph::lle_alignment(d, g), {3});
        for (Index i = 0; i < m.q.rows(); ++i) CHECK(m.q.row(i).sum() == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("selection is deterministic") {
        const auto a = select_landmarks(50, 10, 1);
        CHECK(a == select_landmarks(50, 10, 1));
        CHECK(std::is_sorted(a.begin(), a.end()));
        CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
        CHECK_THROWS_AS(select_landmarks(5, 6, 1), InvalidArgument);
    }
}

TEST_CASE("landmark unfolding") {
    SUBCASE("two points: the inequality binds") {
        const double dist = 3.0;
        const Dataset d = make_points({{0.0, 0.0}, {dist, 0.0}});
        const auto g = graph::build_knn_graph(d, 1);
        const auto r = solve_landmark(d, g, {0, 1});
        CHECK(r.result.objective_trace == doctest::Approx(dist * dist / 2.0).epsilon(1e-6));
    }
    SUBCASE("zero landmark kernel is feasible") {
        const Dataset d(testing::spiral_points(20));
        const auto g = graph::build_knn_graph(d, 2);
        const auto m = landmark_q(graph::lle_alignment(d, g), select_landmarks(20, 6, 4));
        const auto sys = mvu::assemble(landmark_program(d, g), landmark_basis(m.q_original()));
        CHECK(sdp::check_feasibility(sys.problem, Matrix::Zero(sys.problem.dim, sys.problem.dim)).feasible(0.0));
    }
    SUBCASE("all landmarks match full unfolding on a chain") {
        const Dataset d(testing::spiral_points(20, 1.0));
        std::vector<graph::NeighborGraph::Row> rows(20);
        for (Index i = 0; i + 1 < 20; ++i) rows[i].emplace_back(i + 1, (d.point(i) - d.point(i + 1)).norm());
        const graph::NeighborGraph chain(rows, 1);
        std::vector<Index> all(20);
        std::iota(all.begin(), all.end(), Index{0});
        const auto lm = solve_landmark(d, chain, all);
        const auto full = mvu::solve_mvu(d, &chain);
        CHECK(std::abs(lm.result.objective_trace - full.objective_trace) <= 1e-4 * full.objective_trace);
        check_bound(lm.result);
        CHECK(lm.model.l.rows() == 20);
    }
    SUBCASE("all landmarks never fall below equality unfolding") {
        // kNN triangles at the chain ends may fold flat once edges are allowed to shrink
        const Dataset d(testing::spiral_points(20, 1.0));
        const auto g = graph::build_knn_graph(d, 2);
        std::vector<Index> all(20);
        std::iota(all.begin(), all.end(), Index{0});
        const auto lm = solve_landmark(d, g, all);
        const auto full = mvu::solve_mvu(d, &g);
        CHECK(lm.result.objective_trace >= full.objective_trace * (1.0 - 1e-6));
    }
    SUBCASE("few landmarks give a PSD reconstruction") {
        const Dataset d(testing::spiral_points(40));
        const auto g = graph::build_knn_graph(d, 3);
        const auto lm = solve_landmark(d, g, select_landmarks(40, 8, 2));
        CHECK(lm.result.report.min_eigenvalue >= -1e-8);
        CHECK(lm.result.report.max_inequality_violation <= 1e-6 * lm.result.report.max_target);
        CHECK(lm.result.report.centering <= 1e-8);
        check_bound(lm.result);
    }
}

TEST_CASE("supervised kNN with one class equals kNN unfolding") {
    Dataset d = random_cloud(12, 9);
    d.labels = std::vector<std::string>(12, "only");
    const auto within = within_class_graph(d, 4);
    const auto plain = graph::build_knn_graph(d, 4);
    CHECK(mvu::isometry_pairs(d, &within).size() == mvu::isometry_pairs(d, &plain).size());
    CHECK(within.undirected_pairs() == plain.undirected_pairs());
}
