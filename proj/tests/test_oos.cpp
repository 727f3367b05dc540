#include "helpers.hpp"
#include "unfold/kernels.hpp"
#include "unfold/linalg.hpp"
#include "unfold/mvu.hpp"
#include "unfold/oos.hpp"
#include "unfold/spectral.hpp"

#include <doctest.h>

#include <cmath>

using namespace unfold;
using namespace unfold::oos;

namespace {

/// Relative reproduction error up to a per-dimension sign.
double reproduction_error(const Matrix& got, const Matrix& want) { return testing::rowwise_sign_distance(got, want); }

}  // namespace

TEST_CASE("eigenfunction scheme with R = K reproduces the training embedding") {
    std::mt19937_64 rng(21);
    const Matrix k = testing::random_spd(3, rng);
    const Matrix p = eigen_projection(k, k, 2, 1e-10);
    const EigenPairs ep = eigen_descending(k);
    for (Index i = 0; i < 3; ++i) {
        const Vector y = p * k.col(i);
        for (int c = 0; c < 2; ++c) CHECK(y(c) == doctest::Approx(std::sqrt(ep.values(c)) * ep.vectors(i, c)).epsilon(1e-6));
    }
}

TEST_CASE("eigenfunction scheme examples") {
    const Matrix train = testing::make_points({{0.0}, {2.0}}).points;
    Matrix k(2, 2);
    k << 1, -1, -1, 1;
    const auto model = fit_oos_eigen(train, k, 1);
    SUBCASE("far point maps near zero") {
        Vector far(1);
        far << 1e3;
        CHECK(std::abs(embed_oos_eigen(model, far)(0)) < 1e-12);
    }
    SUBCASE("symmetric pair maps antisymmetrically") {
        const Matrix y = embed_oos_eigen_batch(model, train);
        CHECK(y(0, 0) == doctest::Approx(-y(0, 1)));
        CHECK(std::abs(y(0, 0)) > 0.1);
    }
    SUBCASE("non-positive eigenvalue is rejected") {
        CHECK_THROWS_AS(fit_oos_eigen(train, k, 2), DataError);
    }
    SUBCASE("eta must be positive") {
        CHECK_THROWS_AS(fit_oos_eigen(train, k, 1, {std::nullopt, 0.0}), InvalidArgument);
    }
}

TEST_CASE("eigenfunction scheme reproduces an unfolding within one percent") {
    const Dataset d(testing::spiral_points(50, 1.5));
    const auto g = graph::build_knn_graph(d, 3);
    const auto r = mvu::solve_mvu(d, &g, {.dimension = 2});
    const auto model = fit_oos_eigen(d.points, r.kernel.values, 2, {std::nullopt, 1e-6});
    CHECK(model.bandwidth == doctest::Approx(median_pairwise_distance(d.points)));
    const Matrix y = embed_oos_eigen_batch(model, d.points);
    CHECK(reproduction_error(y, r.embedding.coordinates) <= 1e-2);
}

TEST_CASE("kernel map reproduces training points") {
    const Dataset d(testing::spiral_points(40));
    const Matrix y = spectral::embed_from_kernel(kernels::build_catalog_kernel(kernels::KernelMethod::isomap, d, {.k = 4}), 2).coordinates;
    const auto map = fit_kernel_map(d.points, y);
    const Matrix kn = normalized_kernel(map.training, map.sigma, d.points);
    CHECK((kn * map.a - y.transpose()).norm() / y.norm() <= 1e-8);
    const auto back = embed_oos_kernel_map(map, d.points);
    CHECK((back.coordinates - y).norm() / y.norm() <= 1e-8);
    CHECK(back.zero_rows.empty());
    for (Index j = 0; j < map.sigma.size(); ++j) CHECK(map.sigma(j) > 0.0);
}

TEST_CASE("kernel map examples") {
    SUBCASE("single training point") {
        Matrix x(2, 1);
        x << 1.0, 2.0;
        Matrix y(1, 1);
        y << 5.0;
        const auto map = fit_kernel_map(x, y);
        CHECK(map.a(0, 0) == doctest::Approx(5.0));
    }
    SUBCASE("symmetric pair gives antisymmetric coefficients") {
        const Matrix x = testing::make_points({{0.0}, {2.0}}).points;
        Matrix y(1, 2);
        y << -1.0, 1.0;
        const auto map = fit_kernel_map(x, y);
        CHECK(map.a(0, 0) == doctest::Approx(-map.a(1, 0)));
        SUBCASE("equidistant point averages the coefficients") {
            Matrix mid(1, 1);
            mid << 1.0;
            const auto out = embed_oos_kernel_map(map, mid);
            CHECK(out.coordinates(0, 0) == doctest::Approx(0.5 * (map.a(0, 0) + map.a(1, 0))).scale(1.0));
        }
    }
    SUBCASE("point near a training point takes its embedding") {
        const Matrix x = testing::make_points({{0.0}, {2.0}, {5.0}}).points;
        Matrix y(1, 3);
        y << 3.0, -1.0, 7.0;
        const auto map = fit_kernel_map(x, y);
        Matrix t(1, 1);
        t << 2.0 + 1e-3;
        CHECK(embed_oos_kernel_map(map, t).coordinates(0, 0) == doctest::Approx(-1.0).epsilon(1e-3));
    }
    SUBCASE("unsupported test point is flagged") {
        const Matrix x = testing::make_points({{0.0}, {1.0}}).points;
        const auto map = fit_kernel_map(x, Matrix::Ones(1, 2));
        Matrix t(1, 2);
        t << 0.5, 1e4;
        const auto out = embed_oos_kernel_map(map, t);
        REQUIRE(out.zero_rows.size() == 1);
        CHECK(out.zero_rows[0] == 1);
        CHECK(out.coordinates(0, 1) == 0.0);
    }
    SUBCASE("duplicate training points are rejected") {
        const Matrix x = testing::make_points({{0.0}, {0.0}, {1.0}}).points;
        CHECK_THROWS_AS(fit_kernel_map(x, Matrix::Ones(1, 3)), DataError);
    }
}

TEST_CASE("both schemes are translation consistent") {
    const Dataset d(testing::spiral_points(30));
    const Matrix k = kernels::build_catalog_kernel(kernels::KernelMethod::isomap, d, {.k = 4}).values;
    const Matrix y = spectral::embed_from_kernel(k, 2).coordinates;
    std::mt19937_64 rng(8);
    const Matrix test = testing::random_matrix(2, 5, rng) * 5.0;
    Vector shift(2);
    shift << 100.0, -40.0;
    const Matrix moved = d.points.colwise() + shift;
    const Matrix moved_test = test.colwise() + shift;

    const auto e1 = fit_oos_eigen(d.points, k, 2);
    const auto e2 = fit_oos_eigen(moved, k, 2);
    const Matrix a = embed_oos_eigen_batch(e1, test);
    // (R + ηI)⁻¹ amplifies rounding by ~1/η, so the eigenfunction scheme is held to its reproduction tolerance
    CHECK((a - embed_oos_eigen_batch(e2, moved_test)).norm() <= 1e-2 * a.norm());

    const auto m1 = fit_kernel_map(d.points, y);
    const auto m2 = fit_kernel_map(moved, y);
    const Matrix b = embed_oos_kernel_map(m1, test).coordinates;
    CHECK((b - embed_oos_kernel_map(m2, moved_test).coordinates).norm() <= 1e-8 * (1.0 + b.norm()));
}
