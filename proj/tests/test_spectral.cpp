#include "helpers.hpp"
#include "unfold/kernels.hpp"
#include "unfold/linalg.hpp"
#include "unfold/spectral.hpp"

#include <doctest.h>

#include <cmath>

using namespace unfold;
using namespace unfold::spectral;

TEST_CASE("embedding of a two-point kernel") {
    Matrix k(2, 2);
    k << 1, -1, -1, 1;
    const auto e = embed_from_kernel(k, 1);
    CHECK(e.eigenvalues(0) == doctest::Approx(2.0));
    CHECK(std::abs(e.coordinates(0, 0)) == doctest::Approx(1.0));
    CHECK(e.coordinates(0, 1) == doctest::Approx(-e.coordinates(0, 0)));

    const auto z = embed_from_kernel(Matrix::Zero(3, 3), 2);
    CHECK(z.coordinates.norm() == 0.0);
    CHECK_THROWS_AS(embed_from_kernel(k, 3), InvalidArgument);
}

TEST_CASE("negative eigenvalues are clamped and counted") {
    Matrix k = Vector(Eigen::Vector3d(3.0, -1.0, -2.0)).asDiagonal();
    const auto e = embed_from_kernel(k, 3);
    CHECK(e.clamped == 2);
    CHECK(e.coordinates.row(1).norm() == 0.0);
    CHECK(e.coordinates(0, 0) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("eigenvector sign convention is deterministic") {
    std::mt19937_64 rng(4);
    const Matrix k = testing::random_spd(7, rng);
    const auto ep = eigen_descending(k);
    for (Index c = 0; c < 7; ++c) {
        Index arg;
        ep.vectors.col(c).cwiseAbs().maxCoeff(&arg);
        CHECK(ep.vectors(arg, c) > 0.0);
    }
    for (Index c = 1; c < 7; ++c) CHECK(ep.values(c - 1) >= ep.values(c));
}

TEST_CASE("gram reconstruction and the variance identity") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 4; ++trial) {
        const Index n = 10 + 5 * trial;
        const Matrix b = testing::random_matrix(n, 3 + trial, rng);
        const Matrix k = double_center(b * b.transpose());
        const auto e = embed_from_kernel(k, 3 + trial);
        const Matrix y = e.coordinates;
        CHECK((y.transpose() * y - k).norm() <= 1e-6 * k.norm());
        double spread = 0.0;
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) spread += (y.col(i) - y.col(j)).squaredNorm();
        CHECK(spread / (2.0 * n) == doctest::Approx(k.trace()).epsilon(1e-6));
    }
}

TEST_CASE("eigenfunction at a training point") {
    std::mt19937_64 rng(12);
    Dataset d(testing::random_matrix(2, 15, rng));
    const EigenfunctionModel model(d, KernelFunction::rbf(1.3));
    const double rn = std::sqrt(15.0);
    for (int k = 0; k < 3; ++k) {
        for (Index i : {0, 7, 14}) {
            CHECK(eval_eigenfunction(model, k, d.point(i)) ==
                  doctest::Approx(rn * model.eigenvectors()(i, k)).epsilon(1e-6));
        }
    }
}

TEST_CASE("eigenvectors of the model are orthonormal") {
    std::mt19937_64 rng(12);
    Dataset d(testing::random_matrix(3, 20, rng));
    const EigenfunctionModel model(d, KernelFunction::linear());
    const Matrix v = model.eigenvectors();
    CHECK((v.transpose() * v - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK_THROWS_AS(eval_eigenfunction(model, 10, d.point(0)), InvalidArgument);  // rank 3
}

TEST_CASE("out-of-sample embedding reproduces training columns") {
    std::mt19937_64 rng(14);
    Dataset d(testing::random_matrix(3, 25, rng));
    const EigenfunctionModel model(d, KernelFunction::rbf(1.0));
    Matrix k(25, 25);
    for (Index i = 0; i < 25; ++i)
        for (Index j = 0; j < 25; ++j) k(i, j) = model.kernel()(d.point(i), d.point(j));
    const auto train = embed_from_kernel(double_center(k), 4);
    for (Index i = 0; i < 25; ++i) {
        const Vector y = embed_out_of_sample(model, d.point(i), 4);
        CHECK((y - train.coordinates.col(i)).norm() <= 1e-6 * train.coordinates.col(i).norm());
    }
}

TEST_CASE("linear kernel out-of-sample interpolates between collinear points") {
    Matrix p(2, 3);
    p << 0, 1, 3, 0, 2, 6;
    Dataset d(p);
    const EigenfunctionModel model(d, KernelFunction::linear());
    const Vector y0 = embed_out_of_sample(model, d.point(0), 1);
    const Vector y1 = embed_out_of_sample(model, d.point(1), 1);
    const Vector mid = embed_out_of_sample(model, Eigen::Vector2d(0.25, 0.5), 1);
    CHECK(mid(0) == doctest::Approx(0.75 * y0(0) + 0.25 * y1(0)));
    CHECK_THROWS_AS(embed_out_of_sample(model, d.point(0), 2), InvalidArgument);
}

TEST_CASE("midpoint of a symmetric pair") {
    Matrix p(1, 2);
    p << -1, 1;
    const EigenfunctionModel model(Dataset(p), KernelFunction::rbf(1.0));
    const Vector mid = Vector::Zero(1);
    CHECK(std::abs(eval_eigenfunction(model, 0, mid)) < 1e-12);
    CHECK(model.centered_column(mid).norm() < 1e-12);
}

TEST_CASE("intrinsic dimension") {
    CHECK(intrinsic_dimension(Eigen::Vector3d(10, 9, 0.01)) == 2);
    CHECK(intrinsic_dimension(Eigen::Vector3d(5, 0, 0), 3.0) == 1);
    CHECK(intrinsic_dimension(Vector::Constant(1, 1.0)) == 1);
    CHECK(intrinsic_dimension(Eigen::Vector4d(4, 3, 2, 1)) == 4);
    CHECK_THROWS_AS(intrinsic_dimension(Eigen::Vector2d(0, -1)), InvalidArgument);
}
