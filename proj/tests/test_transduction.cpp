#include "helpers.hpp"
#include "unfold/linalg.hpp"
#include "unfold/transduction.hpp"

#include <doctest.h>

#include <cmath>

using namespace unfold;
using namespace unfold::transduction;

namespace {

void check_solution(const TransductionProblem& p, const TransductionResult& r) {
    CHECK(r.converged);
    const double c1 = p.c1 > 0.0 ? p.c1 : static_cast<double>(p.size());
    CHECK(std::abs(r.kernel.trace() - c1) <= 1e-6 * c1);
    CHECK(eigen_descending(r.kernel).values.minCoeff() >= -1e-9 * c1);
    CHECK(r.lmi_min_eigenvalue >= -1e-7 * r.lmi_scale);
    CHECK(r.mu.minCoeff() >= 0.0);
}

Matrix random_psd(Index n, Index rank, std::mt19937_64& rng) {
    const Matrix b = testing::random_matrix(n, rank, rng);
    return b * b.transpose();
}

}  // namespace

TEST_CASE("single candidate is rescaled to the trace target") {
    std::mt19937_64 rng(4);
    TransductionProblem p;
    p.kernels = {random_psd(6, 3, rng)};
    p.labels = {1, -1, 1, -1};
    p.c1 = 10.0;
    const auto r = solve_transduction_kernel(p);
    check_solution(p, r);
    const Matrix expected = p.kernels[0] * (10.0 / p.kernels[0].trace());
    CHECK((r.kernel - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("two opposite labels with an identity kernel") {
    // dual: max 2·1ᵀα − αᵀ(I + τI)α, α₁ = α₂, giving t* = 2 / (1 + τ)
    for (double tau : {1e-3, 0.5, 2.0}) {
        TransductionProblem p;
        p.kernels = {Matrix::Identity(2, 2)};
        p.labels = {1, -1};
        p.tau_reg = tau;
        p.c1 = 2.0;
        p.c2 = 10.0;
        const auto r = solve_transduction_kernel(p);
        check_solution(p, r);
        CHECK(r.t == doctest::Approx(2.0 / (1.0 + tau)).epsilon(1e-5));
    }
}

TEST_CASE("equal labels leave only the corner bound") {
    TransductionProblem p;
    p.kernels = {Matrix::Identity(2, 2)};
    p.labels = {1, 1};
    p.tau_reg = 100.0;
    p.c1 = 2.0;
    const auto r = solve_transduction_kernel(p);
    check_solution(p, r);
    // α ≥ 0 with αᵀy = 0 forces α = 0, so t* equals the corner term 2c₂δᵀe = 0
    CHECK(std::abs(r.t) <= 1e-6);
}

TEST_CASE("identical candidates give a unique kernel") {
    std::mt19937_64 rng(6);
    const Matrix k = random_psd(5, 5, rng);
    TransductionProblem p;
    p.kernels = {k, k};
    p.labels = {1, -1, 1};
    const auto r = solve_transduction_kernel(p);
    check_solution(p, r);
    const Matrix expected = k * (5.0 / k.trace());
    CHECK((r.kernel - expected).norm() <= 1e-8 * expected.norm());
}

TEST_CASE("enlarging the candidate set never increases t") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 4; ++trial) {
        const Index n = 5 + trial;
        std::vector<Matrix> all{random_psd(n, 2, rng), random_psd(n, 3, rng), Matrix::Identity(n, n)};
        std::vector<int> labels;
        for (Index i = 0; i < n - 1; ++i) labels.push_back(i % 2 == 0 ? 1 : -1);
        double previous = std::numeric_limits<double>::infinity();
        for (std::size_t m = 1; m <= all.size(); ++m) {
            TransductionProblem p;
            p.kernels.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
            p.labels = labels;
            const auto r = solve_transduction_kernel(p);
            INFO("trial ", trial, " m ", m);
            check_solution(p, r);
            CHECK(r.t <= previous + 1e-6 * (1.0 + std::abs(previous)));
            previous = r.t;
        }
    }
}

TEST_CASE("transduction input validation") {
    TransductionProblem p;
    p.labels = {1};
    CHECK_THROWS_AS(solve_transduction_kernel(p), InvalidArgument);
    p.kernels = {Matrix::Identity(2, 2)};
    p.labels = {1, 0};
    CHECK_THROWS_AS(solve_transduction_kernel(p), InvalidArgument);
    p.labels = {1, -1};
    p.kernels = {-Matrix::Identity(2, 2)};
    CHECK_THROWS_AS(solve_transduction_kernel(p), InvalidArgument);
    p.kernels = {Matrix::Zero(2, 2)};
    CHECK_THROWS_AS(solve_transduction_kernel(p), SolverError);
}

TEST_CASE("kernel predictor") {
    CHECK(kernel_predict(Vector::Zero(3), 1.0, Vector::Ones(3)) == 1.0);
    Vector e1 = Vector::Zero(2);
    e1(0) = 1.0;
    Vector col(2);
    col << 3.0, 8.0;
    CHECK(kernel_predict(e1, 0.0, col) == 3.0);
    CHECK_THROWS_AS(kernel_predict(e1, 0.0, Vector::Ones(3)), InvalidArgument);

    // hard-margin SVM on x = -1 (label -1) and x = +1 (label +1), linear kernel:
    // w = 1, b = 0, signed coefficients (-1/2, 1/2)
    Vector alphas(2);
    alphas << -0.5, 0.5;
    const Vector xs = (Vector(2) << -1.0, 1.0).finished();
    CHECK(kernel_predict(alphas, 0.0, xs * -1.0) == doctest::Approx(-1.0));
    CHECK(kernel_predict(alphas, 0.0, xs * 1.0) == doctest::Approx(1.0));
    CHECK(predict_label(kernel_predict(alphas, 0.0, xs * 0.3)) == 1);
}
