#include "helpers.hpp"
#include "unfold/graph.hpp"
#include "unfold/parallel.hpp"

#include <doctest.h>

using namespace unfold;

TEST_CASE("pairwise distances: parallel equals serial") {
    std::mt19937_64 rng(31);
    const Matrix x = testing::random_matrix(5, 120, rng);
    const Matrix a = par::pairwise_sq_distances(x);
    const Matrix b = par::pairwise_sq_distances_serial(x);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * b.maxCoeff());
    CHECK((a - a.transpose()).norm() == 0.0);
}

TEST_CASE("knn lists: parallel equals serial") {
    std::mt19937_64 rng(32);
    Matrix x = testing::random_matrix(2, 90, rng);
    x.col(5) = x.col(6);  // duplicated point exercises the tie-break
    const Matrix d = par::pairwise_sq_distances_serial(x);
    std::vector<Index> members(90);
    for (Index i = 0; i < 90; ++i) members[static_cast<std::size_t>(i)] = i;
    CHECK(par::knn_lists(d, members, 7) == par::knn_lists_serial(d, members, 7));
    std::vector<Index> odd;
    for (Index i = 1; i < 90; i += 2) odd.push_back(i);
    CHECK(par::knn_lists(d, odd, 3) == par::knn_lists_serial(d, odd, 3));
}

TEST_CASE("shortest paths: Dijkstra equals Floyd-Warshall") {
    std::mt19937_64 rng(33);
    Dataset cloud(testing::random_matrix(3, 70, rng));
    const auto g = graph::build_knn_graph(cloud, 4);
    const auto adj = g.symmetric_adjacency();
    const Matrix a = par::shortest_paths(adj);
    const Matrix b = par::shortest_paths_serial(adj);
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) {
            if (std::isinf(b(i, j))) {
                CHECK(std::isinf(a(i, j)));
            } else {
                CHECK(std::abs(a(i, j) - b(i, j)) <= 1e-12 * (1.0 + b(i, j)));
            }
        }
}

TEST_CASE("factored Gram: parallel equals dense trace formula") {
    std::mt19937_64 rng(34);
    const Index m = 12;
    par::FactorBlocks blocks;
    blocks.offsets.push_back(0);
    Index width = 0;
    for (int i = 0; i < 9; ++i) {
        const Index r = 1 + i % 3;
        width += r;
        blocks.offsets.push_back(width);
        blocks.cores.push_back(testing::random_symmetric(r, rng));
    }
    const Matrix p = testing::random_matrix(m, width, rng);
    const Matrix s = testing::random_spd(m, rng);
    const Matrix z = p.transpose() * s * p;
    const Matrix a = par::factor_gram(blocks, z);
    const Matrix b = par::factor_gram_serial(blocks, z);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * b.cwiseAbs().maxCoeff());
}
