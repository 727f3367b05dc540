#include "unfold/graph.hpp"
#include "unfold/parallel.hpp"
#include "unfold/types.hpp"

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

using namespace unfold;

namespace {

Matrix random_points(Index d, Index n) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    Matrix p(d, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < d; ++i) p(i, j) = nd(rng);
    return p;
}

void BM_Distances(benchmark::State& state) {
    const Matrix p = random_points(3, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(par::pairwise_sq_distances(p));
}

void BM_DistancesSerial(benchmark::State& state) {
    const Matrix p = random_points(3, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(par::pairwise_sq_distances_serial(p));
}

void BM_Knn(benchmark::State& state) {
    const Matrix d = par::pairwise_sq_distances(random_points(3, state.range(0)));
    std::vector<Index> members(d.rows());
    std::iota(members.begin(), members.end(), Index{0});
    for (auto _ : state) benchmark::DoNotOptimize(par::knn_lists(d, members, 8));
}

void BM_KnnSerial(benchmark::State& state) {
    const Matrix d = par::pairwise_sq_distances(random_points(3, state.range(0)));
    std::vector<Index> members(d.rows());
    std::iota(members.begin(), members.end(), Index{0});
    for (auto _ : state) benchmark::DoNotOptimize(par::knn_lists_serial(d, members, 8));
}

par::Adjacency knn_adjacency(Index n) {
    const Dataset data(random_points(3, n));
    return graph::build_knn_graph(data, 6).symmetric_adjacency();
}

void BM_ShortestPaths(benchmark::State& state) {
    const auto adj = knn_adjacency(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(par::shortest_paths(adj));
}

void BM_ShortestPathsSerial(benchmark::State& state) {
    const auto adj = knn_adjacency(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(par::shortest_paths_serial(adj));
}

/// Rank-one blocks as produced by pair-distance constraints.
std::pair<par::FactorBlocks, Matrix> rank_one_stack(Index count, Index dim) {
    par::FactorBlocks blocks;
    blocks.offsets.resize(count + 1);
    std::iota(blocks.offsets.begin(), blocks.offsets.end(), Index{0});
    blocks.cores.assign(count, Matrix::Ones(1, 1));
    const Matrix u = random_points(dim, count);
    const Matrix s = Matrix::Identity(dim, dim);
    return {blocks, u.transpose() * s * u};
}

void BM_FactorGram(benchmark::State& state) {
    const auto [blocks, z] = rank_one_stack(state.range(0), 40);
    for (auto _ : state) benchmark::DoNotOptimize(par::factor_gram(blocks, z));
}

void BM_FactorGramSerial(benchmark::State& state) {
    const auto [blocks, z] = rank_one_stack(state.range(0), 40);
    for (auto _ : state) benchmark::DoNotOptimize(par::factor_gram_serial(blocks, z));
}

}  // namespace

BENCHMARK(BM_Distances)->Arg(200)->Arg(1000);
BENCHMARK(BM_DistancesSerial)->Arg(200)->Arg(1000);
BENCHMARK(BM_Knn)->Arg(200)->Arg(1000);
BENCHMARK(BM_KnnSerial)->Arg(200)->Arg(1000);
BENCHMARK(BM_ShortestPaths)->Arg(200)->Arg(500);
BENCHMARK(BM_ShortestPathsSerial)->Arg(200)->Arg(500);
BENCHMARK(BM_FactorGram)->Arg(200)->Arg(800);
BENCHMARK(BM_FactorGramSerial)->Arg(200)->Arg(800);

BENCHMARK_MAIN();
