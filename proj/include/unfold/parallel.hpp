#pragma once

// Data-parallel kernels. Every kernel has an OpenMP version (used by the
// library) and a `_serial` reference with identical semantics, kept for the
// equivalence tests and the benchmark target.

#include "unfold/types.hpp"

#include <span>
#include <utility>
#include <vector>

namespace unfold::par {

/// Squared Euclidean distances between the columns of `points` (d x n).
Matrix pairwise_sq_distances(const Matrix& points);
Matrix pairwise_sq_distances_serial(const Matrix& points);

/// For each index in `members`, its k nearest other members by `sq_dist`.
/// Ties break toward the lower point index.
std::vector<std::vector<Index>> knn_lists(const Matrix& sq_dist, std::span<const Index> members, int k);
std::vector<std::vector<Index>> knn_lists_serial(const Matrix& sq_dist, std::span<const Index> members, int k);

using Adjacency = std::vector<std::vector<std::pair<Index, double>>>;

/// All-sources shortest path lengths (Dijkstra per source). Unreachable
/// entries are +infinity.
Matrix shortest_paths(const Adjacency& adj);
Matrix shortest_paths_serial(const Adjacency& adj);

/// Block layout of a stack of factored symmetric matrices A_i = U_i C_i U_iᵀ
/// whose U_i are stored side by side. Block i owns columns
/// [offsets[i], offsets[i+1]) and has core C_i.
struct FactorBlocks {
    std::vector<Index> offsets;
    std::vector<Matrix> cores;

    Index count() const { return static_cast<Index>(cores.size()); }
    Index width(Index i) const { return offsets[i + 1] - offsets[i]; }
};

/// G_ik = tr(C_i Z_ik C_k Z_ki) where Z = Uᵀ S U is the cross product of all
/// stacked factors under S; this is tr(A_i S A_k S).
Matrix factor_gram(const FactorBlocks& blocks, const Matrix& z);
Matrix factor_gram_serial(const FactorBlocks& blocks, const Matrix& z);

}  // namespace unfold::par
