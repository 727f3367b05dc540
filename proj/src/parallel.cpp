#include "unfold/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace unfold::par {

namespace {

std::vector<Index> nearest_of(const Matrix& sq_dist, std::span<const Index> members, Index self, int k) {
    std::vector<Index> cand;
    cand.reserve(members.size());
    for (Index j : members) {
        if (j != self) cand.push_back(j);
    }
    auto closer = [&](Index a, Index b) {
        const double da = sq_dist(self, a);
        const double db = sq_dist(self, b);
        return da < db || (da == db && a < b);
    };
    const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kk), cand.end(), closer);
    cand.resize(kk);
    return cand;
}

Vector dijkstra(const Adjacency& adj, Index source) {
    const Index n = static_cast<Index>(adj.size());
    Vector dist = Vector::Constant(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist(source) = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist(u)) continue;
        for (const auto& [v, w] : adj[u]) {
            const double nd = d + w;
            if (nd < dist(v)) {
                dist(v) = nd;
                heap.emplace(nd, v);
            }
        }
    }
    return dist;
}

double block_pair(const FactorBlocks& blocks, const Matrix& z, Index i, Index k) {
    const Index ri = blocks.width(i);
    const Index rk = blocks.width(k);
    const Index oi = blocks.offsets[i];
    const Index ok = blocks.offsets[k];
    if (ri == 1 && rk == 1) {
        const double zik = z(oi, ok);
        return blocks.cores[i](0, 0) * blocks.cores[k](0, 0) * zik * zik;
    }
    const auto zik = z.block(oi, ok, ri, rk);
    const Matrix left = blocks.cores[i] * zik;
    const Matrix right = blocks.cores[k] * zik.transpose();
    return (left.array() * right.transpose().array()).sum();
}

}  // namespace

Matrix pairwise_sq_distances(const Matrix& points) {
    const Index n = points.cols();
    const Vector norms = points.colwise().squaredNorm().transpose();
    Matrix out = points.transpose() * points;
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            out(i, j) = i == j ? 0.0 : std::max(0.0, norms(i) + norms(j) - 2.0 * out(i, j));
        }
    }
    // exact symmetry; the expansion above can differ in the last bit
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) out(j, i) = out(i, j);
    }
    return out;
}

Matrix pairwise_sq_distances_serial(const Matrix& points) {
    const Index n = points.cols();
    Matrix out = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            out(i, j) = out(j, i) = (points.col(i) - points.col(j)).squaredNorm();
        }
    }
    return out;
}

std::vector<std::vector<Index>> knn_lists(const Matrix& sq_dist, std::span<const Index> members, int k) {
    std::vector<std::vector<Index>> out(members.size());
    const auto m = static_cast<std::ptrdiff_t>(members.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t a = 0; a < m; ++a) {
        out[static_cast<std::size_t>(a)] = nearest_of(sq_dist, members, members[static_cast<std::size_t>(a)], k);
    }
    return out;
}

std::vector<std::vector<Index>> knn_lists_serial(const Matrix& sq_dist, std::span<const Index> members, int k) {
    std::vector<std::vector<Index>> out;
    out.reserve(members.size());
    for (Index self : members) {
        std::vector<std::pair<double, Index>> all;
        for (Index j : members) {
            if (j != self) all.emplace_back(sq_dist(self, j), j);
        }
        std::sort(all.begin(), all.end());
        std::vector<Index> row;
        for (std::size_t t = 0; t < all.size() && t < static_cast<std::size_t>(k); ++t) row.push_back(all[t].second);
        out.push_back(std::move(row));
    }
    return out;
}

Matrix shortest_paths(const Adjacency& adj) {
    const Index n = static_cast<Index>(adj.size());
    Matrix out(n, n);
#pragma omp parallel for schedule(dynamic, 4)
    for (Index s = 0; s < n; ++s) {
        out.col(s) = dijkstra(adj, s);
    }
    return out;
}

Matrix shortest_paths_serial(const Adjacency& adj) {
    // Floyd-Warshall: independent of the Dijkstra path above.
    const Index n = static_cast<Index>(adj.size());
    Matrix d = Matrix::Constant(n, n, std::numeric_limits<double>::infinity());
    for (Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (const auto& [j, w] : adj[i]) d(i, j) = std::min(d(i, j), w);
    }
    for (Index via = 0; via < n; ++via) {
        for (Index i = 0; i < n; ++i) {
            const double dik = d(i, via);
            if (!std::isfinite(dik)) continue;
            for (Index j = 0; j < n; ++j) {
                d(i, j) = std::min(d(i, j), dik + d(via, j));
            }
        }
    }
    return d;
}

Matrix factor_gram(const FactorBlocks& blocks, const Matrix& z) {
    const Index q = blocks.count();
    Matrix g(q, q);
#pragma omp parallel for schedule(dynamic, 8)
    for (Index i = 0; i < q; ++i) {
        for (Index k = 0; k <= i; ++k) {
            g(i, k) = block_pair(blocks, z, i, k);
        }
    }
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g;
}

Matrix factor_gram_serial(const FactorBlocks& blocks, const Matrix& z) {
    // Reference: expand each pair through dense factor blocks.
    const Index q = blocks.count();
    Matrix g(q, q);
    for (Index i = 0; i < q; ++i) {
        for (Index k = 0; k < q; ++k) {
            const Matrix zik = z.block(blocks.offsets[i], blocks.offsets[k], blocks.width(i), blocks.width(k));
            g(i, k) = (blocks.cores[i] * zik * blocks.cores[k] * zik.transpose()).trace();
        }
    }
    return g;
}

}  // namespace unfold::par
