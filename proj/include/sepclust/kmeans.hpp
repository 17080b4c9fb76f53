#pragma once

#include "sepclust/matrix.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace sepclust {

struct KMeansSolution {
    Matrix centers; // k×d
    std::vector<int> labels;
    double cost = 0.0;
    int iterations = 0; // accepted swaps for the local search, Lloyd steps otherwise
};

/// k distinct initial centers by squared-distance-weighted sampling.
/// Deterministic given seed. Input error when k exceeds the number of
/// distinct points.
Matrix d2_seed(const Matrix& a, std::size_t k, std::uint64_t seed);

/// Single-swap local search: replaces one center by one pool point whenever
/// that lowers the cost by a relative factor of at least 1e−6, scanning
/// (pool point, center) pairs in order, until a full pass finds no improving
/// swap or max_swaps swaps were accepted.
KMeansSolution swap_local_search(const Matrix& a, Matrix init,
                                 const std::vector<int>& candidate_pool, int max_swaps);

/// One Lloyd step: assign to nearest center (ties to the lowest index), then
/// recompute means. A cluster that receives no points keeps its center.
std::pair<std::vector<int>, Matrix> lloyd_step(const Matrix& a, const Matrix& centers);

/// D²-seeding, swap local search over all points (max 50·k swaps), then Lloyd
/// to a fixed point. The constant-factor k-means routine used by the
/// projection stage of the pipeline.
KMeansSolution approx_kmeans(const Matrix& a, std::size_t k, std::uint64_t seed);

} // namespace sepclust
