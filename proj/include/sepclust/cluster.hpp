#pragma once

#include "sepclust/matrix.hpp"

#include <cstdint>
#include <vector>

namespace sepclust {

struct ClusterOptions {
    std::uint64_t seed = 0;
    int max_iter = 500;   // Lloyd-phase cap
    bool run_part3 = true;
};

/// Everything the three-part pipeline produced.
///
/// core_sets are pairwise disjoint but need not cover all points; a core set
/// that came out empty keeps ν_r as θ_r and is flagged in core_empty.
struct ClusterRunResult {
    Matrix projected; // Â, n×d
    Matrix nu;        // Part I centers, k×d
    std::vector<int> z_labels;
    std::vector<std::vector<int>> core_sets; // S_r
    std::vector<bool> core_empty;
    Matrix theta; // Part II centers, k×d
    std::vector<int> final_labels;
    Matrix final_centers;
    int part3_iterations = 0;
    bool part3_converged = true;
};

struct PartOneResult {
    Matrix projected;
    Matrix nu;
    std::vector<int> z_labels;
};

struct PartTwoResult {
    std::vector<std::vector<int>> core_sets;
    std::vector<bool> core_empty;
    Matrix theta;
};

struct PartThreeResult {
    std::vector<int> labels;
    Matrix centers;
    int iterations = 0;
    bool converged = true;
};

/// Project onto the top-k singular subspace and run the constant-factor
/// k-means there. z_labels assigns every projected row to its nearest ν
/// (ties to the lowest index).
PartOneResult part_one(const Matrix& a, std::size_t k, std::uint64_t seed);

/// Core sets S_r = {i : ‖Â_i−ν_r‖ ≤ (1/3)‖Â_i−ν_s‖ for every s≠r} and the
/// refined centers θ_r = mean of the ORIGINAL rows over S_r.
PartTwoResult part_two(const Matrix& projected, const Matrix& a, const Matrix& nu);

/// Lloyd steps from θ until the labels stop changing, the largest center
/// movement drops below 1e−9 times the dataset spread, or max_iter.
PartThreeResult part_three(const Matrix& a, const Matrix& theta, int max_iter);

ClusterRunResult cluster(const Matrix& a, std::size_t k, const ClusterOptions& options = {});

} // namespace sepclust
