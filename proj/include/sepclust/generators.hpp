#pragma once

#include "sepclust/matrix.hpp"
#include "sepclust/model.hpp"

#include <cstdint>
#include <vector>

namespace sepclust {

/// Spherical Gaussian mixture: weights sum to 1, cluster r is N(μ_r, σ_r²·I).
struct MixtureSpec {
    std::size_t k = 0;
    std::size_t d = 0;
    std::size_t n = 0;
    std::vector<double> weights;
    Matrix means; // k×d
    std::vector<double> sigma;
};

struct GeneratedInstance {
    Matrix data;
    TargetClustering target;
};

/// Draw labels from the weights, then points around their means. Labels are
/// redrawn (up to 100 attempts) until every cluster is non-empty.
GeneratedInstance gen_gaussian_mixture(const MixtureSpec& spec, std::uint64_t seed);

struct PlacedMeans {
    Matrix means; // k×d
    double pilot_separation = 0.0;
    int doublings = 0;
};

/// Means along seeded random orthonormal directions, scaled (by doubling, at
/// most 20 times) until a pilot sample of size n achieves separation ≥
/// target_c. The pilot uses derive_seed(seed, 1, attempt), so the certificate
/// is recomputable.
PlacedMeans place_separated_means(std::size_t k, std::size_t d, double target_c,
                                  double sigma_max, const std::vector<double>& weights,
                                  std::size_t n, std::uint64_t seed);

/// Symmetric edge-probability block model. Rows of the 0/1 adjacency matrix
/// are the data points; d = n.
struct PlantedPartitionSpec {
    Matrix probabilities; // k×k, symmetric, entries in [0,1]
    std::vector<std::size_t> sizes;

    double sigma_max() const; // max_{r,s} sqrt(P_rs)
    double w_min() const;     // min_r n_r/n
};

/// Pairwise separation of the structured means (j-th coordinate of mean r is
/// P_{r, cluster(j)}) against c0·σ_max·√k·(1/w_min + log10(n/δ)).
struct PlantedConditionReport {
    double sigma_max = 0.0;
    double w_min = 0.0;
    double c0 = 1.0;
    double delta = 0.05;
    double rhs = 0.0;
    Matrix mean_distances; // k×k structured-mean distances
    double min_ratio = 0.0;
    bool satisfied = false; // min_ratio ≥ 1
};

struct PlantedInstance {
    Matrix data;
    TargetClustering target;
    PlantedConditionReport report;
};

PlantedInstance gen_planted_partition(const PlantedPartitionSpec& spec, std::uint64_t seed,
                                      double c0 = 1.0, double delta = 0.05);

/// Numeric certificate that the best (k−1)-clustering found costs at least
/// 1/ε times the target k-clustering. The (k−1) side is the minimum of ten
/// seeded approx_kmeans runs and every single-pair merge of the target — an
/// upper-bound proxy, recorded as heuristic.
struct OrssCertificate {
    double epsilon_target = 0.0;
    double epsilon_achieved = 0.0;
    double target_cost = 0.0;
    double best_k_minus_1_cost = 0.0;
    int doublings = 0;
    bool heuristic = true;
};

struct OrssInstance {
    Matrix data;
    TargetClustering target;
    OrssCertificate certificate;
};

/// Recompute the certificate for any instance: ten approx_kmeans(k−1) runs
/// seeded derive_seed(seed, trial) plus every single-pair target merge.
OrssCertificate certify_orss(const Matrix& data, const TargetClustering& target,
                             double epsilon_target, std::uint64_t seed);

/// Tight, far-separated clusters rescaled (≤ 20 doublings) until the
/// certificate reaches epsilon_target ∈ (0, 1/4). The certificate seed of
/// attempt a is derive_seed(seed, 2, a), so it is recomputable from the
/// instance plus certificate.doublings.
OrssInstance gen_orss(std::size_t k, std::size_t d, double epsilon_target, std::size_t n,
                      std::uint64_t seed);

} // namespace sepclust
