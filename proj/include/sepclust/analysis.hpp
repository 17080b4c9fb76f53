#pragma once

#include "sepclust/matrix.hpp"
#include "sepclust/model.hpp"

#include <string>
#include <vector>

namespace sepclust {

/// Minimum-total-distance bijection target cluster → found center.
struct CenterMatching {
    std::vector<int> permutation;   // permutation[r] = matched found index
    std::vector<double> distances;  // ‖μ_r − found[permutation[r]]‖
    double total_distance = 0.0;
};

CenterMatching match_centers(const Matrix& target_means, const Matrix& found_centers);

struct EvaluationReport {
    CenterMatching matching;
    std::vector<int> per_cluster_misclassified;
    int total_misclassified = 0;
    double cost_ratio = 0.0; // found-cluster-means cost over ‖A−C‖_F²
};

/// Ground-truth comparison of a found clustering. The cost ratio always uses
/// the means of the found clusters as centers, since those minimize the
/// found partition's cost.
EvaluationReport evaluate(const Matrix& a, const TargetClustering& t,
                          const std::vector<int>& found_labels, const Matrix& found_centers);

/// One checked inequality. holds ⇔ lhs ≤ rhs within 1e−9 relative slack.
struct InequalityCheck {
    std::string fact_id;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    std::string context;
};

InequalityCheck make_check(std::string fact_id, double lhs, double rhs, std::string context);

// --- universal projection bound -------------------------------------------
/// ‖Â−C‖_F² ≤ 8·min{k‖A−C‖², ‖A−C‖_F²}; holds for every dataset/target.
InequalityCheck check_projection_cost(const Matrix& a, const TargetClustering& t,
                                      const SpectralStats& stats);

// --- projection-stage (Part I) bounds -------------------------------------
/// Matched center distances ‖μ_r − ν_{match(r)}‖ ≤ 6Δ_r, one check per r.
std::vector<InequalityCheck> check_matched_center_distance(const TargetClustering& t,
                                                           const SpectralStats& stats,
                                                           const Matrix& nu);

/// Misclassification of the nearest-ν clustering: per source cluster
/// (≤ 128/c²·n_s), per destination cluster (≤ 128/c²·n_r), and in total
/// (≤ 128/c²·n_{second largest}), with the measured separation c.
std::vector<InequalityCheck> check_projection_misclassification(const TargetClustering& t,
                                                                const SpectralStats& stats,
                                                                const std::vector<int>& z_labels,
                                                                const Matrix& nu);

/// Cost ratio of the nearest-ν clustering ≤ 1 + 49/c.
InequalityCheck check_projection_cost_ratio(const Matrix& a, const TargetClustering& t,
                                            const SpectralStats& stats,
                                            const std::vector<int>& z_labels, const Matrix& nu);

// --- mean-shift facts -------------------------------------------------------
/// ‖μ(S_r)−μ_r‖ bound for a set built by removing `removed` points of T_r and
/// adding `added[s]` points of each other cluster (each added x must satisfy
/// ‖x−μ_s‖ ≥ (2/3)‖x−μ_r‖; removal/addition fractions below 1/4).
InequalityCheck check_perturbed_mean_shift(const Matrix& a, const TargetClustering& t,
                                           const SpectralStats& stats, std::size_t r,
                                           const std::vector<int>& removed,
                                           const std::vector<std::vector<int>>& added);

/// For one cluster's submatrix: |X|·‖μ(X)−μ_r‖ ≤ √|X|·‖A_r−C_r‖ and the
/// complement balance identity (emitted as a ≤ pair).
std::vector<InequalityCheck> check_subset_mean(const Matrix& cluster_rows,
                                               const std::vector<int>& subset);

// --- core-set (Part II) bounds ---------------------------------------------
/// |T_r \ S_r| ≤ (512/c²)·n_r per cluster. Core sets are indexed by found
/// center, so ν is needed to match them to target clusters.
std::vector<InequalityCheck> check_core_coverage(const TargetClustering& t,
                                                 const SpectralStats& stats,
                                                 const std::vector<std::vector<int>>& core_sets,
                                                 const Matrix& nu);

/// |T_s ∩ S_r| ≤ (48²/(c⁴k²))·n_r + 1 per ordered pair (the +1 absorbs
/// integrality at desk scale).
std::vector<InequalityCheck> check_core_leakage(const TargetClustering& t,
                                                const SpectralStats& stats,
                                                const std::vector<std::vector<int>>& core_sets,
                                                const Matrix& nu);

/// ‖θ_r−μ_r‖ ≤ (factor/c)·‖A−C‖/√n_r per cluster (calibrated factor), with
/// θ matched to target clusters through the ν matching.
std::vector<InequalityCheck> check_refined_center_distance(const TargetClustering& t,
                                                           const SpectralStats& stats,
                                                           const Matrix& theta, const Matrix& nu,
                                                           double factor = 100.0);

/// Points of T_s whose projection onto the ζ_r–ζ_s line sits β‖ζ_s−ζ_r‖
/// closer to ζ_r: count ≤ 256(α²/β²)/(c⁴k)·min{n_r,n_s} + 1. Inputs must
/// satisfy ‖μ_r−ζ_r‖ ≤ αΔ_r and ‖μ_s−ζ_s‖ ≤ αΔ_s.
InequalityCheck check_line_margin_count(const Matrix& a, const TargetClustering& t,
                                        const SpectralStats& stats, std::size_t r, std::size_t s,
                                        std::span<const double> zeta_r,
                                        std::span<const double> zeta_s, double alpha, double beta);

/// No point of T_s with ‖Â_i−μ̂_s‖ ≤ 2‖Â_i−μ̂_r‖ may land in the core set S_r
/// (meaningful when the measured separation exceeds 60; the caller gates).
InequalityCheck check_core_exclusion(const Matrix& projected, const TargetClustering& t,
                                     const Matrix& nu, const Matrix& mu_hat);

/// ‖μ_r − μ̂_r‖ ≤ ‖A−C‖/√n_r per cluster, μ̂ the top-k projection of μ.
std::vector<InequalityCheck> check_projected_mean_drift(const Matrix& a,
                                                        const TargetClustering& t,
                                                        const SpectralStats& stats);

/// (a) misclassified points of the nearest-θ clustering ≤ ε·n + κ_a·n/(γ²c⁴)
/// with ε the measured γ-bad fraction; (b) ε ≤ 32(√k/(c√k−γ))² when γ < c√k.
std::vector<InequalityCheck> check_good_point_misclassification(const Matrix& a,
                                                                const TargetClustering& t,
                                                                const SpectralStats& stats,
                                                                const Matrix& theta, double gamma,
                                                                double kappa_a = 1e4);

} // namespace sepclust
