#pragma once

#include "sepclust/matrix.hpp"

#include <vector>

namespace sepclust {

/// Ground-truth partition of a dataset: labels, per-cluster sizes, means and
/// the n×d center matrix C whose row i is the mean of point i's cluster.
struct TargetClustering {
    std::vector<int> labels;
    std::size_t k = 0;
    std::vector<std::size_t> sizes;
    Matrix means;         // k×d
    Matrix center_matrix; // n×d
};

/// Deviation scales of a dataset around its target centers.
///
/// delta[r] = min(√k·‖A−C‖, ‖A−C‖_F)/√n_r. `separation` is the largest c such
/// that ‖μ_r−μ_s‖ ≥ c(Δ_r+Δ_s) for all pairs: +∞ when every pair with
/// distinct means has Δ_r+Δ_s = 0, and 0 when two means coincide exactly.
struct SpectralStats {
    double spec_norm = 0.0;
    double frob_norm = 0.0;
    std::vector<double> delta;
    bool degenerate = false; // ‖A−C‖_F² < k‖A−C‖²
    double separation_c = 0.0;
    bool spec_norm_converged = true;
};

/// Margin audit of the projection-onto-center-lines condition at a given γ.
/// Point i in cluster s is bad when for some r≠s its projection onto the
/// μ_r–μ_s line is closer to μ_r than the additive margin γ·gap_{r,s} allows,
/// with gap_{r,s} = (1/√n_r + 1/√n_s)·‖A−C‖.
struct ProximityReport {
    double gamma = 0.0;
    Matrix gaps; // k×k, symmetric, diagonal 0
    std::vector<int> bad_points;
    double bad_fraction = 0.0;
};

/// Build the clustering data model from labels (values 0..k−1, every cluster
/// non-empty).
TargetClustering build_target(const Matrix& a, const std::vector<int>& labels);

SpectralStats spectral_stats(const Matrix& a, const TargetClustering& t);

ProximityReport proximity_report(const Matrix& a, const TargetClustering& t, double gamma);

/// Σ_i ‖A_i − centers[labels[i]]‖².
double kmeans_cost(const Matrix& a, const std::vector<int>& labels, const Matrix& centers);

} // namespace sepclust
