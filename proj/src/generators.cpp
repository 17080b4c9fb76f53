#include "sepclust/generators.hpp"

#include "sepclust/errors.hpp"
#include "sepclust/kernels.hpp"
#include "sepclust/kmeans.hpp"
#include "sepclust/linalg.hpp"
#include "sepclust/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace sepclust {

namespace {

void validate_mixture(const MixtureSpec& spec) {
    if (spec.k < 1 || spec.d < 1 || spec.n < spec.k)
        throw input_error("gen_gaussian_mixture: need k >= 1, d >= 1, n >= k");
    if (spec.weights.size() != spec.k || spec.sigma.size() != spec.k)
        throw input_error("gen_gaussian_mixture: weights/sigma size mismatch");
    double total = 0.0;
    for (double w : spec.weights) {
        if (w <= 0.0) throw input_error("gen_gaussian_mixture: weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw input_error("gen_gaussian_mixture: weights must sum to 1");
    for (double s : spec.sigma)
        if (s < 0.0) throw input_error("gen_gaussian_mixture: sigma must be >= 0");
    if (spec.means.rows() != spec.k || spec.means.cols() != spec.d)
        throw input_error("gen_gaussian_mixture: means shape mismatch");
}

} // namespace

GeneratedInstance gen_gaussian_mixture(const MixtureSpec& spec, std::uint64_t seed) {
    validate_mixture(spec);
    Rng rng(seed);

    std::vector<int> labels(spec.n);
    bool covered = false;
    for (int attempt = 0; attempt < 100 && !covered; ++attempt) {
        std::vector<std::size_t> counts(spec.k, 0);
        for (std::size_t i = 0; i < spec.n; ++i) {
            auto lab = rng.pick_weighted(spec.weights);
            labels[i] = static_cast<int>(lab);
            counts[lab]++;
        }
        covered = std::all_of(counts.begin(), counts.end(),
                              [](std::size_t c) { return c > 0; });
    }
    if (!covered)
        throw input_error("gen_gaussian_mixture: a cluster stayed empty over 100 label draws "
                          "(weights too small for n)");

    GeneratedInstance out;
    out.data = Matrix(spec.n, spec.d);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto r = static_cast<std::size_t>(labels[i]);
        auto mean = spec.means.row(r);
        auto row = out.data.row(i);
        for (std::size_t j = 0; j < spec.d; ++j) row[j] = mean[j] + spec.sigma[r] * rng.normal();
    }
    out.target = build_target(out.data, labels);
    return out;
}

PlacedMeans place_separated_means(std::size_t k, std::size_t d, double target_c,
                                  double sigma_max, const std::vector<double>& weights,
                                  std::size_t n, std::uint64_t seed) {
    if (d < k) throw input_error("place_separated_means: needs d >= k");
    if (!(target_c > 0.0)) throw input_error("place_separated_means: target_c must be > 0");

    // Seeded orthonormal directions; mean r sits at scale·q_r, so all pairs
    // are √2·scale apart.
    Matrix dirs(k, d);
    {
        Rng rng(derive_seed(seed, 0));
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t j = 0; j < d; ++j) dirs(r, j) = rng.normal();
        orthonormalize_rows(dirs, derive_seed(seed, 0, 1));
    }

    // Rough deviation estimate seeds the initial scale; pilots refine it.
    double wmin = *std::min_element(weights.begin(), weights.end());
    double spec_est = sigma_max * (std::sqrt(static_cast<double>(n)) +
                                   std::sqrt(static_cast<double>(d)));
    double frob_est = sigma_max * std::sqrt(static_cast<double>(n * d));
    double delta_est = std::min(std::sqrt(static_cast<double>(k)) * spec_est, frob_est) /
                       std::sqrt(wmin * static_cast<double>(n));
    double scale = std::max(target_c * 2.0 * delta_est * 1.1 / std::sqrt(2.0), 1e-12);

    PlacedMeans placed;
    for (int attempt = 0; attempt <= 20; ++attempt) {
        placed.means = Matrix(k, d);
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t j = 0; j < d; ++j) placed.means(r, j) = scale * dirs(r, j);
        placed.doublings = attempt;

        if (sigma_max == 0.0) { // exact: Δ = 0 and means distinct → c = +∞
            placed.pilot_separation = std::numeric_limits<double>::infinity();
            return placed;
        }

        MixtureSpec pilot;
        pilot.k = k;
        pilot.d = d;
        pilot.n = n;
        pilot.weights = weights;
        pilot.means = placed.means;
        pilot.sigma.assign(k, sigma_max);
        GeneratedInstance sample = gen_gaussian_mixture(pilot, derive_seed(seed, 1, attempt));
        placed.pilot_separation = spectral_stats(sample.data, sample.target).separation_c;
        if (placed.pilot_separation >= target_c) return placed;
        scale *= 2.0;
    }
    throw generation_error("place_separated_means: could not reach target separation " +
                           std::to_string(target_c) + " after 20 doublings");
}

double PlantedPartitionSpec::sigma_max() const {
    double m = 0.0;
    for (double p : probabilities.data()) m = std::max(m, p);
    return std::sqrt(m);
}

double PlantedPartitionSpec::w_min() const {
    std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    std::size_t least = *std::min_element(sizes.begin(), sizes.end());
    return static_cast<double>(least) / static_cast<double>(n);
}

PlantedInstance gen_planted_partition(const PlantedPartitionSpec& spec, std::uint64_t seed,
                                      double c0, double delta) {
    const std::size_t k = spec.sizes.size();
    if (k < 1 || spec.probabilities.rows() != k || spec.probabilities.cols() != k)
        throw input_error("gen_planted_partition: probability matrix must be k×k");
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t s = 0; s < k; ++s) {
            double p = spec.probabilities(r, s);
            if (p < 0.0 || p > 1.0)
                throw input_error("gen_planted_partition: probabilities must lie in [0,1]");
            if (p != spec.probabilities(s, r))
                throw input_error("gen_planted_partition: probability matrix must be symmetric");
        }
    for (std::size_t size : spec.sizes)
        if (size == 0) throw input_error("gen_planted_partition: empty cluster size");

    const std::size_t n = std::accumulate(spec.sizes.begin(), spec.sizes.end(), std::size_t{0});
    std::vector<int> labels(n);
    {
        std::size_t at = 0;
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < spec.sizes[r]; ++c) labels[at++] = static_cast<int>(r);
    }

    // Upper triangle (diagonal drawn like any edge), mirrored for symmetry.
    PlantedInstance out;
    out.data = Matrix(n, n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(labels[i]);
        for (std::size_t j = i; j < n; ++j) {
            double p = spec.probabilities(r, static_cast<std::size_t>(labels[j]));
            double edge = rng.uniform() < p ? 1.0 : 0.0;
            out.data(i, j) = edge;
            out.data(j, i) = edge;
        }
    }
    out.target = build_target(out.data, labels);

    PlantedConditionReport& rep = out.report;
    rep.sigma_max = spec.sigma_max();
    rep.w_min = spec.w_min();
    rep.c0 = c0;
    rep.delta = delta;
    rep.rhs = c0 * rep.sigma_max * std::sqrt(static_cast<double>(k)) *
              (1.0 / rep.w_min + std::log10(static_cast<double>(n) / delta));
    rep.mean_distances = Matrix(k, k);
    rep.min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t s = 0; s < k; ++s) {
            if (r == s) continue;
            double sq = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                double diff = spec.probabilities(r, t) - spec.probabilities(s, t);
                sq += static_cast<double>(spec.sizes[t]) * diff * diff;
            }
            rep.mean_distances(r, s) = std::sqrt(sq);
            if (r < s && rep.rhs > 0.0)
                rep.min_ratio = std::min(rep.min_ratio, rep.mean_distances(r, s) / rep.rhs);
        }
    }
    if (k == 1) rep.min_ratio = std::numeric_limits<double>::infinity();
    rep.satisfied = rep.min_ratio >= 1.0;
    return out;
}

OrssInstance gen_orss(std::size_t k, std::size_t d, double epsilon_target, std::size_t n,
                      std::uint64_t seed) {
    if (!(epsilon_target > 0.0) || epsilon_target >= 0.25)
        throw input_error("gen_orss: epsilon_target must lie in (0, 1/4)");
    if (k < 2 || d < k || n < 2 * k) throw input_error("gen_orss: need k >= 2, d >= k, n >= 2k");

    // Fixed block labels and one shared noise draw; rescaling moves only the
    // means, so every attempt reuses the same z.
    std::vector<int> labels(n);
    std::vector<std::size_t> sizes(k, n / k);
    for (std::size_t r = 0; r < n % k; ++r) sizes[r]++;
    {
        std::size_t at = 0;
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < sizes[r]; ++c) labels[at++] = static_cast<int>(r);
    }
    Matrix noise(n, d);
    Matrix dirs(k, d);
    {
        Rng rng(derive_seed(seed, 0));
        for (double& v : noise.data()) v = rng.normal();
        for (double& v : dirs.data()) v = rng.normal();
        orthonormalize_rows(dirs, derive_seed(seed, 0, 1));
    }

    // Start from the analytic scale for the requested ratio and double on
    // certificate failure.
    const double dn = static_cast<double>(n), dd = static_cast<double>(d);
    double pair_factor = *std::max_element(sizes.begin(), sizes.end());
    double scale = std::sqrt(dn * dd * (1.0 / epsilon_target - 1.0) / pair_factor) * 1.3;

    OrssInstance out;
    for (int attempt = 0; attempt <= 20; ++attempt) {
        out.data = noise;
        for (std::size_t i = 0; i < n; ++i) {
            auto dir = dirs.row(static_cast<std::size_t>(labels[i]));
            auto row = out.data.row(i);
            for (std::size_t j = 0; j < d; ++j) row[j] += scale * dir[j];
        }
        out.target = build_target(out.data, labels);
        out.certificate = certify_orss(out.data, out.target, epsilon_target,
                                       derive_seed(seed, 2, static_cast<std::uint64_t>(attempt)));
        out.certificate.doublings = attempt;
        if (out.certificate.epsilon_achieved <= epsilon_target) return out;
        scale *= 2.0;
    }
    throw generation_error("gen_orss: certificate not reached after 20 doublings");
}

OrssCertificate certify_orss(const Matrix& data, const TargetClustering& target,
                             double epsilon_target, std::uint64_t seed) {
    const std::size_t k = target.k, n = data.rows();
    if (k < 2) throw input_error("certify_orss: needs k >= 2");

    double target_cost = kernels::frobenius_sq(data - target.center_matrix);

    // Best (k−1)-clustering candidate: seeded heuristic runs ...
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        KMeansSolution sol = approx_kmeans(data, k - 1, derive_seed(seed, trial));
        best = std::min(best, sol.cost);
    }
    // ... and every single-pair merge of the target clustering.
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t s = r + 1; s < k; ++s) {
            std::vector<int> merged = target.labels;
            for (std::size_t i = 0; i < n; ++i) {
                auto lab = static_cast<std::size_t>(merged[i]);
                if (lab == s) lab = r;
                if (lab > s) lab--;
                merged[i] = static_cast<int>(lab);
            }
            Matrix centers;
            kernels::cluster_means(data, merged, k - 1, nullptr, centers);
            best = std::min(best, kernels::kmeans_cost(data, merged, centers));
        }
    }

    OrssCertificate cert;
    cert.epsilon_target = epsilon_target;
    cert.target_cost = target_cost;
    cert.best_k_minus_1_cost = best;
    cert.epsilon_achieved = best > 0.0 ? target_cost / best : 0.0;
    cert.heuristic = true;
    return cert;
}

} // namespace sepclust
