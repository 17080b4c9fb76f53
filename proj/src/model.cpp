#include "sepclust/model.hpp"

#include "sepclust/errors.hpp"
#include "sepclust/kernels.hpp"
#include "sepclust/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sepclust {

TargetClustering build_target(const Matrix& a, const std::vector<int>& labels) {
    if (!a.all_finite()) throw input_error("build_target: non-finite data");
    if (labels.size() != a.rows()) throw input_error("build_target: label count != rows");
    int max_label = -1;
    for (int lab : labels) {
        if (lab < 0) throw input_error("build_target: negative label");
        max_label = std::max(max_label, lab);
    }
    const std::size_t k = static_cast<std::size_t>(max_label) + 1;

    TargetClustering t;
    t.labels = labels;
    t.k = k;
    t.sizes.assign(k, 0);
    for (int lab : labels) t.sizes[static_cast<std::size_t>(lab)]++;
    for (std::size_t r = 0; r < k; ++r)
        if (t.sizes[r] == 0)
            throw input_error("build_target: empty cluster " + std::to_string(r));

    kernels::cluster_means(a, labels, k, nullptr, t.means);
    t.center_matrix = Matrix(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        t.center_matrix.set_row(i, t.means.row(static_cast<std::size_t>(labels[i])));
    return t;
}

SpectralStats spectral_stats(const Matrix& a, const TargetClustering& t) {
    SpectralStats stats;
    Matrix diff = a - t.center_matrix;
    stats.spec_norm = spectral_norm(diff, &stats.spec_norm_converged);
    stats.frob_norm = frobenius_norm(diff);

    const double sqrt_k = std::sqrt(static_cast<double>(t.k));
    const double scale = std::min(sqrt_k * stats.spec_norm, stats.frob_norm);
    stats.delta.resize(t.k);
    for (std::size_t r = 0; r < t.k; ++r)
        stats.delta[r] = scale / std::sqrt(static_cast<double>(t.sizes[r]));
    stats.degenerate =
        stats.frob_norm * stats.frob_norm <
        static_cast<double>(t.k) * stats.spec_norm * stats.spec_norm;

    double c = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.k; ++r) {
        for (std::size_t s = r + 1; s < t.k; ++s) {
            double dist = std::sqrt(kernels::sq_dist(t.means.row(r), t.means.row(s)));
            double denom = stats.delta[r] + stats.delta[s];
            double ratio;
            if (denom > 0.0)
                ratio = dist / denom;
            else
                ratio = dist == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            c = std::min(c, ratio);
        }
    }
    stats.separation_c = c; // k == 1 leaves the +∞ initializer
    return stats;
}

ProximityReport proximity_report(const Matrix& a, const TargetClustering& t, double gamma) {
    if (t.k < 2) throw input_error("proximity_report: needs k >= 2");
    if (!(gamma > 0.0)) throw input_error("proximity_report: gamma must be > 0");

    SpectralStats stats = spectral_stats(a, t);

    ProximityReport rep;
    rep.gamma = gamma;
    rep.gaps = Matrix(t.k, t.k);
    for (std::size_t r = 0; r < t.k; ++r) {
        for (std::size_t s = 0; s < t.k; ++s) {
            if (r == s) continue;
            rep.gaps(r, s) = (1.0 / std::sqrt(static_cast<double>(t.sizes[r])) +
                              1.0 / std::sqrt(static_cast<double>(t.sizes[s]))) *
                             stats.spec_norm;
        }
    }
    for (std::size_t r = 0; r < t.k; ++r)
        for (std::size_t s = r + 1; s < t.k; ++s)
            if (kernels::sq_dist(t.means.row(r), t.means.row(s)) <= 1e-24)
                throw degenerate_line_error("proximity_report: coincident means for pair (" +
                                            std::to_string(r) + "," + std::to_string(s) + ")");

    const std::size_t n = a.rows();
    std::vector<char> bad(n, 0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto s = static_cast<std::size_t>(t.labels[i]);
        for (std::size_t r = 0; r < t.k; ++r) {
            if (r == s) continue;
            auto proj = project_point_onto_line(a.row(i), t.means.row(r), t.means.row(s));
            double to_other = std::sqrt(kernels::sq_dist(proj, t.means.row(r)));
            double to_own = std::sqrt(kernels::sq_dist(proj, t.means.row(s)));
            if (to_other - to_own < gamma * rep.gaps(r, s)) {
                bad[i] = 1;
                break;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (bad[i]) rep.bad_points.push_back(static_cast<int>(i));
    rep.bad_fraction = static_cast<double>(rep.bad_points.size()) / static_cast<double>(n);
    return rep;
}

double kmeans_cost(const Matrix& a, const std::vector<int>& labels, const Matrix& centers) {
    if (!centers.all_finite()) throw input_error("kmeans_cost: non-finite centers");
    if (labels.size() != a.rows()) throw input_error("kmeans_cost: label count != rows");
    return kernels::kmeans_cost(a, labels, centers);
}

} // namespace sepclust
