#include "sepclust/analysis.hpp"

#include "sepclust/errors.hpp"
#include "sepclust/kernels.hpp"
#include "sepclust/linalg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace sepclust {

namespace {

double distance(std::span<const double> x, std::span<const double> y) {
    return std::sqrt(kernels::sq_dist(x, y));
}

std::string pair_context(std::size_t r, std::size_t s) {
    return "r=" + std::to_string(r) + ",s=" + std::to_string(s);
}

std::vector<double> mean_of(const Matrix& a, const std::vector<int>& idx) {
    std::vector<double> m(a.cols(), 0.0);
    for (int i : idx) {
        auto row = a.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < a.cols(); ++j) m[j] += row[j];
    }
    if (!idx.empty())
        for (double& v : m) v /= static_cast<double>(idx.size());
    return m;
}

// Misclassification table of a found labeling against the target, after
// matching found centers to target means.
struct MisTable {
    CenterMatching matching;
    std::vector<int> per_source;      // i∈T_s with found ≠ match(s)
    std::vector<int> per_destination; // i∉T_r with found = match(r)
    int total = 0;
};

MisTable misclassification_table(const TargetClustering& t, const std::vector<int>& found_labels,
                                 const Matrix& found_centers) {
    MisTable table;
    table.matching = match_centers(t.means, found_centers);
    table.per_source.assign(t.k, 0);
    table.per_destination.assign(t.k, 0);
    std::vector<int> inverse(t.k, -1); // found index -> target cluster
    for (std::size_t r = 0; r < t.k; ++r) inverse[static_cast<std::size_t>(table.matching.permutation[r])] = static_cast<int>(r);
    for (std::size_t i = 0; i < t.labels.size(); ++i) {
        const auto s = static_cast<std::size_t>(t.labels[i]);
        const int found = found_labels[i];
        if (found != table.matching.permutation[s]) {
            table.per_source[s]++;
            table.total++;
            int dest = inverse[static_cast<std::size_t>(found)];
            if (dest >= 0) table.per_destination[static_cast<std::size_t>(dest)]++;
        }
    }
    return table;
}

double second_largest_size(const TargetClustering& t) {
    std::vector<std::size_t> sizes = t.sizes;
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    return static_cast<double>(sizes.size() > 1 ? sizes[1] : sizes[0]);
}

double found_means_cost(const Matrix& a, const std::vector<int>& found_labels, const Matrix& found_centers) {
    Matrix means;
    kernels::cluster_means(a, found_labels, found_centers.rows(), &found_centers, means);
    return kernels::kmeans_cost(a, found_labels, means);
}

} // namespace

InequalityCheck make_check(std::string fact_id, double lhs, double rhs, std::string context) {
    InequalityCheck check;
    check.fact_id = std::move(fact_id);
    check.lhs = lhs;
    check.rhs = rhs;
    double slack = 1e-9 * std::max(std::abs(lhs), std::isfinite(rhs) ? std::abs(rhs) : 0.0);
    check.holds = lhs <= rhs + slack;
    check.context = std::move(context);
    return check;
}

CenterMatching match_centers(const Matrix& target_means, const Matrix& found_centers) {
    const std::size_t k = target_means.rows();
    if (found_centers.rows() != k)
        throw input_error("match_centers: center counts differ");
    if (k > 20) throw input_error("match_centers: k > 20 unsupported");

    Matrix cost(k, k);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t j = 0; j < k; ++j)
            cost(r, j) = distance(target_means.row(r), found_centers.row(j));

    // Exact assignment by subset DP: dp[mask] = min cost of matching the
    // first popcount(mask) targets to the found centers in mask.
    const std::size_t full = (std::size_t{1} << k) - 1;
    std::vector<double> dp(full + 1, std::numeric_limits<double>::infinity());
    std::vector<int> choice(full + 1, -1);
    dp[0] = 0.0;
    for (std::size_t mask = 1; mask <= full; ++mask) {
        const auto r = static_cast<std::size_t>(std::popcount(mask)) - 1;
        for (std::size_t j = 0; j < k; ++j) {
            if (!(mask & (std::size_t{1} << j))) continue;
            double cand = dp[mask ^ (std::size_t{1} << j)] + cost(r, j);
            if (cand < dp[mask]) {
                dp[mask] = cand;
                choice[mask] = static_cast<int>(j);
            }
        }
    }

    CenterMatching out;
    out.permutation.assign(k, -1);
    out.distances.assign(k, 0.0);
    std::size_t mask = full;
    for (std::size_t r = k; r-- > 0;) {
        int j = choice[mask];
        out.permutation[r] = j;
        out.distances[r] = cost(r, static_cast<std::size_t>(j));
        mask ^= std::size_t{1} << static_cast<std::size_t>(j);
    }
    out.total_distance = kernels::sum_fixed_order(out.distances);
    return out;
}

EvaluationReport evaluate(const Matrix& a, const TargetClustering& t,
                          const std::vector<int>& found_labels, const Matrix& found_centers) {
    if (found_labels.size() != a.rows()) throw input_error("evaluate: label count != rows");
    for (int lab : found_labels)
        if (lab < 0 || static_cast<std::size_t>(lab) >= found_centers.rows())
            throw input_error("evaluate: found label out of range");

    EvaluationReport rep;
    MisTable table = misclassification_table(t, found_labels, found_centers);
    rep.matching = std::move(table.matching);
    rep.per_cluster_misclassified = std::move(table.per_source);
    rep.total_misclassified = table.total;

    double denom = kernels::frobenius_sq(a - t.center_matrix);
    double cost = found_means_cost(a, found_labels, found_centers);
    if (denom == 0.0)
        rep.cost_ratio = cost == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    else
        rep.cost_ratio = cost / denom;
    return rep;
}

InequalityCheck check_projection_cost(const Matrix& a, const TargetClustering& t,
                                      const SpectralStats& stats) {
    SvdResult svd = truncated_svd(a, t.k);
    Matrix projected = project_rows(a, svd.right);
    double lhs = kernels::frobenius_sq(projected - t.center_matrix);
    double spec_sq = stats.spec_norm * stats.spec_norm;
    double rhs = 8.0 * std::min(static_cast<double>(t.k) * spec_sq,
                                stats.frob_norm * stats.frob_norm);
    return make_check("projection_cost", lhs, rhs, "k=" + std::to_string(t.k));
}

std::vector<InequalityCheck> check_matched_center_distance(const TargetClustering& t,
                                                           const SpectralStats& stats,
                                                           const Matrix& nu) {
    CenterMatching matching = match_centers(t.means, nu);
    std::vector<InequalityCheck> checks;
    checks.reserve(t.k);
    for (std::size_t r = 0; r < t.k; ++r)
        checks.push_back(make_check("center_match", matching.distances[r], 6.0 * stats.delta[r],
                                    "r=" + std::to_string(r)));
    return checks;
}

std::vector<InequalityCheck> check_projection_misclassification(const TargetClustering& t,
                                                                const SpectralStats& stats,
                                                                const std::vector<int>& z_labels,
                                                                const Matrix& nu) {
    MisTable table = misclassification_table(t, z_labels, nu);
    const double c = stats.separation_c;
    const double factor = std::isinf(c) ? 0.0 : 128.0 / (c * c);

    std::vector<InequalityCheck> checks;
    for (std::size_t s = 0; s < t.k; ++s)
        checks.push_back(make_check("source_misclassification",
                                    static_cast<double>(table.per_source[s]),
                                    factor * static_cast<double>(t.sizes[s]),
                                    "s=" + std::to_string(s)));
    for (std::size_t r = 0; r < t.k; ++r)
        checks.push_back(make_check("destination_misclassification",
                                    static_cast<double>(table.per_destination[r]),
                                    factor * static_cast<double>(t.sizes[r]),
                                    "r=" + std::to_string(r)));
    checks.push_back(make_check("total_misclassification", static_cast<double>(table.total),
                                factor * second_largest_size(t), "total"));
    return checks;
}

InequalityCheck check_projection_cost_ratio(const Matrix& a, const TargetClustering& t,
                                            const SpectralStats& stats,
                                            const std::vector<int>& z_labels, const Matrix& nu) {
    EvaluationReport rep = evaluate(a, t, z_labels, nu);
    const double c = stats.separation_c;
    double rhs = std::isinf(c) ? 1.0 : 1.0 + 49.0 / c;
    return make_check("projection_cost_ratio", rep.cost_ratio, rhs, "");
}

InequalityCheck check_perturbed_mean_shift(const Matrix& a, const TargetClustering& t,
                                           const SpectralStats& stats, std::size_t r,
                                           const std::vector<int>& removed,
                                           const std::vector<std::vector<int>>& added) {
    if (r >= t.k) throw input_error("check_perturbed_mean_shift: bad cluster index");
    if (added.size() != t.k) throw input_error("check_perturbed_mean_shift: added needs k lists");
    const double n_r = static_cast<double>(t.sizes[r]);

    for (int i : removed)
        if (static_cast<std::size_t>(t.labels[static_cast<std::size_t>(i)]) != r)
            throw input_error("check_perturbed_mean_shift: removed point not in cluster r");
    double rho_out = static_cast<double>(removed.size()) / n_r;
    if (rho_out >= 0.25) throw input_error("check_perturbed_mean_shift: rho_out must be < 1/4");

    double rho_in = 0.0, root_sum = 0.0;
    for (std::size_t s = 0; s < t.k; ++s) {
        if (s == r) {
            if (!added[s].empty())
                throw input_error("check_perturbed_mean_shift: cannot add points of r itself");
            continue;
        }
        for (int i : added[s]) {
            const auto ii = static_cast<std::size_t>(i);
            if (static_cast<std::size_t>(t.labels[ii]) != s)
                throw input_error("check_perturbed_mean_shift: added point not in its cluster");
            double to_own = distance(a.row(ii), t.means.row(s));
            double to_r = distance(a.row(ii), t.means.row(r));
            if (to_own < (2.0 / 3.0) * to_r - 1e-12 * std::max(to_own, to_r))
                throw input_error("check_perturbed_mean_shift: added point violates "
                                  "the 2/3 distance precondition");
        }
        double rho_s = static_cast<double>(added[s].size()) / n_r;
        rho_in += rho_s;
        root_sum += std::sqrt(rho_s);
    }
    if (rho_in >= 0.25) throw input_error("check_perturbed_mean_shift: rho_in must be < 1/4");

    std::vector<int> members;
    std::vector<char> dropped(t.labels.size(), 0);
    for (int i : removed) dropped[static_cast<std::size_t>(i)] = 1;
    for (std::size_t i = 0; i < t.labels.size(); ++i)
        if (static_cast<std::size_t>(t.labels[i]) == r && !dropped[i])
            members.push_back(static_cast<int>(i));
    for (std::size_t s = 0; s < t.k; ++s)
        for (int i : added[s]) members.push_back(i);
    if (members.empty())
        throw input_error("check_perturbed_mean_shift: perturbed set is empty");

    double lhs = distance(mean_of(a, members), t.means.row(r));
    double rhs = (std::sqrt(rho_out) + 1.5 * root_sum) * stats.spec_norm / std::sqrt(n_r);
    return make_check("perturbed_mean", lhs, rhs,
                      "r=" + std::to_string(r) + ",out=" + std::to_string(removed.size()));
}

std::vector<InequalityCheck> check_subset_mean(const Matrix& cluster_rows,
                                               const std::vector<int>& subset) {
    const std::size_t nr = cluster_rows.rows();
    std::vector<int> all(nr);
    std::iota(all.begin(), all.end(), 0);
    std::vector<double> mu = mean_of(cluster_rows, all);

    std::vector<char> in_subset(nr, 0);
    for (int i : subset) {
        if (i < 0 || static_cast<std::size_t>(i) >= nr)
            throw input_error("check_subset_mean: index out of range");
        in_subset[static_cast<std::size_t>(i)] = 1;
    }
    std::vector<int> complement;
    for (std::size_t i = 0; i < nr; ++i)
        if (!in_subset[i]) complement.push_back(static_cast<int>(i));

    Matrix centered = cluster_rows;
    for (std::size_t i = 0; i < nr; ++i) {
        auto row = centered.row(i);
        for (std::size_t j = 0; j < centered.cols(); ++j) row[j] -= mu[j];
    }
    double cluster_norm = spectral_norm(centered);

    const double x_size = static_cast<double>(subset.size());
    double shift_x = subset.empty() ? 0.0 : distance(mean_of(cluster_rows, subset), mu);
    double shift_c = complement.empty() ? 0.0 : distance(mean_of(cluster_rows, complement), mu);
    double lhs = x_size * shift_x;
    double balance = static_cast<double>(complement.size()) * shift_c;

    std::string ctx = "|X|=" + std::to_string(subset.size());
    return {make_check("subset_mean_bound", lhs, std::sqrt(x_size) * cluster_norm, ctx),
            make_check("subset_mean_balance_le", lhs, balance, ctx),
            make_check("subset_mean_balance_ge", balance, lhs, ctx)};
}

std::vector<InequalityCheck> check_core_coverage(const TargetClustering& t,
                                                 const SpectralStats& stats,
                                                 const std::vector<std::vector<int>>& core_sets,
                                                 const Matrix& nu) {
    const double c = stats.separation_c;
    const double factor = std::isinf(c) ? 0.0 : 512.0 / (c * c);
    CenterMatching matching = match_centers(t.means, nu);
    std::vector<InequalityCheck> checks;
    for (std::size_t r = 0; r < t.k; ++r) {
        const auto found = static_cast<std::size_t>(matching.permutation[r]);
        std::size_t own = 0;
        for (int i : core_sets[found])
            if (static_cast<std::size_t>(t.labels[static_cast<std::size_t>(i)]) == r) own++;
        double lhs = static_cast<double>(t.sizes[r] - own);
        checks.push_back(make_check("core_coverage", lhs,
                                    factor * static_cast<double>(t.sizes[r]),
                                    "r=" + std::to_string(r)));
    }
    return checks;
}

std::vector<InequalityCheck> check_core_leakage(const TargetClustering& t,
                                                const SpectralStats& stats,
                                                const std::vector<std::vector<int>>& core_sets,
                                                const Matrix& nu) {
    const double c = stats.separation_c;
    const double kk = static_cast<double>(t.k) * static_cast<double>(t.k);
    const double factor = std::isinf(c) ? 0.0 : 2304.0 / (c * c * c * c * kk);
    CenterMatching matching = match_centers(t.means, nu);
    std::vector<InequalityCheck> checks;
    for (std::size_t r = 0; r < t.k; ++r) {
        const auto found = static_cast<std::size_t>(matching.permutation[r]);
        std::vector<std::size_t> from(t.k, 0);
        for (int i : core_sets[found])
            from[static_cast<std::size_t>(t.labels[static_cast<std::size_t>(i)])]++;
        for (std::size_t s = 0; s < t.k; ++s) {
            if (s == r) continue;
            checks.push_back(make_check("core_leakage", static_cast<double>(from[s]),
                                        factor * static_cast<double>(t.sizes[r]) + 1.0,
                                        pair_context(r, s)));
        }
    }
    return checks;
}

std::vector<InequalityCheck> check_refined_center_distance(const TargetClustering& t,
                                                           const SpectralStats& stats,
                                                           const Matrix& theta, const Matrix& nu,
                                                           double factor) {
    const double c = stats.separation_c;
    CenterMatching matching = match_centers(t.means, nu);
    std::vector<InequalityCheck> checks;
    for (std::size_t r = 0; r < t.k; ++r) {
        const auto found = static_cast<std::size_t>(matching.permutation[r]);
        double lhs = distance(theta.row(found), t.means.row(r));
        double rhs = std::isinf(c)
                         ? 0.0
                         : (factor / c) * stats.spec_norm /
                               std::sqrt(static_cast<double>(t.sizes[r]));
        checks.push_back(make_check("refined_center", lhs, rhs, "r=" + std::to_string(r)));
    }
    return checks;
}

InequalityCheck check_line_margin_count(const Matrix& a, const TargetClustering& t,
                                        const SpectralStats& stats, std::size_t r, std::size_t s,
                                        std::span<const double> zeta_r,
                                        std::span<const double> zeta_s, double alpha,
                                        double beta) {
    if (r >= t.k || s >= t.k || r == s)
        throw input_error("check_line_margin_count: bad cluster pair");
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw input_error("check_line_margin_count: alpha and beta must be > 0");
    double drift_r = distance(zeta_r, t.means.row(r));
    double drift_s = distance(zeta_s, t.means.row(s));
    double slack_r = alpha * stats.delta[r], slack_s = alpha * stats.delta[s];
    if (drift_r > slack_r * (1.0 + 1e-9) || drift_s > slack_s * (1.0 + 1e-9))
        throw input_error("check_line_margin_count: zeta farther than alpha*delta from mean");
    double zeta_gap = distance(zeta_r, zeta_s);
    if (zeta_gap <= 1e-12)
        throw degenerate_line_error("check_line_margin_count: zeta_r == zeta_s");

    std::size_t count = 0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        if (static_cast<std::size_t>(t.labels[i]) != s) continue;
        auto proj = project_point_onto_line(a.row(i), zeta_r, zeta_s);
        double margin = distance(proj, zeta_s) - distance(proj, zeta_r);
        if (margin >= beta * zeta_gap) count++;
    }

    const double c = stats.separation_c;
    double min_size = static_cast<double>(std::min(t.sizes[r], t.sizes[s]));
    double bound = std::isinf(c) ? 0.0
                                 : 256.0 * alpha * alpha / (beta * beta) /
                                       (c * c * c * c * static_cast<double>(t.k)) * min_size;
    return make_check("line_margin_count", static_cast<double>(count), bound + 1.0,
                      pair_context(r, s) + ",alpha=" + std::to_string(alpha) +
                          ",beta=" + std::to_string(beta));
}

InequalityCheck check_core_exclusion(const Matrix& projected, const TargetClustering& t,
                                     const Matrix& nu, const Matrix& mu_hat) {
    const std::size_t n = projected.rows(), k = nu.rows();
    // Recompute the core sets from the same 1/3 rule the pipeline uses.
    Matrix dist_sq(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < k; ++r)
            dist_sq(i, r) = kernels::sq_dist(projected.row(i), nu.row(r));
    std::vector<int> core_of(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < k; ++r) {
            bool in_core = true;
            for (std::size_t s = 0; s < k && in_core; ++s)
                if (s != r && 9.0 * dist_sq(i, r) > dist_sq(i, s)) in_core = false;
            if (in_core) {
                core_of[i] = static_cast<int>(r);
                break;
            }
        }
    }

    // Core sets are indexed by found center; translate target clusters
    // through the minimum-distance matching.
    CenterMatching matching = match_centers(t.means, nu);
    std::size_t violations = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = static_cast<std::size_t>(t.labels[i]);
        double to_own = distance(projected.row(i), mu_hat.row(s));
        for (std::size_t r = 0; r < k; ++r) {
            if (r == s) continue;
            if (to_own <= 2.0 * distance(projected.row(i), mu_hat.row(r)) &&
                core_of[i] == matching.permutation[r])
                violations++;
        }
    }
    return make_check("core_exclusion", static_cast<double>(violations), 0.0, "");
}

std::vector<InequalityCheck> check_projected_mean_drift(const Matrix& a,
                                                        const TargetClustering& t,
                                                        const SpectralStats& stats) {
    SvdResult svd = truncated_svd(a, t.k);
    Matrix mu_hat = project_rows(t.means, svd.right);
    std::vector<InequalityCheck> checks;
    for (std::size_t r = 0; r < t.k; ++r) {
        double lhs = distance(mu_hat.row(r), t.means.row(r));
        double rhs = stats.spec_norm / std::sqrt(static_cast<double>(t.sizes[r]));
        checks.push_back(make_check("projected_mean_drift", lhs, rhs, "r=" + std::to_string(r)));
    }
    return checks;
}

std::vector<InequalityCheck> check_good_point_misclassification(const Matrix& a,
                                                                const TargetClustering& t,
                                                                const SpectralStats& stats,
                                                                const Matrix& theta, double gamma,
                                                                double kappa_a) {
    ProximityReport prox = proximity_report(a, t, gamma);
    const double n = static_cast<double>(a.rows());
    const double c = stats.separation_c;
    const double sqrt_k = std::sqrt(static_cast<double>(t.k));

    std::vector<int> labels;
    std::vector<double> best;
    kernels::assign_nearest(a, theta, labels, best);
    MisTable table = misclassification_table(t, labels, theta);

    double c4 = std::isinf(c) ? std::numeric_limits<double>::infinity() : c * c * c * c;
    double rhs_a = prox.bad_fraction * n +
                   (std::isinf(c4) ? 0.0 : kappa_a * n / (gamma * gamma * c4));
    std::vector<InequalityCheck> checks;
    checks.push_back(make_check("good_miss_count", static_cast<double>(table.total), rhs_a,
                                "gamma=" + std::to_string(gamma)));

    if (!std::isinf(c) && gamma < c * sqrt_k) {
        double ratio = sqrt_k / (c * sqrt_k - gamma);
        checks.push_back(make_check("bad_fraction_bound", prox.bad_fraction, 32.0 * ratio * ratio,
                                    "gamma=" + std::to_string(gamma)));
    } else if (std::isinf(c)) {
        checks.push_back(
            make_check("bad_fraction_bound", prox.bad_fraction, 0.0, "separation=inf"));
    }
    return checks;
}

} // namespace sepclust
