#include "sepclust/analysis.hpp"
#include "sepclust/cluster.hpp"
#include "sepclust/errors.hpp"
#include "sepclust/generators.hpp"
#include "sepclust/kernels.hpp"
#include "sepclust/linalg.hpp"
#include "sepclust/model.hpp"
#include "sepclust/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace sepclust;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, d);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

struct SeparatedInstance {
    Matrix data;
    TargetClustering target;
    SpectralStats stats;
};

SeparatedInstance separated_gaussian(std::size_t k, std::size_t d, std::size_t n,
                                     double target_c, std::uint64_t seed) {
    std::vector<double> weights(k, 1.0 / static_cast<double>(k));
    PlacedMeans placed = place_separated_means(k, d, target_c, 1.0, weights, n, seed);
    MixtureSpec spec{k, d, n, weights, placed.means, std::vector<double>(k, 1.0)};
    GeneratedInstance gen = gen_gaussian_mixture(spec, derive_seed(seed, 99));
    SeparatedInstance out;
    out.stats = spectral_stats(gen.data, gen.target);
    out.data = std::move(gen.data);
    out.target = std::move(gen.target);
    return out;
}

double total_permutation_cost(const Matrix& a, const Matrix& b, const std::vector<int>& perm) {
    double total = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        total += std::sqrt(kernels::sq_dist(a.row(r), b.row(static_cast<std::size_t>(perm[r]))));
    return total;
}

} // namespace

TEST_CASE("match_centers: identity and reversal") {
    Matrix means = random_matrix(4, 3, 1);
    CenterMatching same = match_centers(means, means);
    CHECK(same.permutation == std::vector<int>{0, 1, 2, 3});
    CHECK(same.total_distance == 0.0);

    Matrix reversed(4, 3);
    for (std::size_t r = 0; r < 4; ++r) reversed.set_row(r, means.row(3 - r));
    CenterMatching rev = match_centers(means, reversed);
    CHECK(rev.permutation == std::vector<int>{3, 2, 1, 0});
    CHECK(rev.total_distance <= 1e-12);
}

TEST_CASE("match_centers agrees with brute-force permutation enumeration") {
    for (std::size_t k = 2; k <= 5; ++k) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Matrix target = random_matrix(k, 4, seed * 31 + k);
            Matrix found = random_matrix(k, 4, seed * 57 + k + 1);
            CenterMatching got = match_centers(target, found);

            std::vector<int> perm(k);
            std::iota(perm.begin(), perm.end(), 0);
            double best = std::numeric_limits<double>::infinity();
            do {
                best = std::min(best, total_permutation_cost(target, found, perm));
            } while (std::next_permutation(perm.begin(), perm.end()));
            CHECK(got.total_distance == doctest::Approx(best).epsilon(1e-10));
        }
    }
}

TEST_CASE("match_centers total never exceeds the identity assignment") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Matrix target = random_matrix(5, 3, seed);
        Matrix found = random_matrix(5, 3, seed + 1000);
        CenterMatching got = match_centers(target, found);
        std::vector<int> identity(5);
        std::iota(identity.begin(), identity.end(), 0);
        CHECK(got.total_distance <=
              total_permutation_cost(target, found, identity) * (1.0 + 1e-12));
    }
}

TEST_CASE("match_centers rejects mismatched counts") {
    CHECK_THROWS_AS(match_centers(random_matrix(3, 2, 1), random_matrix(4, 2, 2)), input_error);
}

TEST_CASE("evaluate: perfect found clustering") {
    SeparatedInstance inst = separated_gaussian(3, 8, 150, 30.0, 3);
    EvaluationReport rep = evaluate(inst.data, inst.target, inst.target.labels,
                                    inst.target.means);
    CHECK(rep.total_misclassified == 0);
    CHECK(rep.cost_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluate counts a single flipped point") {
    SeparatedInstance inst = separated_gaussian(2, 6, 80, 25.0, 5);
    std::vector<int> flipped = inst.target.labels;
    flipped[3] = 1 - flipped[3];
    EvaluationReport rep = evaluate(inst.data, inst.target, flipped, inst.target.means);
    CHECK(rep.total_misclassified == 1);
}

TEST_CASE("evaluate is invariant under consistent relabeling") {
    SeparatedInstance inst = separated_gaussian(3, 8, 150, 30.0, 7);
    ClusterRunResult run = cluster(inst.data, 3, {.seed = 1});
    EvaluationReport direct = evaluate(inst.data, inst.target, run.final_labels,
                                       run.final_centers);

    // swap found clusters 0 and 1 everywhere
    std::vector<int> relabeled = run.final_labels;
    for (int& lab : relabeled) lab = lab == 0 ? 1 : (lab == 1 ? 0 : lab);
    Matrix centers = run.final_centers;
    Matrix swapped = centers;
    swapped.set_row(0, centers.row(1));
    swapped.set_row(1, centers.row(0));
    EvaluationReport renamed = evaluate(inst.data, inst.target, relabeled, swapped);
    CHECK(renamed.total_misclassified == direct.total_misclassified);
    CHECK(renamed.cost_ratio == doctest::Approx(direct.cost_ratio).epsilon(1e-12));
    CHECK(renamed.per_cluster_misclassified == direct.per_cluster_misclassified);
}

TEST_CASE("projection cost bound holds on zero-variance and random instances") {
    // A = C
    Matrix a = Matrix::from_rows({{0.0, 0.0}, {0.0, 0.0}, {4.0, 0.0}, {4.0, 0.0}});
    TargetClustering t = build_target(a, {0, 0, 1, 1});
    SpectralStats stats = spectral_stats(a, t);
    InequalityCheck check = check_projection_cost(a, t, stats);
    CHECK(check.holds);
    CHECK(check.lhs <= 1e-18);

    // rank-k dataset with cluster-mean centers: lhs finite, bound above it
    SeparatedInstance inst = separated_gaussian(3, 10, 200, 10.0, 11);
    InequalityCheck rank_check =
        check_projection_cost(inst.data, inst.target, inst.stats);
    CHECK(rank_check.holds);
    CHECK(rank_check.lhs > 0.0);
}

TEST_CASE("projection cost bound sweep: randomized targets, zero failures") {
    Rng rng(13);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t k = 2 + trial % 5;
        const std::size_t n = 40 + 10 * (trial % 5);
        Matrix a = random_matrix(n, 6 + trial % 4, rng.next_u64());
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i)
            labels[i] = static_cast<int>(i % k); // every cluster non-empty
        TargetClustering t = build_target(a, labels);
        SpectralStats stats = spectral_stats(a, t);
        CHECK(check_projection_cost(a, t, stats).holds);
    }
}

TEST_CASE("matched center distances: exact centers give zero distance") {
    SeparatedInstance inst = separated_gaussian(3, 8, 150, 40.0, 17);
    auto checks = check_matched_center_distance(inst.target, inst.stats, inst.target.means);
    for (const auto& check : checks) {
        CHECK(check.holds);
        CHECK(check.lhs == 0.0);
    }
}

TEST_CASE("perturbed mean shift: no move gives 0 <= 0") {
    SeparatedInstance inst = separated_gaussian(2, 6, 100, 25.0, 19);
    InequalityCheck check = check_perturbed_mean_shift(inst.data, inst.target, inst.stats, 0,
                                                       {}, {{}, {}});
    CHECK(check.holds);
    CHECK(check.lhs == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("perturbed mean shift holds over random legal perturbations") {
    SeparatedInstance inst = separated_gaussian(3, 8, 300, 40.0, 23);
    Rng rng(24);
    std::vector<std::vector<int>> by_cluster(3);
    for (std::size_t i = 0; i < inst.data.rows(); ++i)
        by_cluster[static_cast<std::size_t>(inst.target.labels[i])].push_back(
            static_cast<int>(i));

    int tried = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t r = rng.below(3);
        // remove up to 1/5 of r's own points
        std::vector<int> removed;
        for (int i : by_cluster[r])
            if (rng.uniform() < 0.15) removed.push_back(i);
        if (static_cast<double>(removed.size()) >=
            0.25 * static_cast<double>(inst.target.sizes[r]))
            continue;

        // add far points of other clusters (those safely past the 2/3 rule)
        std::vector<std::vector<int>> added(3);
        bool legal = true;
        std::size_t total_added = 0;
        for (std::size_t s = 0; s < 3 && legal; ++s) {
            if (s == r) continue;
            for (int i : by_cluster[s]) {
                if (rng.uniform() > 0.02) continue;
                const auto ii = static_cast<std::size_t>(i);
                double to_own = std::sqrt(kernels::sq_dist(inst.data.row(ii),
                                                           inst.target.means.row(s)));
                double to_r = std::sqrt(kernels::sq_dist(inst.data.row(ii),
                                                         inst.target.means.row(r)));
                if (to_own < (2.0 / 3.0) * to_r) continue; // keep the precondition
                added[s].push_back(i);
                total_added++;
            }
        }
        if (!legal || static_cast<double>(total_added) >=
                          0.25 * static_cast<double>(inst.target.sizes[r]))
            continue;
        tried++;
        InequalityCheck check = check_perturbed_mean_shift(inst.data, inst.target, inst.stats,
                                                           r, removed, added);
        CHECK(check.holds);
    }
    CHECK(tried >= 100);
}

TEST_CASE("perturbed mean shift rejects precondition violations") {
    SeparatedInstance inst = separated_gaussian(2, 6, 100, 25.0, 29);
    // removing half the cluster breaks rho_out < 1/4
    std::vector<int> removed;
    for (std::size_t i = 0; i < inst.data.rows(); ++i)
        if (inst.target.labels[i] == 0 && removed.size() < inst.target.sizes[0] / 2)
            removed.push_back(static_cast<int>(i));
    CHECK_THROWS_AS(
        check_perturbed_mean_shift(inst.data, inst.target, inst.stats, 0, removed, {{}, {}}),
        input_error);
}

TEST_CASE("subset mean: X = T_r gives zeros on both sides") {
    Matrix rows = random_matrix(8, 3, 31);
    std::vector<int> all(8);
    std::iota(all.begin(), all.end(), 0);
    auto checks = check_subset_mean(rows, all);
    for (const auto& check : checks) CHECK(check.holds);
    CHECK(checks[1].lhs == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("subset mean: singleton subsets") {
    Matrix rows = random_matrix(6, 4, 37);
    for (int i = 0; i < 6; ++i) {
        auto checks = check_subset_mean(rows, {i});
        for (const auto& check : checks) CHECK(check.holds);
    }
}

TEST_CASE("subset mean: exhaustive over all subsets of an 8-point cluster") {
    Matrix rows = random_matrix(8, 3, 41);
    for (std::size_t mask = 0; mask < 256; ++mask) {
        std::vector<int> subset;
        for (int b = 0; b < 8; ++b)
            if (mask & (1u << b)) subset.push_back(b);
        auto checks = check_subset_mean(rows, subset);
        for (const auto& check : checks) {
            CAPTURE(mask);
            CHECK(check.holds);
        }
    }
}

TEST_CASE("line margin count: zero-variance clusters with exact centers give |X| = 0") {
    Matrix a = Matrix::from_rows({{0.0, 0.0}, {0.0, 0.0}, {9.0, 0.0}, {9.0, 0.0}});
    TargetClustering t = build_target(a, {0, 0, 1, 1});
    SpectralStats stats = spectral_stats(a, t);
    InequalityCheck check = check_line_margin_count(a, t, stats, 0, 1, t.means.row(0),
                                                    t.means.row(1), 1.0, 1.0 / 3.0);
    CHECK(check.lhs == 0.0);
    CHECK(check.holds);
}

TEST_CASE("line margin count with projected means at beta = 1/3") {
    SeparatedInstance inst = separated_gaussian(4, 16, 600, 100.0, 43);
    REQUIRE(!inst.stats.degenerate);
    SvdResult svd = truncated_svd(inst.data, 4);
    Matrix mu_hat = project_rows(inst.target.means, svd.right);

    const double sqrt_k = 2.0;
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t s = 0; s < 4; ++s) {
            if (r == s) continue;
            InequalityCheck check =
                check_line_margin_count(inst.data, inst.target, inst.stats, r, s,
                                        mu_hat.row(r), mu_hat.row(s), 1.0 / sqrt_k, 1.0 / 3.0);
            CHECK(check.holds);
        }
    }
}

TEST_CASE("line margin count sweeps alpha and beta grids") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        SeparatedInstance inst = separated_gaussian(3, 10, 240, 80.0, 100 + seed);
        Rng rng(seed);
        const double sqrt_k = std::sqrt(3.0);
        for (double alpha : {0.1, 0.5, 1.0 / sqrt_k}) {
            for (double beta : {1.0 / 3.0, 1.0}) {
                std::size_t r = rng.below(3), s = (r + 1 + rng.below(2)) % 3;
                std::vector<double> zr(inst.target.means.row(r).begin(),
                                       inst.target.means.row(r).end());
                std::vector<double> zs(inst.target.means.row(s).begin(),
                                       inst.target.means.row(s).end());
                // push ζ to the edge of the allowed alpha ball
                std::vector<double> dir(10);
                for (double& v : dir) v = rng.normal();
                double norm = std::sqrt(kernels::dot(dir, dir));
                for (std::size_t j = 0; j < 10; ++j) {
                    zr[j] += 0.999 * alpha * inst.stats.delta[r] * dir[j] / norm;
                    zs[j] -= 0.999 * alpha * inst.stats.delta[s] * dir[j] / norm;
                }
                InequalityCheck check = check_line_margin_count(inst.data, inst.target,
                                                                inst.stats, r, s, zr, zs,
                                                                alpha, beta);
                CHECK(check.holds);
            }
        }
    }
}

TEST_CASE("line margin count rejects zeta violating the alpha ball") {
    SeparatedInstance inst = separated_gaussian(2, 6, 100, 30.0, 51);
    std::vector<double> far(6, 1e6);
    CHECK_THROWS_AS(check_line_margin_count(inst.data, inst.target, inst.stats, 0, 1, far,
                                            inst.target.means.row(1), 0.5, 1.0 / 3.0),
                    input_error);
    CHECK_THROWS_AS(check_line_margin_count(inst.data, inst.target, inst.stats, 0, 1,
                                            inst.target.means.row(0), inst.target.means.row(0),
                                            1e9, 1.0 / 3.0),
                    degenerate_line_error);
}

TEST_CASE("refined-center check flags centers pushed past the bound") {
    SeparatedInstance inst = separated_gaussian(3, 8, 240, 60.0, 71);
    ClusterRunResult run = cluster(inst.data, 3, {.seed = 9, .run_part3 = false});
    auto clean = check_refined_center_distance(inst.target, inst.stats, run.theta, run.nu);
    for (const auto& check : clean) CHECK(check.holds);

    Matrix pushed = run.theta;
    const double c = inst.stats.separation_c;
    double shove = 2.0 * (100.0 / c) * inst.stats.spec_norm /
                   std::sqrt(static_cast<double>(inst.target.sizes[0]));
    pushed(0, 0) += shove;
    auto flagged = check_refined_center_distance(inst.target, inst.stats, pushed, run.nu);
    CHECK(std::any_of(flagged.begin(), flagged.end(),
                      [](const InequalityCheck& check) { return !check.holds; }));
}

TEST_CASE("core exclusion holds on separated instances") {
    SeparatedInstance inst = separated_gaussian(3, 12, 400, 100.0, 53);
    REQUIRE(inst.stats.separation_c > 60.0);
    ClusterRunResult run = cluster(inst.data, 3, {.seed = 8});
    SvdResult svd = truncated_svd(inst.data, 3);
    Matrix mu_hat = project_rows(inst.target.means, svd.right);
    InequalityCheck check = check_core_exclusion(run.projected, inst.target, run.nu, mu_hat);
    CHECK(check.holds);
    CHECK(check.lhs == 0.0);
}

TEST_CASE("core exclusion also holds on a condition-satisfying planted partition") {
    PlantedPartitionSpec spec;
    spec.sizes = {500, 500, 500, 500};
    spec.probabilities = Matrix(4, 4, 0.1);
    for (std::size_t r = 0; r < 4; ++r) spec.probabilities(r, r) = 0.5;
    PlantedInstance inst = gen_planted_partition(spec, 905);
    REQUIRE(inst.report.min_ratio >= 1.0);
    ClusterRunResult run = cluster(inst.data, 4, {.seed = 1, .run_part3 = false});
    SvdResult svd = truncated_svd(inst.data, 4);
    Matrix mu_hat = project_rows(inst.target.means, svd.right);
    InequalityCheck check = check_core_exclusion(run.projected, inst.target, run.nu, mu_hat);
    CHECK(check.holds);
    CHECK(check.lhs == 0.0);
}

TEST_CASE("projected mean drift bound") {
    // rank <= k data: projection is exact, drift 0
    std::vector<int> labels;
    Matrix a(12, 6);
    for (std::size_t i = 0; i < 12; ++i) {
        const std::size_t r = i / 6;
        labels.push_back(static_cast<int>(r));
        a(i, r) = 5.0;
    }
    TargetClustering t = build_target(a, labels);
    SpectralStats stats = spectral_stats(a, t);
    for (const auto& check : check_projected_mean_drift(a, t, stats)) {
        CHECK(check.holds);
        CHECK(check.lhs <= 1e-9);
    }

    SeparatedInstance inst = separated_gaussian(3, 10, 300, 30.0, 59);
    for (const auto& check : check_projected_mean_drift(inst.data, inst.target, inst.stats))
        CHECK(check.holds);

    // planted partition variant (the bound needs only rank(C) <= k)
    PlantedPartitionSpec spec;
    spec.sizes = {120, 80};
    spec.probabilities = Matrix::from_rows({{0.6, 0.1}, {0.1, 0.5}});
    PlantedInstance planted = gen_planted_partition(spec, 77);
    SpectralStats pstats = spectral_stats(planted.data, planted.target);
    for (const auto& check : check_projected_mean_drift(planted.data, planted.target, pstats))
        CHECK(check.holds);
}

TEST_CASE("evaluate reports an infinite cost ratio for nonzero cost over a zero target") {
    Matrix a = Matrix::from_rows({{0.0}, {0.0}, {5.0}, {5.0}});
    TargetClustering t = build_target(a, {0, 0, 1, 1}); // A == C
    // merge everything into found cluster 0: positive found cost, zero target
    Matrix centers = Matrix::from_rows({{2.5}, {100.0}});
    EvaluationReport rep = evaluate(a, t, {0, 0, 0, 0}, centers);
    CHECK(std::isinf(rep.cost_ratio));
}

TEST_CASE("good-point misclassification bounds at gamma = 1") {
    SeparatedInstance inst = separated_gaussian(3, 12, 400, 100.0, 61);
    ClusterRunResult run = cluster(inst.data, 3, {.seed = 6});
    auto checks = check_good_point_misclassification(inst.data, inst.target, inst.stats,
                                                     run.theta, 1.0);
    REQUIRE(checks.size() == 2);
    CHECK(checks[0].holds); // miscount bound
    CHECK(checks[1].holds); // bad-fraction bound
}

TEST_CASE("bad-fraction bound stays valid when gamma approaches c*sqrt(k)") {
    SeparatedInstance inst = separated_gaussian(2, 8, 120, 25.0, 67);
    const double c = inst.stats.separation_c;
    ClusterRunResult run = cluster(inst.data, 2, {.seed = 2});
    double gamma = 0.9 * c * std::sqrt(2.0);
    auto checks = check_good_point_misclassification(inst.data, inst.target, inst.stats,
                                                     run.theta, gamma);
    for (const auto& check : checks) CHECK(check.holds);
}
