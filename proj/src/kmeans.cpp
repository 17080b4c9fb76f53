#include "sepclust/kmeans.hpp"

#include "sepclust/errors.hpp"
#include "sepclust/kernels.hpp"
#include "sepclust/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sepclust {

namespace {

constexpr double kSwapImprovement = 1e-6;

std::size_t count_distinct_rows(const Matrix& a) {
    std::vector<std::size_t> order(a.rows());
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t i, std::size_t j) {
        auto ri = a.row(i), rj = a.row(j);
        return std::lexicographical_compare(ri.begin(), ri.end(), rj.begin(), rj.end());
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t distinct = a.rows() == 0 ? 0 : 1;
    for (std::size_t i = 1; i < order.size(); ++i)
        if (less(order[i - 1], order[i])) distinct++;
    return distinct;
}

void refresh_assignment(const Matrix& a, const Matrix& centers, std::vector<int>& labels,
                        std::vector<double>& d1, std::vector<double>& d2, double& cost) {
    kernels::assign_nearest_two(a, centers, labels, d1, d2);
    cost = kernels::sum_fixed_order(d1);
}

} // namespace

Matrix d2_seed(const Matrix& a, std::size_t k, std::uint64_t seed) {
    const std::size_t n = a.rows();
    if (k < 1 || k > n) throw input_error("d2_seed: k out of range");
    if (k > count_distinct_rows(a))
        throw input_error("d2_seed: k exceeds number of distinct points");

    Rng rng(seed);
    Matrix centers(k, a.cols());
    centers.set_row(0, a.row(rng.below(n)));

    std::vector<double> weight(n);
    kernels::sq_dists_to_point(a, centers.row(0), weight);
    for (std::size_t c = 1; c < k; ++c) {
        // Total weight is positive: fewer centers than distinct points.
        std::size_t pick = rng.pick_weighted(weight);
        centers.set_row(c, a.row(pick));
        std::vector<double> dist(n);
        kernels::sq_dists_to_point(a, centers.row(c), dist);
        for (std::size_t i = 0; i < n; ++i) weight[i] = std::min(weight[i], dist[i]);
    }
    return centers;
}

KMeansSolution swap_local_search(const Matrix& a, Matrix init,
                                 const std::vector<int>& candidate_pool, int max_swaps) {
    const std::size_t n = a.rows(), k = init.rows();
    KMeansSolution sol;
    sol.centers = std::move(init);

    std::vector<int> labels;
    std::vector<double> d1, d2;
    double cost;
    refresh_assignment(a, sol.centers, labels, d1, d2, cost);

    int swaps = 0;
    bool improved = true;
    std::vector<double> dp(n), base(n), own_delta(n);
    while (improved && swaps < max_swaps) {
        improved = false;
        for (int p : candidate_pool) {
            kernels::sq_dists_to_point(a, a.row(static_cast<std::size_t>(p)), dp);
            // Cost of swapping center j for point p decomposes as
            //   Σ_i min(d1_i, dp_i) + Σ_{i: labels_i = j} (min(d2_i, dp_i) − min(d1_i, dp_i))
            // since only the dropped center's own points lose their nearest.
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
                const auto i = static_cast<std::size_t>(ii);
                base[i] = std::min(d1[i], dp[i]);
                own_delta[i] = std::min(d2[i], dp[i]) - base[i];
            }
            double shared = kernels::sum_fixed_order(base);
            std::vector<double> correction(k, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                correction[static_cast<std::size_t>(labels[i])] += own_delta[i];
            int best_j = 0;
            for (std::size_t j = 1; j < k; ++j)
                if (correction[j] < correction[best_j]) best_j = static_cast<int>(j);
            double best_cost = shared + correction[static_cast<std::size_t>(best_j)];
            if (best_cost <= cost * (1.0 - kSwapImprovement)) {
                sol.centers.set_row(static_cast<std::size_t>(best_j),
                                    a.row(static_cast<std::size_t>(p)));
                refresh_assignment(a, sol.centers, labels, d1, d2, cost);
                swaps++;
                improved = true;
                if (swaps >= max_swaps) break;
            }
        }
    }

    kernels::assign_nearest(a, sol.centers, labels, d1);
    sol.labels = labels;
    sol.cost = kernels::kmeans_cost(a, labels, sol.centers);
    sol.iterations = swaps;
    return sol;
}

std::pair<std::vector<int>, Matrix> lloyd_step(const Matrix& a, const Matrix& centers) {
    if (!centers.all_finite()) throw input_error("lloyd_step: non-finite centers");
    std::vector<int> labels;
    std::vector<double> d1;
    kernels::assign_nearest(a, centers, labels, d1);
    Matrix next;
    kernels::cluster_means(a, labels, centers.rows(), &centers, next);
    return {std::move(labels), std::move(next)};
}

KMeansSolution approx_kmeans(const Matrix& a, std::size_t k, std::uint64_t seed) {
    Matrix init = d2_seed(a, k, seed);
    std::vector<int> pool(a.rows());
    std::iota(pool.begin(), pool.end(), 0);
    KMeansSolution sol = swap_local_search(a, std::move(init), pool, static_cast<int>(50 * k));

    // Lloyd to a fixed point: stop once the assignment to mean-updated
    // centers stops changing between consecutive steps.
    int steps = 0;
    const int cap = 10000;
    std::vector<int> labels;
    Matrix centers = sol.centers;
    while (steps < cap) {
        auto [next_labels, next_centers] = lloyd_step(a, centers);
        steps++;
        bool same = steps > 1 && next_labels == labels;
        labels = std::move(next_labels);
        centers = std::move(next_centers);
        if (same) break;
    }
    sol.centers = std::move(centers);
    sol.labels = std::move(labels);
    sol.cost = kernels::kmeans_cost(a, sol.labels, sol.centers);
    sol.iterations = steps;
    return sol;
}

} // namespace sepclust
