#include "sepclust/cluster.hpp"

#include "sepclust/errors.hpp"
#include "sepclust/kernels.hpp"
#include "sepclust/kmeans.hpp"
#include "sepclust/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sepclust {

namespace {

// Bounding-box diagonal; threshold scale for the Part III movement stop.
double dataset_spread(const Matrix& a) {
    const std::size_t d = a.cols();
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < a.rows(); ++i) {
            lo = std::min(lo, a(i, j));
            hi = std::max(hi, a(i, j));
        }
        sq += (hi - lo) * (hi - lo);
    }
    return std::sqrt(sq);
}

} // namespace

PartOneResult part_one(const Matrix& a, std::size_t k, std::uint64_t seed) {
    if (k < 1 || k > std::min(a.rows(), a.cols()))
        throw input_error("part_one: k out of range [1, min(n,d)]");

    SvdResult svd = truncated_svd(a, k);
    if (!svd.converged)
        throw numeric_error("part_one: truncated SVD did not converge after " +
                            std::to_string(svd.iterations) + " iterations");

    PartOneResult out;
    out.projected = project_rows(a, svd.right);

    // The search runs on the rank-k coordinates of Â (rows of A·Vᵀ); distances
    // between rows of Â equal distances between their coordinate vectors, so
    // the solution is the same and the cost does not scale with d.
    Matrix coords;
    kernels::matmul_nt(a, svd.right, coords); // n×k
    KMeansSolution sol = approx_kmeans(coords, k, seed);
    kernels::matmul_nn(sol.centers, svd.right, out.nu); // back to ℝ^d

    std::vector<double> best;
    kernels::assign_nearest(coords, sol.centers, out.z_labels, best);
    return out;
}

PartTwoResult part_two(const Matrix& projected, const Matrix& a, const Matrix& nu) {
    const std::size_t n = projected.rows(), k = nu.rows();
    if (a.rows() != n) throw input_error("part_two: row count mismatch");

    Matrix dist_sq(n, k);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t r = 0; r < k; ++r)
            dist_sq(i, r) = kernels::sq_dist(projected.row(i), nu.row(r));
    }

    PartTwoResult out;
    out.core_sets.assign(k, {});
    out.core_empty.assign(k, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < k; ++r) {
            bool in_core = true;
            for (std::size_t s = 0; s < k && in_core; ++s) {
                if (s == r) continue;
                // ‖Â_i−ν_r‖ ≤ (1/3)‖Â_i−ν_s‖, compared on squares
                if (9.0 * dist_sq(i, r) > dist_sq(i, s)) in_core = false;
            }
            if (in_core) {
                out.core_sets[r].push_back(static_cast<int>(i));
                break; // core sets are disjoint; lowest r wins the degenerate case
            }
        }
    }

    out.theta = Matrix(k, a.cols());
    for (std::size_t r = 0; r < k; ++r) {
        if (out.core_sets[r].empty()) {
            out.core_empty[r] = true;
            out.theta.set_row(r, nu.row(r));
            continue;
        }
        std::vector<double> mean(a.cols(), 0.0);
        for (int i : out.core_sets[r]) {
            auto row = a.row(static_cast<std::size_t>(i));
            for (std::size_t j = 0; j < a.cols(); ++j) mean[j] += row[j];
        }
        for (double& v : mean) v /= static_cast<double>(out.core_sets[r].size());
        out.theta.set_row(r, mean);
    }
    return out;
}

PartThreeResult part_three(const Matrix& a, const Matrix& theta, int max_iter) {
    if (!theta.all_finite()) throw input_error("part_three: non-finite centers");
    const double movement_floor = 1e-9 * dataset_spread(a);

    PartThreeResult out;
    out.centers = theta;
    out.converged = false;
    std::vector<int> prev_labels;
    for (int it = 1; it <= max_iter; ++it) {
        auto [labels, next] = lloyd_step(a, out.centers);
        out.iterations = it;
        double moved = 0.0;
        for (std::size_t r = 0; r < next.rows(); ++r)
            moved = std::max(moved, std::sqrt(kernels::sq_dist(next.row(r), out.centers.row(r))));
        bool labels_stable = !prev_labels.empty() && labels == prev_labels;
        prev_labels = labels;
        out.labels = std::move(labels);
        out.centers = std::move(next);
        if (labels_stable || moved < movement_floor) {
            out.converged = true;
            break;
        }
    }
    return out;
}

ClusterRunResult cluster(const Matrix& a, std::size_t k, const ClusterOptions& options) {
    ClusterRunResult run;
    {
        PartOneResult p1 = part_one(a, k, options.seed);
        run.projected = std::move(p1.projected);
        run.nu = std::move(p1.nu);
        run.z_labels = std::move(p1.z_labels);
    }
    {
        PartTwoResult p2 = part_two(run.projected, a, run.nu);
        run.core_sets = std::move(p2.core_sets);
        run.core_empty = std::move(p2.core_empty);
        run.theta = std::move(p2.theta);
    }
    if (options.run_part3) {
        PartThreeResult p3 = part_three(a, run.theta, options.max_iter);
        run.final_labels = std::move(p3.labels);
        run.final_centers = std::move(p3.centers);
        run.part3_iterations = p3.iterations;
        run.part3_converged = p3.converged;
    }
    return run;
}

} // namespace sepclust
