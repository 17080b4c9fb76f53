#pragma once

#include "sepclust/matrix.hpp"

#include <span>
#include <vector>

// Data-parallel inner loops shared by every module. Each kernel exists twice:
// the OpenMP version in sepclust::kernels and a plain-loop reference in
// sepclust::kernels::serial. The parallel versions are bit-identical to the
// serial ones for any thread count: every output element is produced by
// exactly one thread, and scalar reductions sum fixed-size blocks in index
// order. tools/bench_kernels compares their throughput.

namespace sepclust::kernels {

/// Threads used by the parallel kernels (clamped to at least 1).
void set_num_threads(int n);
int max_threads();

// out = M x
void matvec(const Matrix& m, std::span<const double> x, std::span<double> out);
// out = Mᵀ x (block-partitioned rows, partials combined in block order)
void matvec_t(const Matrix& m, std::span<const double> x, std::span<double> out);
// out = A Bᵀ  (rows of a dotted with rows of b)
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
// out = A B
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);
// out = Aᵀ B (block-partitioned over rows of a/b, partials in block order)
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);

double frobenius_sq(const Matrix& m);

/// out[i] = ‖a_i − p‖²
void sq_dists_to_point(const Matrix& a, std::span<const double> p, std::span<double> out);

/// Nearest center per row; ties broken by lowest center index.
void assign_nearest(const Matrix& a, const Matrix& centers, std::vector<int>& labels,
                    std::vector<double>& best_sq);

/// Nearest and second-nearest squared distances (for swap local search).
void assign_nearest_two(const Matrix& a, const Matrix& centers, std::vector<int>& labels,
                        std::vector<double>& best_sq, std::vector<double>& second_sq);

/// Per-cluster means. Clusters with no points take the matching `fallback`
/// row (fallback may be null only if every cluster is non-empty).
void cluster_means(const Matrix& a, const std::vector<int>& labels, std::size_t k,
                   const Matrix* fallback, Matrix& out);

double kmeans_cost(const Matrix& a, const std::vector<int>& labels, const Matrix& centers);

/// Rows of `a` replaced by their projection onto span(basis rows); basis rows
/// must be orthonormal (validated by the linalg wrapper, not here).
void project_rows_onto(const Matrix& a, const Matrix& basis, Matrix& out);

namespace serial {

void matvec(const Matrix& m, std::span<const double> x, std::span<double> out);
void matvec_t(const Matrix& m, std::span<const double> x, std::span<double> out);
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
double frobenius_sq(const Matrix& m);
void sq_dists_to_point(const Matrix& a, std::span<const double> p, std::span<double> out);
void assign_nearest(const Matrix& a, const Matrix& centers, std::vector<int>& labels,
                    std::vector<double>& best_sq);
void assign_nearest_two(const Matrix& a, const Matrix& centers, std::vector<int>& labels,
                        std::vector<double>& best_sq, std::vector<double>& second_sq);
void cluster_means(const Matrix& a, const std::vector<int>& labels, std::size_t k,
                   const Matrix* fallback, Matrix& out);
double kmeans_cost(const Matrix& a, const std::vector<int>& labels, const Matrix& centers);
void project_rows_onto(const Matrix& a, const Matrix& basis, Matrix& out);

} // namespace serial

// Small shared helpers (always serial; O(d) work).
inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double sq_dist(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double diff = x[i] - y[i];
        s += diff * diff;
    }
    return s;
}

/// Sum in strict index order (the fixed-order reduction used everywhere).
inline double sum_fixed_order(std::span<const double> values) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

} // namespace sepclust::kernels
