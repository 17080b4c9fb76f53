#include "sepclust/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sepclust::kernels {

namespace {

// Row-block size for partitioned reductions. Fixed (not thread-dependent) so
// partial sums combine identically for any thread count.
constexpr std::size_t kBlock = 64;

inline std::ptrdiff_t ssize_of(std::size_t n) { return static_cast<std::ptrdiff_t>(n); }

} // namespace

void set_num_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n < 1 ? 1 : n);
#else
    (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// ---------------------------------------------------------------- serial ---

namespace serial {

void matvec(const Matrix& m, std::span<const double> x, std::span<double> out) {
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i) out[i] = dot(m.row(i), x);
}

void matvec_t(const Matrix& m, std::span<const double> x, std::span<double> out) {
    const std::size_t n = m.rows(), d = m.cols();
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks * d, 0.0);
    for (std::size_t b = 0; b < nblocks; ++b) {
        double* acc = partial.data() + b * d;
        const std::size_t hi = std::min(n, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < hi; ++i) {
            const double xi = x[i];
            auto row = m.row(i);
            for (std::size_t j = 0; j < d; ++j) acc[j] += row[j] * xi;
        }
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const double* acc = partial.data() + b * d;
        for (std::size_t j = 0; j < d; ++j) out[j] += acc[j];
    }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
    out = Matrix(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
    out = Matrix(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto arow = a.row(i);
        auto orow = out.row(i);
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double ail = arow[l];
            if (ail == 0.0) continue;
            auto brow = b.row(l);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += ail * brow[j];
        }
    }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
    const std::size_t n = a.rows(), ta = a.cols(), d = b.cols();
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks * ta * d, 0.0);
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        double* acc = partial.data() + blk * ta * d;
        const std::size_t hi = std::min(n, (blk + 1) * kBlock);
        for (std::size_t i = blk * kBlock; i < hi; ++i) {
            auto arow = a.row(i);
            auto brow = b.row(i);
            for (std::size_t r = 0; r < ta; ++r) {
                const double scale = arow[r];
                if (scale == 0.0) continue;
                double* accr = acc + r * d;
                for (std::size_t j = 0; j < d; ++j) accr[j] += scale * brow[j];
            }
        }
    }
    out = Matrix(ta, d);
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        const double* acc = partial.data() + blk * ta * d;
        for (std::size_t idx = 0; idx < ta * d; ++idx) out.data()[idx] += acc[idx];
    }
}

double frobenius_sq(const Matrix& m) {
    const std::size_t n = m.rows();
    std::vector<double> row_sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = m.row(i);
        row_sq[i] = dot(row, row);
    }
    return sum_fixed_order(row_sq);
}

void sq_dists_to_point(const Matrix& a, std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < a.rows(); ++i) out[i] = sq_dist(a.row(i), p);
}

namespace detail {

inline void nearest_one(const Matrix& a, const Matrix& centers, std::size_t i, int& label,
                        double& best) {
    best = sq_dist(a.row(i), centers.row(0));
    label = 0;
    for (std::size_t r = 1; r < centers.rows(); ++r) {
        double d = sq_dist(a.row(i), centers.row(r));
        if (d < best) {
            best = d;
            label = static_cast<int>(r);
        }
    }
}

inline void nearest_two(const Matrix& a, const Matrix& centers, std::size_t i, int& label,
                        double& best, double& second) {
    best = sq_dist(a.row(i), centers.row(0));
    second = std::numeric_limits<double>::infinity();
    label = 0;
    for (std::size_t r = 1; r < centers.rows(); ++r) {
        double d = sq_dist(a.row(i), centers.row(r));
        if (d < best) {
            second = best;
            best = d;
            label = static_cast<int>(r);
        } else if (d < second) {
            second = d;
        }
    }
}

} // namespace detail

void assign_nearest(const Matrix& a, const Matrix& centers, std::vector<int>& labels,
                    std::vector<double>& best_sq) {
    const std::size_t n = a.rows();
    labels.resize(n);
    best_sq.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        detail::nearest_one(a, centers, i, labels[i], best_sq[i]);
}

void assign_nearest_two(const Matrix& a, const Matrix& centers, std::vector<int>& labels,
                        std::vector<double>& best_sq, std::vector<double>& second_sq) {
    const std::size_t n = a.rows();
    labels.resize(n);
    best_sq.resize(n);
    second_sq.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        detail::nearest_two(a, centers, i, labels[i], best_sq[i], second_sq[i]);
}

void cluster_means(const Matrix& a, const std::vector<int>& labels, std::size_t k,
                   const Matrix* fallback, Matrix& out) {
    const std::size_t n = a.rows(), d = a.cols();
    std::vector<std::size_t> counts(k, 0);
    for (int lab : labels) counts[static_cast<std::size_t>(lab)]++;
    out = Matrix(k, d);
    // Column-sliced accumulation: each column sums points in index order.
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i)
            out(static_cast<std::size_t>(labels[i]), j) += a(i, j);
        for (std::size_t r = 0; r < k; ++r) {
            if (counts[r] > 0)
                out(r, j) /= static_cast<double>(counts[r]);
            else
                out(r, j) = (*fallback)(r, j);
        }
    }
}

double kmeans_cost(const Matrix& a, const std::vector<int>& labels, const Matrix& centers) {
    const std::size_t n = a.rows();
    std::vector<double> contrib(n);
    for (std::size_t i = 0; i < n; ++i)
        contrib[i] = sq_dist(a.row(i), centers.row(static_cast<std::size_t>(labels[i])));
    return sum_fixed_order(contrib);
}

void project_rows_onto(const Matrix& a, const Matrix& basis, Matrix& out) {
    const std::size_t t = basis.rows(), d = a.cols();
    out = Matrix(a.rows(), d);
    std::vector<double> coeff(t);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto row = a.row(i);
        for (std::size_t l = 0; l < t; ++l) coeff[l] = dot(row, basis.row(l));
        auto orow = out.row(i);
        for (std::size_t l = 0; l < t; ++l) {
            auto brow = basis.row(l);
            for (std::size_t j = 0; j < d; ++j) orow[j] += coeff[l] * brow[j];
        }
    }
}

} // namespace serial

// ---------------------------------------------------------------- OpenMP ---

void matvec(const Matrix& m, std::span<const double> x, std::span<double> out) {
    const std::ptrdiff_t n = ssize_of(m.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = dot(m.row(static_cast<std::size_t>(i)), x);
}

void matvec_t(const Matrix& m, std::span<const double> x, std::span<double> out) {
    const std::size_t n = m.rows(), d = m.cols();
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks * d, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bi = 0; bi < ssize_of(nblocks); ++bi) {
        const auto b = static_cast<std::size_t>(bi);
        double* acc = partial.data() + b * d;
        const std::size_t hi = std::min(n, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < hi; ++i) {
            const double xi = x[i];
            auto row = m.row(i);
            for (std::size_t j = 0; j < d; ++j) acc[j] += row[j] * xi;
        }
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const double* acc = partial.data() + b * d;
        for (std::size_t j = 0; j < d; ++j) out[j] += acc[j];
    }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
    out = Matrix(a.rows(), b.rows());
    const std::ptrdiff_t n = ssize_of(a.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        auto arow = a.row(static_cast<std::size_t>(i));
        auto orow = out.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < b.rows(); ++j) orow[j] = dot(arow, b.row(j));
    }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
    out = Matrix(a.rows(), b.cols());
    const std::ptrdiff_t n = ssize_of(a.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        auto arow = a.row(static_cast<std::size_t>(i));
        auto orow = out.row(static_cast<std::size_t>(i));
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double ail = arow[l];
            if (ail == 0.0) continue;
            auto brow = b.row(l);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += ail * brow[j];
        }
    }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
    const std::size_t n = a.rows(), ta = a.cols(), d = b.cols();
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks * ta * d, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bi = 0; bi < ssize_of(nblocks); ++bi) {
        const auto blk = static_cast<std::size_t>(bi);
        double* acc = partial.data() + blk * ta * d;
        const std::size_t hi = std::min(n, (blk + 1) * kBlock);
        for (std::size_t i = blk * kBlock; i < hi; ++i) {
            auto arow = a.row(i);
            auto brow = b.row(i);
            for (std::size_t r = 0; r < ta; ++r) {
                const double scale = arow[r];
                if (scale == 0.0) continue;
                double* accr = acc + r * d;
                for (std::size_t j = 0; j < d; ++j) accr[j] += scale * brow[j];
            }
        }
    }
    out = Matrix(ta, d);
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        const double* acc = partial.data() + blk * ta * d;
        for (std::size_t idx = 0; idx < ta * d; ++idx) out.data()[idx] += acc[idx];
    }
}

double frobenius_sq(const Matrix& m) {
    const std::size_t n = m.rows();
    std::vector<double> row_sq(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < ssize_of(n); ++i) {
        auto row = m.row(static_cast<std::size_t>(i));
        row_sq[static_cast<std::size_t>(i)] = dot(row, row);
    }
    return sum_fixed_order(row_sq);
}

void sq_dists_to_point(const Matrix& a, std::span<const double> p, std::span<double> out) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < ssize_of(a.rows()); ++i)
        out[static_cast<std::size_t>(i)] = sq_dist(a.row(static_cast<std::size_t>(i)), p);
}

void assign_nearest(const Matrix& a, const Matrix& centers, std::vector<int>& labels,
                    std::vector<double>& best_sq) {
    const std::size_t n = a.rows();
    labels.resize(n);
    best_sq.resize(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < ssize_of(n); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        serial::detail::nearest_one(a, centers, ii, labels[ii], best_sq[ii]);
    }
}

void assign_nearest_two(const Matrix& a, const Matrix& centers, std::vector<int>& labels,
                        std::vector<double>& best_sq, std::vector<double>& second_sq) {
    const std::size_t n = a.rows();
    labels.resize(n);
    best_sq.resize(n);
    second_sq.resize(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < ssize_of(n); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        serial::detail::nearest_two(a, centers, ii, labels[ii], best_sq[ii], second_sq[ii]);
    }
}

void cluster_means(const Matrix& a, const std::vector<int>& labels, std::size_t k,
                   const Matrix* fallback, Matrix& out) {
    const std::size_t n = a.rows(), d = a.cols();
    std::vector<std::size_t> counts(k, 0);
    for (int lab : labels) counts[static_cast<std::size_t>(lab)]++;
    out = Matrix(k, d);
    // Each thread owns whole columns; per-column accumulation is in row order.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t jj = 0; jj < ssize_of(d); ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        for (std::size_t i = 0; i < n; ++i)
            out(static_cast<std::size_t>(labels[i]), j) += a(i, j);
        for (std::size_t r = 0; r < k; ++r) {
            if (counts[r] > 0)
                out(r, j) /= static_cast<double>(counts[r]);
            else
                out(r, j) = (*fallback)(r, j);
        }
    }
}

double kmeans_cost(const Matrix& a, const std::vector<int>& labels, const Matrix& centers) {
    const std::size_t n = a.rows();
    std::vector<double> contrib(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < ssize_of(n); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        contrib[ii] = sq_dist(a.row(ii), centers.row(static_cast<std::size_t>(labels[ii])));
    }
    return sum_fixed_order(contrib);
}

void project_rows_onto(const Matrix& a, const Matrix& basis, Matrix& out) {
    const std::size_t t = basis.rows(), d = a.cols();
    out = Matrix(a.rows(), d);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < ssize_of(a.rows()); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        auto row = a.row(ii);
        auto orow = out.row(ii);
        std::vector<double> coeff(t);
        for (std::size_t l = 0; l < t; ++l) coeff[l] = dot(row, basis.row(l));
        for (std::size_t l = 0; l < t; ++l) {
            auto brow = basis.row(l);
            for (std::size_t j = 0; j < d; ++j) orow[j] += coeff[l] * brow[j];
        }
    }
}

} // namespace sepclust::kernels
