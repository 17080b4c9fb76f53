#include "sepclust/linalg.hpp"

#include "sepclust/errors.hpp"
#include "sepclust/kernels.hpp"
#include "sepclust/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sepclust {

namespace {

constexpr double kPowerTol = 1e-9;
constexpr int kPowerCap = 10000;
constexpr double kSubspaceTol = 1e-12;
constexpr int kSubspaceCap = 10000;

void require_finite(const Matrix& m, const char* who) {
    if (m.rows() == 0 || m.cols() == 0) throw input_error(std::string(who) + ": empty matrix");
    if (!m.all_finite()) throw input_error(std::string(who) + ": non-finite entries");
}

// Applies x ← MᵀM x either through a precomputed Gram matrix (small inner
// dimension) or as two mat-vecs. `work` holds the intermediate Mx.
struct GramApply {
    const Matrix* m = nullptr;
    Matrix gram;          // g×g on the smaller side, empty when not precomputed
    bool use_gram = false;
    bool transposed = false; // operate on Mᵀ when d > n (same spectral norm)

    explicit GramApply(const Matrix& mat) {
        transposed = mat.cols() > mat.rows();
        if (transposed) {
            owned = mat.transposed();
            m = &owned;
        } else {
            m = &mat;
        }
        const std::size_t n = m->rows(), d = m->cols();
        // Precompute MᵀM when the one-off n·d² cost is small.
        if (n * d * d <= 300'000'000ULL) {
            kernels::matmul_tn(*m, *m, gram);
            use_gram = true;
        }
    }

    std::size_t dim() const { return m->cols(); }

    void apply(std::span<const double> x, std::span<double> out, std::vector<double>& work) const {
        if (use_gram) {
            kernels::matvec(gram, x, out);
        } else {
            work.resize(m->rows());
            kernels::matvec(*m, x, work);
            kernels::matvec_t(*m, work, out);
        }
    }

private:
    Matrix owned;
};

struct PowerRun {
    double lambda = 0.0;
    std::vector<double> vec;
    bool converged = false;
    int iterations = 0;
};

double normalize(std::vector<double>& v) {
    double norm = std::sqrt(kernels::dot(v, v));
    if (norm > 0.0)
        for (double& x : v) x /= norm;
    return norm;
}

// Stops once the Rayleigh quotient is within kPowerTol relative of its
// limit: quotient steps shrink geometrically, so the remaining error is
// estimated as change·ρ/(1−ρ) from the observed rate ρ.
PowerRun power_iterate(const GramApply& op, std::vector<double> x, int cap) {
    PowerRun run;
    std::vector<double> next(x.size()), work;
    normalize(x);
    double lambda_prev = -1.0, change_prev = -1.0;
    for (int it = 1; it <= cap; ++it) {
        op.apply(x, next, work);
        double lambda = kernels::dot(x, next); // Rayleigh quotient of MᵀM
        run.iterations = it;
        if (normalize(next) == 0.0) {
            // x in the null space; caller restarts from the probe vector.
            run.lambda = 0.0;
            run.vec = std::move(x);
            run.converged = true;
            return run;
        }
        x.swap(next);
        if (lambda_prev >= 0.0) {
            const double floor = std::max(lambda, 1e-300);
            double change = std::abs(lambda - lambda_prev);
            if (change <= kPowerTol * floor) {
                double rate = change_prev > 0.0 ? std::min(change / change_prev, 0.999999) : 0.0;
                double remaining = change * rate / (1.0 - rate);
                if (remaining <= kPowerTol * floor) {
                    run.lambda = lambda;
                    run.vec = std::move(x);
                    run.converged = true;
                    return run;
                }
            }
            change_prev = change;
        }
        lambda_prev = lambda;
    }
    run.lambda = lambda_prev < 0.0 ? 0.0 : lambda_prev;
    run.vec = std::move(x);
    run.converged = false;
    return run;
}

std::vector<double> seeded_unit_vector(std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    if (normalize(v) == 0.0) v[0] = 1.0;
    return v;
}

// One-sided Jacobi: rotates columns of w until they are pairwise orthogonal,
// accumulating the rotations into j (so original w = final w · jᵀ). Columns
// end sorted by norm, descending.
void jacobi_orthogonalize_columns(Matrix& w, Matrix& j) {
    const std::size_t n = w.rows(), t = w.cols();
    j = Matrix::identity(t);
    const double eps = 1e-14;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p < t; ++p) {
            for (std::size_t q = p + 1; q < t; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    app += w(i, p) * w(i, p);
                    aqq += w(i, q) * w(i, q);
                    apq += w(i, p) * w(i, q);
                }
                if (std::abs(apq) <= eps * std::sqrt(app) * std::sqrt(aqq)) continue;
                rotated = true;
                double tau = (aqq - app) / (2.0 * apq);
                double tshift = (tau >= 0.0 ? 1.0 : -1.0) /
                                (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + tshift * tshift);
                double s = tshift * c;
                for (std::size_t i = 0; i < n; ++i) {
                    double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < t; ++i) {
                    double jp = j(i, p), jq = j(i, q);
                    j(i, p) = c * jp - s * jq;
                    j(i, q) = s * jp + c * jq;
                }
            }
        }
        if (!rotated) break;
    }
    // Sort columns by norm, descending; stable for ties.
    std::vector<double> norms(t);
    for (std::size_t c = 0; c < t; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += w(i, c) * w(i, c);
        norms[c] = s;
    }
    std::vector<std::size_t> order(t);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });
    Matrix w2(n, t), j2(t, t);
    for (std::size_t c = 0; c < t; ++c) {
        for (std::size_t i = 0; i < n; ++i) w2(i, c) = w(i, order[c]);
        for (std::size_t i = 0; i < t; ++i) j2(i, c) = j(i, order[c]);
    }
    w = std::move(w2);
    j = std::move(j2);
}

// Packs orthogonalized columns into an SvdResult; zero singular directions get
// deterministically completed left vectors (unit-basis Gram-Schmidt).
SvdResult pack_triplets(const Matrix& w, const Matrix& right_cols, std::size_t t) {
    const std::size_t n = w.rows(), d = right_cols.rows();
    SvdResult out;
    out.singular_values.resize(t);
    out.right = Matrix(t, d);
    out.left = Matrix(t, n);
    for (std::size_t c = 0; c < t; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += w(i, c) * w(i, c);
        double sigma = std::sqrt(s);
        out.singular_values[c] = sigma;
        for (std::size_t j = 0; j < d; ++j) out.right(c, j) = right_cols(j, c);
        if (sigma > 0.0) {
            for (std::size_t i = 0; i < n; ++i) out.left(c, i) = w(i, c) / sigma;
        }
    }
    // Complete left vectors for zero singular values.
    for (std::size_t c = 0; c < t; ++c) {
        if (out.singular_values[c] > 0.0) continue;
        for (std::size_t cand = 0; cand < n; ++cand) {
            std::vector<double> v(n, 0.0);
            v[cand] = 1.0;
            for (std::size_t other = 0; other < t; ++other) {
                if (other == c) continue;
                double proj = kernels::dot(out.left.row(other), v);
                for (std::size_t i = 0; i < n; ++i) v[i] -= proj * out.left(other, i);
            }
            if (normalize(v) > 1e-6) {
                out.left.set_row(c, v);
                break;
            }
        }
    }
    return out;
}

} // namespace

double spectral_norm(const Matrix& m) { return spectral_norm(m, nullptr); }

double spectral_norm(const Matrix& m, bool* converged) {
    require_finite(m, "spectral_norm");
    if (converged) *converged = true;
    if (kernels::frobenius_sq(m) == 0.0) return 0.0;

    GramApply op(m);
    const std::size_t d = op.dim();
    std::vector<double> ones(d, 1.0);
    PowerRun run = power_iterate(op, std::move(ones), kPowerCap);

    // Probe with a pseudo-random vector; if its quotient climbs past the
    // estimate the first run had stagnated off the dominant eigenvector.
    for (int restart = 0; restart < 3; ++restart) {
        std::vector<double> probe = seeded_unit_vector(d, 0x5eedu + static_cast<std::uint64_t>(restart));
        PowerRun probe_run = power_iterate(op, std::move(probe), 50);
        if (probe_run.lambda <= run.lambda * (1.0 + 100.0 * kPowerTol)) break;
        PowerRun cont = power_iterate(op, std::move(probe_run.vec), kPowerCap);
        if (cont.lambda > run.lambda) run = std::move(cont);
    }
    if (converged) *converged = run.converged;
    return std::sqrt(std::max(run.lambda, 0.0));
}

double frobenius_norm(const Matrix& m) {
    require_finite(m, "frobenius_norm");
    return std::sqrt(kernels::frobenius_sq(m));
}

SvdResult truncated_svd(const Matrix& m, std::size_t t) {
    require_finite(m, "truncated_svd");
    const std::size_t n = m.rows(), d = m.cols();
    if (t < 1 || t > std::min(n, d))
        throw input_error("truncated_svd: t out of range [1, min(n,d)]");

    // Seeded start subspace, d×t with orthonormal columns (stored row-major as
    // V whose ROWS are the basis vectors for kernel reuse).
    Matrix v(t, d);
    {
        Rng rng(0x7ab5u);
        for (std::size_t r = 0; r < t; ++r)
            for (std::size_t j = 0; j < d; ++j) v(r, j) = rng.normal();
        orthonormalize_rows(v);
    }

    // Convergence tracks the captured energy Σ_r ‖M v_r‖², which is invariant
    // under rotations inside the subspace; per-direction values may keep
    // mixing when singular values are nearly degenerate, the span does not.
    Matrix w;              // n×t, columns M v_r
    Matrix z;              // t×d rows Mᵀ (columns of w)
    double energy_prev = -1.0;
    bool converged = false;
    int used = 0;
    for (int it = 1; it <= kSubspaceCap; ++it) {
        used = it;
        kernels::matmul_nt(m, v, w); // w(i,r) = ⟨m_i, v_r⟩
        double energy = kernels::frobenius_sq(w);
        if (energy == 0.0) { // start subspace annihilated: rank-deficient
            converged = true;
            break;
        }
        if (it > 3 && std::abs(energy - energy_prev) <= kSubspaceTol * energy) {
            converged = true;
            break;
        }
        energy_prev = energy;
        // v ← orthonormalized rows of Wᵀ M
        kernels::matmul_tn(w, m, z); // z(r,j) = Σ_i w(i,r) m(i,j)
        v = std::move(z);
        orthonormalize_rows(v, 0x7ab5u + static_cast<std::uint64_t>(it));
    }

    // Rayleigh-Ritz: rotate the converged subspace so columns align with
    // singular directions and values come out sorted.
    kernels::matmul_nt(m, v, w);
    Matrix rotation;
    jacobi_orthogonalize_columns(w, rotation);
    Matrix right_cols; // d×t, columns are right singular vectors
    kernels::matmul_nn(v.transposed(), rotation, right_cols);

    SvdResult out = pack_triplets(w, right_cols, t);
    out.converged = converged;
    out.iterations = used;
    return out;
}

SvdResult full_svd(const Matrix& m) {
    require_finite(m, "full_svd");
    const bool flip = m.cols() > m.rows(); // Jacobi wants n ≥ t
    Matrix work = flip ? m.transposed() : m;
    Matrix rotation;
    jacobi_orthogonalize_columns(work, rotation);
    SvdResult out = pack_triplets(work, rotation, work.cols());
    if (flip) std::swap(out.left, out.right);
    out.converged = true;
    return out;
}

Matrix reconstruct(const SvdResult& svd) {
    const std::size_t t = svd.singular_values.size();
    const std::size_t n = svd.left.cols(), d = svd.right.cols();
    Matrix out(n, d);
    for (std::size_t r = 0; r < t; ++r) {
        const double sigma = svd.singular_values[r];
        if (sigma == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const double scale = sigma * svd.left(r, i);
            auto vrow = svd.right.row(r);
            auto orow = out.row(i);
            for (std::size_t j = 0; j < d; ++j) orow[j] += scale * vrow[j];
        }
    }
    return out;
}

Matrix project_rows(const Matrix& m, const Matrix& basis) {
    require_finite(m, "project_rows");
    if (basis.cols() != m.cols()) throw input_error("project_rows: basis dimension mismatch");
    for (std::size_t a = 0; a < basis.rows(); ++a) {
        for (std::size_t b = a; b < basis.rows(); ++b) {
            double d = kernels::dot(basis.row(a), basis.row(b));
            double want = a == b ? 1.0 : 0.0;
            if (std::abs(d - want) > 1e-8)
                throw input_error("project_rows: basis not orthonormal");
        }
    }
    Matrix out;
    kernels::project_rows_onto(m, basis, out);
    return out;
}

std::vector<double> project_point_onto_line(std::span<const double> x,
                                            std::span<const double> a,
                                            std::span<const double> b) {
    if (x.size() != a.size() || a.size() != b.size())
        throw input_error("project_point_onto_line: dimension mismatch");
    std::vector<double> dir(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) dir[j] = b[j] - a[j];
    double len_sq = kernels::dot(dir, dir);
    if (std::sqrt(len_sq) <= 1e-12)
        throw degenerate_line_error("project_point_onto_line: a == b");
    double t = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) t += (x[j] - a[j]) * dir[j];
    t /= len_sq;
    std::vector<double> out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] + t * dir[j];
    return out;
}

std::size_t orthonormalize_rows(Matrix& m, std::uint64_t seed) {
    const std::size_t t = m.rows(), d = m.cols();
    std::size_t collapsed = 0;
    Rng rng(seed);
    for (std::size_t r = 0; r < t; ++r) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            // Two Gram-Schmidt passes against the rows already fixed.
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t p = 0; p < r; ++p) {
                    double proj = kernels::dot(m.row(r), m.row(p));
                    auto prow = m.row(p);
                    auto rrow = m.row(r);
                    for (std::size_t j = 0; j < d; ++j) rrow[j] -= proj * prow[j];
                }
            }
            std::vector<double> v(m.row(r).begin(), m.row(r).end());
            double norm = std::sqrt(kernels::dot(v, v));
            if (norm > 1e-10) {
                for (std::size_t j = 0; j < d; ++j) m(r, j) = v[j] / norm;
                break;
            }
            // Dependent row: replace with a fresh seeded direction and retry.
            if (attempt == 0) collapsed++;
            for (std::size_t j = 0; j < d; ++j) m(r, j) = rng.normal();
        }
    }
    return collapsed;
}

} // namespace sepclust
