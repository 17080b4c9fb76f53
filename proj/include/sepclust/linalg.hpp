#pragma once

#include "sepclust/matrix.hpp"

#include <cstdint>
#include <vector>

namespace sepclust {

/// Top-t singular triplets of a matrix. Right/left vectors are stored as the
/// ROWS of `right` (t×d) and `left` (t×n); singular values are sorted
/// non-increasing. `converged` is false when the iteration cap was reached
/// (the best estimate is still returned).
struct SvdResult {
    std::vector<double> singular_values;
    Matrix right; // t×d, orthonormal rows
    Matrix left;  // t×n, orthonormal rows
    bool converged = true;
    int iterations = 0;
};

/// Largest singular value, max_{‖x‖=1} ‖Mx‖, by power iteration on MᵀM.
///
/// Deterministic: starts from the normalized all-ones vector; stops when the
/// Rayleigh quotient changes by less than 1e−9 relative (cap 10000 sweeps).
/// A stagnated run can sit on a non-dominant eigenvector when the start is
/// orthogonal to the top one, so the estimate is probed with a seeded
/// pseudo-random restart and iteration resumes from the probe whenever the
/// probe's quotient exceeds the estimate.
double spectral_norm(const Matrix& m);

/// As above; *converged is cleared when the iteration cap was hit and the
/// returned value is the best estimate so far.
double spectral_norm(const Matrix& m, bool* converged);

/// sqrt of the sum of squared entries.
double frobenius_norm(const Matrix& m);

/// Top-t triplets by block power iteration (subspace iteration with a final
/// one-sided-Jacobi rotation of the converged subspace).
SvdResult truncated_svd(const Matrix& m, std::size_t t);

/// All min(n,d) triplets by one-sided Jacobi. Exact-route oracle for the
/// iterative paths above, and the workhorse for small matrices.
SvdResult full_svd(const Matrix& m);

/// Σ_{i≤t} σ_i u_i v_iᵀ.
Matrix reconstruct(const SvdResult& svd);

/// Each row replaced by its orthogonal projection onto span(basis rows),
/// expressed in the original coordinates. Basis rows must be orthonormal
/// within 1e−8 (input error otherwise).
Matrix project_rows(const Matrix& m, const Matrix& basis);

/// Closest point to x on the affine line through a and b (a ≠ b).
std::vector<double> project_point_onto_line(std::span<const double> x,
                                            std::span<const double> a,
                                            std::span<const double> b);

/// Orthonormalize the rows of `m` in place by modified Gram-Schmidt with one
/// re-orthogonalization pass. Rows that collapse (dependent) are replaced by
/// seeded pseudo-random vectors orthogonal to the rest, so the result always
/// has full row rank. Returns the number of collapsed rows.
std::size_t orthonormalize_rows(Matrix& m, std::uint64_t seed = 0x0fb3u);

} // namespace sepclust
