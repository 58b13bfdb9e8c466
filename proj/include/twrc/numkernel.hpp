#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "twrc/error.hpp"

namespace twrc {

using cplx = std::complex<double>;

/// Dense complex matrix. Zero-sized shapes (0 x n, n x 0) are valid values.
using CMatrix = Eigen::MatrixXcd;

struct Tolerance {
    /// Singular values at or below rel_rank_tol * sigma_max count as zero.
    double rel_rank_tol = 1e-9;
    /// Bound on relative residuals (solves, alignment, recovery).
    double residual_tol = 1e-8;

    /// Throws InvalidConfig unless both values lie in (0, 1).
    void validate() const;
};

/// Numerical rank from singular values. Throws InvalidMatrix on NaN/Inf.
int rank(const CMatrix& a, const Tolerance& tol = {});

/// Orthonormal basis (as columns) of the right null space of `a`, computed
/// from a full SVD. The result has cols(a) - rank(a) columns.
CMatrix null_space_basis(const CMatrix& a, const Tolerance& tol = {});

/// Solves a X = b for square `a`. Throws SingularMatrix when `a` is rank
/// deficient or the relative residual ||aX - b|| / ||b|| exceeds
/// tol.residual_tol.
CMatrix solve_square(const CMatrix& a, const CMatrix& b, const Tolerance& tol = {});

/// Inverse of a square matrix via solve_square(a, I).
CMatrix inverse(const CMatrix& a, const Tolerance& tol = {});

/// Portable source of standard complex Gaussian variates.
///
/// The engine is std::mt19937_64 seeded directly with the 64-bit seed; its
/// output sequence is fixed by the C++ standard. Each complex sample consumes
/// two engine outputs u1, u2, mapped to [0,1) by taking the top 53 bits, and
/// uses the Box-Muller transform
///     r = sqrt(-2 ln(1 - u1)),  z = r (cos 2 pi u2 + i sin 2 pi u2) / sqrt(2)
/// so real and imaginary parts are independent N(0, 1/2).
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    cplx next();
    double next_uniform();

private:
    std::mt19937_64 engine_;
};

/// rows x cols matrix of i.i.d. CN(0,1) entries, filled in row-major order.
CMatrix random_complex_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);
CMatrix random_complex_gaussian(Eigen::Index rows, Eigen::Index cols, GaussianSource& source);

/// SplitMix64 finalizer over (seed, stream); used to derive independent
/// per-purpose seeds from one user-facing seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Horizontal / vertical concatenation that accepts zero-sized blocks.
CMatrix hcat(const CMatrix& left, const CMatrix& right);
CMatrix vcat(const CMatrix& top, const CMatrix& bottom);

}  // namespace twrc
