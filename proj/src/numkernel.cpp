#include "twrc/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace twrc {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidMatrix: return "InvalidMatrix";
        case ErrorKind::SingularMatrix: return "SingularMatrix";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::InvalidTuple: return "InvalidTuple";
        case ErrorKind::NonIntegerTuple: return "NonIntegerTuple";
        case ErrorKind::InfeasibleTuple: return "InfeasibleTuple";
        case ErrorKind::AlignmentInfeasible: return "AlignmentInfeasible";
        case ErrorKind::TooManyStreams: return "TooManyStreams";
        case ErrorKind::InvalidDesign: return "InvalidDesign";
    }
    return "Unknown";
}

void Tolerance::validate() const {
    auto ok = [](double v) { return v > 0.0 && v < 1.0; };
    if (!ok(rel_rank_tol) || !ok(residual_tol)) {
        throw Error(ErrorKind::InvalidConfig, "tolerances must lie in (0, 1)");
    }
}

namespace {

void require_finite(const CMatrix& a, const char* op) {
    if (!a.allFinite()) {
        throw Error(ErrorKind::InvalidMatrix, std::string(op) + ": matrix has non-finite entries");
    }
}

int rank_from_singular_values(const Eigen::VectorXd& sv, double rel_tol) {
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double cutoff = rel_tol * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) ++r;
    }
    return r;
}

}  // namespace

int rank(const CMatrix& a, const Tolerance& tol) {
    require_finite(a, "rank");
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(a);
    return rank_from_singular_values(svd.singularValues(), tol.rel_rank_tol);
}

CMatrix null_space_basis(const CMatrix& a, const Tolerance& tol) {
    require_finite(a, "null_space_basis");
    const Eigen::Index n = a.cols();
    if (n == 0) {
        throw Error(ErrorKind::InvalidMatrix, "null_space_basis: matrix has no columns");
    }
    if (a.rows() == 0) return CMatrix::Identity(n, n);

    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
    const int r = rank_from_singular_values(svd.singularValues(), tol.rel_rank_tol);
    return svd.matrixV().rightCols(n - r);
}

CMatrix solve_square(const CMatrix& a, const CMatrix& b, const Tolerance& tol) {
    require_finite(a, "solve_square");
    require_finite(b, "solve_square");
    if (a.rows() != a.cols()) {
        throw Error(ErrorKind::InvalidMatrix, "solve_square: matrix is not square");
    }
    if (b.rows() != a.rows()) {
        throw Error(ErrorKind::InvalidMatrix, "solve_square: right-hand side has wrong row count");
    }
    const Eigen::Index n = a.rows();
    if (n == 0) return CMatrix(0, b.cols());

    if (rank(a, tol) < n) {
        throw Error(ErrorKind::SingularMatrix, "solve_square: matrix is rank deficient");
    }
    Eigen::FullPivLU<CMatrix> lu(a);
    CMatrix x = lu.solve(b);

    const double bnorm = b.norm();
    const double resid = (a * x - b).norm();
    if (bnorm > 0.0 && resid > tol.residual_tol * bnorm) {
        throw Error(ErrorKind::SingularMatrix, "solve_square: residual above tolerance (ill-conditioned)");
    }
    return x;
}

CMatrix inverse(const CMatrix& a, const Tolerance& tol) {
    return solve_square(a, CMatrix::Identity(a.rows(), a.cols()), tol);
}

double GaussianSource::next_uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

cplx GaussianSource::next() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return cplx(r * std::cos(theta), r * std::sin(theta)) * std::numbers::sqrt2 * 0.5;
}

CMatrix random_complex_gaussian(Eigen::Index rows, Eigen::Index cols, GaussianSource& source) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = source.next();
    }
    return m;
}

CMatrix random_complex_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    GaussianSource source(seed);
    return random_complex_gaussian(rows, cols, source);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

CMatrix hcat(const CMatrix& left, const CMatrix& right) {
    if (left.cols() == 0 && right.cols() == 0) return CMatrix(std::max(left.rows(), right.rows()), 0);
    if (left.cols() == 0) return right;
    if (right.cols() == 0) return left;
    if (left.rows() != right.rows()) {
        throw Error(ErrorKind::InvalidMatrix, "hcat: row counts differ");
    }
    CMatrix out(left.rows(), left.cols() + right.cols());
    out << left, right;
    return out;
}

CMatrix vcat(const CMatrix& top, const CMatrix& bottom) {
    if (top.rows() == 0 && bottom.rows() == 0) return CMatrix(0, std::max(top.cols(), bottom.cols()));
    if (top.rows() == 0) return bottom;
    if (bottom.rows() == 0) return top;
    if (top.cols() != bottom.cols()) {
        throw Error(ErrorKind::InvalidMatrix, "vcat: column counts differ");
    }
    CMatrix out(top.rows() + bottom.rows(), top.cols());
    out << top, bottom;
    return out;
}

}  // namespace twrc
