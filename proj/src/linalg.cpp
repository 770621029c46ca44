#include "optdmd/linalg.hpp"
#include "optdmd/error.hpp"

#include <limits>

namespace optdmd {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::SingularBackward: return "SingularBackward";
    case ErrorCode::SearchCapExceeded: return "SearchCapExceeded";
    case ErrorCode::RankConstraintViolated: return "RankConstraintViolated";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::NonDiagonalizable: return "NonDiagonalizable";
    case ErrorCode::EmptySpectrum: return "EmptySpectrum";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::ZeroData: return "ZeroData";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

ThinSvd thin_svd(const CMatrix& a, double rel_tol, RVector* full_s) {
    if (a.size() == 0) {
        if (full_s) full_s->resize(0);
        return {CMatrix(a.rows(), 0), RVector(0), CMatrix(a.cols(), 0)};
    }
    Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    if (full_s) *full_s = s;

    Index rank = 0;
    const double cutoff = rel_tol * s(0);
    while (rank < s.size() && s(rank) > cutoff && s(rank) > 0.0) ++rank;

    return {svd.matrixU().leftCols(rank), s.head(rank), svd.matrixV().leftCols(rank)};
}

RVector singular_values(const CMatrix& a) {
    if (a.size() == 0) return RVector(0);
    if (a.imag().isZero(0.0)) return Eigen::BDCSVD<RMatrix>(a.real()).singularValues();
    return Eigen::BDCSVD<CMatrix>(a).singularValues();
}

CMatrix lstsq(const CMatrix& a, const CMatrix& b) {
    return a.completeOrthogonalDecomposition().solve(b);
}

CMatrix pinv(const CMatrix& a, double rel_tol) {
    const ThinSvd f = thin_svd(a, rel_tol);
    return f.v * f.s.cwiseInverse().asDiagonal() * f.u.adjoint();
}

double condition_number(const CMatrix& a) {
    Eigen::BDCSVD<CMatrix> svd(a);
    const RVector& s = svd.singularValues();
    if (s.size() == 0) return 0.0;
    const double smin = s(s.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

bool all_finite(const CMatrix& a) {
    return a.allFinite();
}

}  // namespace optdmd
