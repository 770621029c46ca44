#pragma once

#include <complex>

#include <Eigen/Dense>

namespace optdmd {

using Index = Eigen::Index;
using cplx = std::complex<double>;

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Reduced SVD with singular values below rel_tol * sigma_max discarded.
struct ThinSvd {
    CMatrix u;  // rows x rank
    RVector s;  // rank, descending
    CMatrix v;  // cols x rank

    Index rank() const { return s.size(); }
};

// All singular values are returned in `full_s`; the factors are truncated to
// the numerical rank.
ThinSvd thin_svd(const CMatrix& a, double rel_tol, RVector* full_s = nullptr);

// Singular values only, descending.
RVector singular_values(const CMatrix& a);

// Minimum-norm least-squares solve of a x = b.
CMatrix lstsq(const CMatrix& a, const CMatrix& b);

CMatrix pinv(const CMatrix& a, double rel_tol = 1e-12);

// 2-norm condition number from the singular values; inf when singular.
double condition_number(const CMatrix& a);

bool all_finite(const CMatrix& a);

}  // namespace optdmd
