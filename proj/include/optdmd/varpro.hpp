#pragma once

#include <vector>

#include "optdmd/expbasis.hpp"
#include "optdmd/linalg.hpp"

namespace optdmd {

enum class JacobianMode { Full, Kaufman };

enum class SolveStatus { Converged, Stalled, MaxIters };

const char* to_string(SolveStatus status) noexcept;

struct VarProOptions {
    int max_outer_iters = 30;
    double nu_init = 1.0;
    double nu_up = 2.0;
    double nu_down = 3.0;
    int max_nu_raises = 52;
    double rel_tol = 1e-6;
    double grad_tol = 1e-8;
    double rank_tol = 1e-12;
    JacobianMode jacobian_mode = JacobianMode::Full;

    void validate() const;
};

struct VarProSolution {
    CVector alpha;
    CMatrix b;
    std::vector<double> residual_history;
    SolveStatus status = SolveStatus::MaxIters;
    int iterations = 0;
    // Phi(alpha) lost rank at the returned iterate; B uses a truncated
    // pseudoinverse.
    bool rank_deficient = false;
};

// B = Phi^+ H and P = H - Phi B at a fixed alpha, with the reduced SVD of Phi
// kept for the Jacobian.
struct Projection {
    CMatrix b;
    CMatrix p;
    ThinSvd basis_svd;
    CMatrix phi;

    double residual_norm() const { return p.norm(); }
};

Projection project_residual(const CMatrix& h, const CVector& alpha, const TimeGrid& grid,
                            double rank_tol);

// Column j is the column-major vectorisation of dP/dalpha_j, formed blockwise
// from the one-column derivative D_j.
CMatrix jacobian(const CMatrix& h, const CVector& alpha, const TimeGrid& grid,
                 const Projection& proj, JacobianMode mode);

// Solves min || [J; nu M] delta - [rho; 0] || with M = diag(scale) by QR.
// Zero entries of `scale` are replaced with 1.
CVector lm_step(const CMatrix& j, const CVector& rho, double nu, const RVector& scale);

// Column norms of J, the default Levenberg-Marquardt scaling.
RVector column_scaling(const CMatrix& j);

VarProSolution solve_varpro(const CMatrix& h, const TimeGrid& grid, const CVector& alpha0,
                            const VarProOptions& opts = {});

}  // namespace optdmd
