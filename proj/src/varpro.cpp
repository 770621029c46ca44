#include "optdmd/varpro.hpp"
#include "optdmd/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace optdmd {

namespace {

// Residuals at this level relative to ||H|| are treated as an exact fit.
constexpr double kExactFitTol = 1e-13;
constexpr double kNuFloor = 1e-16;

void check_shapes(const CMatrix& h, const CVector& alpha, const TimeGrid& grid) {
    require(h.rows() == grid.size(), ErrorCode::ShapeMismatch,
            "data has " + std::to_string(h.rows()) + " rows but the time grid has " +
                std::to_string(grid.size()) + " samples");
    require(alpha.size() >= 1, ErrorCode::InvalidArgument, "alpha must be nonempty");
    require(h.rows() >= alpha.size(), ErrorCode::ShapeMismatch,
            "need at least as many samples as exponentials");
    require(h.allFinite(), ErrorCode::NonFinite, "data contains NaN or Inf");
}

}  // namespace

const char* to_string(SolveStatus status) noexcept {
    switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::Stalled: return "Stalled";
    case SolveStatus::MaxIters: return "MaxIters";
    }
    return "Unknown";
}

void VarProOptions::validate() const {
    require(max_outer_iters >= 1, ErrorCode::InvalidArgument, "max_outer_iters must be >= 1");
    require(nu_init > 0.0, ErrorCode::InvalidArgument, "nu_init must be positive");
    require(nu_up > 1.0 && nu_down > 1.0, ErrorCode::InvalidArgument,
            "nu_up and nu_down must exceed 1");
    require(max_nu_raises >= 0, ErrorCode::InvalidArgument, "max_nu_raises must be >= 0");
    require(rel_tol > 0.0 && grad_tol > 0.0, ErrorCode::InvalidArgument,
            "tolerances must be positive");
    require(rank_tol >= 0.0, ErrorCode::InvalidArgument, "rank_tol must be nonnegative");
}

Projection project_residual(const CMatrix& h, const CVector& alpha, const TimeGrid& grid,
                            double rank_tol) {
    check_shapes(h, alpha, grid);
    Projection out;
    out.phi = build_phi(alpha, grid).phi;
    out.basis_svd = thin_svd(out.phi, rank_tol);
    const ThinSvd& f = out.basis_svd;
    out.b = f.v * (f.s.cwiseInverse().asDiagonal() * (f.u.adjoint() * h));
    out.p = h - f.u * (f.u.adjoint() * h);
    return out;
}

CMatrix jacobian(const CMatrix& h, const CVector& alpha, const TimeGrid& grid,
                 const Projection& proj, JacobianMode mode) {
    check_shapes(h, alpha, grid);
    const Index m = h.rows();
    const Index n = h.cols();
    const Index k = alpha.size();
    const ThinSvd& f = proj.basis_svd;
    require(proj.b.rows() == k && proj.b.cols() == n && proj.p.rows() == m &&
                proj.p.cols() == n && f.u.rows() == m && f.v.rows() == k,
            ErrorCode::ShapeMismatch, "projection is inconsistent with the data");

    CMatrix jac(m * n, k);
    for (Index j = 0; j < k; ++j) {
        const CVector d = build_dphi(alpha, grid, j).values;

        // (D_j - U (U^* D_j)) B, all with a single nonzero column.
        const CVector w = d - f.u * (f.u.adjoint() * d);
        CMatrix block = w * proj.b.row(j);

        if (mode == JacobianMode::Full) {
            // U (Sigma^-1 (V^* (D_j^* P))); D_j^* P has the single nonzero row j.
            const Eigen::RowVectorXcd dp = d.adjoint() * proj.p;
            const CVector vj = f.v.row(j).adjoint();
            const CMatrix small = f.s.cwiseInverse().asDiagonal() * (vj * dp);
            block.noalias() += f.u * small;
        }
        jac.col(j) = -Eigen::Map<const CVector>(block.data(), m * n);
    }
    return jac;
}

RVector column_scaling(const CMatrix& j) {
    return j.colwise().norm().transpose();
}

CVector lm_step(const CMatrix& j, const CVector& rho, double nu, const RVector& scale) {
    const Index k = j.cols();
    require(rho.size() == j.rows(), ErrorCode::ShapeMismatch,
            "residual length does not match the Jacobian");
    require(scale.size() == k, ErrorCode::ShapeMismatch, "scaling length does not match the Jacobian");
    require(nu >= 0.0 && std::isfinite(nu), ErrorCode::InvalidArgument, "nu must be finite and >= 0");

    CMatrix aug = CMatrix::Zero(j.rows() + k, k);
    aug.topRows(j.rows()) = j;
    for (Index c = 0; c < k; ++c) {
        require(scale(c) >= 0.0, ErrorCode::InvalidArgument, "scalings must be nonnegative");
        aug(j.rows() + c, c) = nu * (scale(c) == 0.0 ? 1.0 : scale(c));
        require(aug.col(c).squaredNorm() > 0.0, ErrorCode::SingularSystem,
                "augmented system has a zero column " + std::to_string(c));
    }
    CVector rhs = CVector::Zero(j.rows() + k);
    rhs.head(j.rows()) = rho;
    return aug.colPivHouseholderQr().solve(rhs);
}

VarProSolution solve_varpro(const CMatrix& h, const TimeGrid& grid, const CVector& alpha0,
                            const VarProOptions& opts) {
    opts.validate();
    check_shapes(h, alpha0, grid);

    const double h_norm = h.norm();
    const double exact_fit = kExactFitTol * h_norm;

    VarProSolution sol;
    sol.alpha = alpha0;
    Projection proj = project_residual(h, sol.alpha, grid, opts.rank_tol);
    double res = proj.residual_norm();
    sol.residual_history.push_back(res);

    auto finish = [&](SolveStatus status) {
        sol.status = status;
        sol.b = proj.b;
        sol.rank_deficient = proj.basis_svd.rank() < sol.alpha.size();
        return sol;
    };

    if (res <= exact_fit) return finish(SolveStatus::Converged);

    double nu = opts.nu_init;
    for (int iter = 0; iter < opts.max_outer_iters; ++iter) {
        const CMatrix jac = jacobian(h, sol.alpha, grid, proj, opts.jacobian_mode);
        const CVector rho = Eigen::Map<const CVector>(proj.p.data(), proj.p.size());

        // J^* rho is the exact gradient in both Jacobian modes since the
        // second term lies in range(Phi), orthogonal to rho.
        const double grad = (jac.adjoint() * rho).norm();
        if (grad <= opts.grad_tol * jac.norm() * res) return finish(SolveStatus::Converged);

        const RVector scale = column_scaling(jac);
        bool accepted = false;
        for (int raise = 0; raise <= opts.max_nu_raises; ++raise) {
            const CVector trial = sol.alpha - lm_step(jac, rho, nu, scale);
            if (trial.allFinite()) {
                try {
                    Projection trial_proj = project_residual(h, trial, grid, opts.rank_tol);
                    const double trial_res = trial_proj.residual_norm();
                    if (trial_res < res) {
                        const double improvement = (res - trial_res) / res;
                        sol.alpha = trial;
                        proj = std::move(trial_proj);
                        res = trial_res;
                        sol.residual_history.push_back(res);
                        ++sol.iterations;
                        nu = std::max(nu / opts.nu_down, kNuFloor);
                        accepted = true;
                        if (res <= exact_fit || improvement < opts.rel_tol)
                            return finish(SolveStatus::Converged);
                        break;
                    }
                } catch (const Error& e) {
                    // An overflowing trial point counts as a rejected step.
                    if (e.code() != ErrorCode::NonFinite) throw;
                }
            }
            nu *= opts.nu_up;
        }
        if (!accepted) return finish(SolveStatus::Stalled);
    }
    return finish(SolveStatus::MaxIters);
}

}  // namespace optdmd
