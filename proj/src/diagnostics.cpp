#include "optdmd/diagnostics.hpp"
#include "optdmd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace optdmd {

namespace {

constexpr Index kExhaustiveLimit = 8;

std::vector<Index> exhaustive_assignment(const RMatrix& cost) {
    const Index r = cost.rows();
    std::vector<Index> perm(static_cast<std::size_t>(r));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::vector<Index> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (Index i = 0; i < r; ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Shortest augmenting path Hungarian method with row/column potentials.
std::vector<Index> hungarian_assignment(const RMatrix& cost) {
    const Index n = cost.rows();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<Index> p(n + 1, 0), way(n + 1, 0);
    for (Index i = 1; i <= n; ++i) {
        p[0] = i;
        Index j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const Index i0 = p[j0];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const Index j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<Index> assign(static_cast<std::size_t>(n));
    for (Index j = 1; j <= n; ++j) assign[static_cast<std::size_t>(p[j] - 1)] = j - 1;
    return assign;
}

// assignment[i] = index into `estimated` paired with truth(i).
std::vector<Index> optimal_pairing(const CVector& estimated, const CVector& truth) {
    require(estimated.size() == truth.size(), ErrorCode::LengthMismatch,
            "eigenvalue sets have different lengths");
    const Index r = truth.size();
    RMatrix cost(r, r);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < r; ++j) cost(i, j) = std::norm(estimated(j) - truth(i));
    if (r == 0) return {};
    return r <= kExhaustiveLimit ? exhaustive_assignment(cost) : hungarian_assignment(cost);
}

}  // namespace

CMatrix reconstruct_system_matrix(const DmdResult& result) {
    require(result.rank() >= 1, ErrorCode::ShapeMismatch, "result has no modes");
    require(result.modes.cols() == result.rank(), ErrorCode::ShapeMismatch,
            "mode count does not match eigenvalue count");
    return result.modes * result.eigenvalues.asDiagonal() * pinv(result.modes);
}

double snapshot_residual(const SnapshotSet& data, const CVector& alpha) {
    data.validate();
    const CMatrix h = data.states.transpose();
    const double total = h.norm();
    require(total > 0.0, ErrorCode::ZeroData, "snapshot matrix is zero");
    const ThinSvd f = thin_svd(build_phi(alpha, data.grid).phi, 1e-12);
    const CMatrix p = h - f.u * (f.u.adjoint() * h);
    return p.norm() / total;
}

CVector amplitudes(const DmdResult& result, const SnapshotSet& data, AmplitudeFit method) {
    data.validate();
    const Index r = result.rank();
    const Index n = data.state_dim();
    require(result.modes.rows() == n && result.modes.cols() == r, ErrorCode::ShapeMismatch,
            "modes do not match the state dimension");
    const CMatrix dyn = build_phi(result.eigenvalues, data.grid).phi;  // (m+1) x r

    if (method == AmplitudeFit::FirstSnapshot) {
        const CMatrix lhs = result.modes * dyn.row(0).asDiagonal();
        return lstsq(lhs, data.states.col(0)).col(0);
    }
    // vec(X) = sum_i b_i vec(phi_i e_i^T), e_i the time dynamics of mode i.
    const Index cols = data.count();
    CMatrix g(n * cols, r);
    for (Index i = 0; i < r; ++i) {
        for (Index j = 0; j < cols; ++j) g.block(j * n, i, n, 1) = result.modes.col(i) * dyn(j, i);
    }
    const CVector rhs = Eigen::Map<const CVector>(data.states.data(), n * cols);
    return lstsq(g, rhs).col(0);
}

CMatrix extrapolate(const DmdResult& result, const CVector& b, const TimeGrid& times) {
    require(b.size() == result.rank() && result.modes.cols() == result.rank(), ErrorCode::ShapeMismatch,
            "amplitude count does not match the mode count");
    const CMatrix dyn = build_phi(result.eigenvalues, times).phi;  // |t| x r
    CMatrix out = result.modes * b.asDiagonal() * dyn.transpose();
    require(out.allFinite(), ErrorCode::NonFinite, "extrapolated states overflow");
    return out;
}

double eigenvalue_match_error(const CVector& estimated, const CVector& truth) {
    const CVector matched = match_eigenvalues(estimated, truth);
    return (matched - truth).norm();
}

CVector match_eigenvalues(const CVector& estimated, const CVector& truth) {
    const std::vector<Index> pairing = optimal_pairing(estimated, truth);
    CVector out(truth.size());
    for (Index i = 0; i < truth.size(); ++i) out(i) = estimated(pairing[static_cast<std::size_t>(i)]);
    return out;
}

EllipseSummary confidence_ellipse(const CVector& samples, double level) {
    require(samples.size() >= 3, ErrorCode::InvalidArgument, "need at least three samples");
    require(level > 0.0 && level < 1.0, ErrorCode::InvalidArgument, "level must lie in (0, 1)");
    require(samples.allFinite(), ErrorCode::NonFinite, "samples contain NaN or Inf");
    const Index n = samples.size();

    // Work relative to the first sample so identical samples give an exactly
    // zero covariance.
    const CVector shifted = samples.array() - samples(0);
    const cplx offset = shifted.mean();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (Index i = 0; i < n; ++i) {
        const Eigen::Vector2d d(shifted(i).real() - offset.real(), shifted(i).imag() - offset.imag());
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(n - 1);

    EllipseSummary out;
    out.center = samples(0) + offset;
    if (cov.isZero(0.0)) return out;

    // Chi-square quantile with two degrees of freedom.
    const double quantile = -2.0 * std::log(1.0 - level);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
    out.semi_major = std::sqrt(quantile * ev(1));
    out.semi_minor = std::sqrt(quantile * ev(0));

    // Axis direction is defined up to sign; pick the upper half-plane.
    Eigen::Vector2d axis = es.eigenvectors().col(1);
    if (axis(1) < 0.0 || (axis(1) == 0.0 && axis(0) < 0.0)) axis = -axis;
    out.angle = std::atan2(axis(1), axis(0));
    if (out.angle >= std::numbers::pi) out.angle = 0.0;
    return out;
}

}  // namespace optdmd
