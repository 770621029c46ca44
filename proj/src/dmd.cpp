#include "optdmd/dmd.hpp"
#include "optdmd/error.hpp"
#include "optdmd/expbasis.hpp"

#include <bit>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace optdmd {

namespace {

constexpr double kNumericalRankTol = 1e-12;
constexpr double kConditionCap = 1e12;

ThinSvd pod(const CMatrix& x, Index r) {
    ThinSvd f = thin_svd(x, kNumericalRankTol);
    require(r >= 1, ErrorCode::InvalidArgument, "rank must be >= 1");
    require(r <= f.rank(), ErrorCode::RankTooLarge,
            "requested rank " + std::to_string(r) + " exceeds numerical rank " +
                std::to_string(f.rank()));
    return {f.u.leftCols(r), f.s.head(r), f.v.leftCols(r)};
}

// Fills eigenvalues (continuous and discrete), normalizes modes and assigns
// first-snapshot amplitudes.
DmdResult assemble(DmdMethod method, const CVector& discrete, const CMatrix& modes,
                   const CVector& x0, double dt) {
    DmdResult out;
    out.method = method;
    out.discrete_eigs = discrete;
    out.eigenvalues = discrete_to_continuous(discrete, dt);
    out.modes = modes;
    out.amplitudes = RVector::Zero(discrete.size());
    normalize_modes(out);
    out.amplitudes = first_snapshot_amplitudes(out.modes, x0);
    normalize_modes(out);
    return out;
}

std::vector<double> best_signs(const CVector& eigvals, const CMatrix& eigvecs, const CMatrix& reference) {
    const Index r = eigvals.size();
    require(eigvecs.rows() == r && eigvecs.cols() == r && reference.rows() == r &&
                reference.cols() == r,
            ErrorCode::ShapeMismatch, "sign search inputs must be r x r");
    require(r <= kSignSearchCap, ErrorCode::SearchCapExceeded,
            "sign search over 2^" + std::to_string(r) + " roots exceeds the cap of 2^" +
                std::to_string(kSignSearchCap));
    require(condition_number(eigvecs) <= kConditionCap, ErrorCode::NonDiagonalizable,
            "eigenvector matrix is numerically singular");

    const CMatrix w = eigvecs.inverse();  // rows are left eigenvectors
    CVector root(r);
    for (Index i = 0; i < r; ++i) root(i) = std::sqrt(eigvals(i));

    // ||sum_i s_i T_i - R||^2 = s^T G s - 2 c^T s + const with T_i = root_i v_i w_i.
    const CMatrix vv = eigvecs.adjoint() * eigvecs;
    const CMatrix ww = w.conjugate() * w.transpose();
    RMatrix g(r, r);
    RVector c(r);
    for (Index i = 0; i < r; ++i) {
        for (Index k = 0; k < r; ++k)
            g(i, k) = (std::conj(root(i)) * root(k) * vv(i, k) * ww(i, k)).real();
        const cplx proj = eigvecs.col(i).adjoint() * reference * w.row(i).adjoint();
        c(i) = (std::conj(root(i)) * proj).real();
    }

    std::vector<double> s(static_cast<std::size_t>(r), 1.0);
    RVector gs = g * RVector::Ones(r);
    double value = gs.sum() - 2.0 * c.sum();
    double best = value;
    std::vector<double> best_s = s;

    // Gray-code walk: one sign flips per step.
    const unsigned long long total = 1ULL << r;
    for (unsigned long long step = 1; step < total; ++step) {
        const Index i = static_cast<Index>(std::countr_zero(step));
        const double si = s[static_cast<std::size_t>(i)];
        value += -4.0 * si * gs(i) + 4.0 * g(i, i) + 4.0 * c(i) * si;
        gs -= 2.0 * si * g.col(i);
        s[static_cast<std::size_t>(i)] = -si;
        if (value < best) {
            best = value;
            best_s = s;
        }
    }
    return best_s;
}

}  // namespace

std::string_view to_string(DmdMethod method) noexcept {
    switch (method) {
    case DmdMethod::Exact: return "exact";
    case DmdMethod::FB: return "fb";
    case DmdMethod::TLS: return "tls";
    case DmdMethod::Optimized: return "opt";
    case DmdMethod::ApproxOptimized: return "opt-approx";
    }
    return "unknown";
}

std::optional<DmdMethod> parse_method(std::string_view name) {
    for (DmdMethod m : {DmdMethod::Exact, DmdMethod::FB, DmdMethod::TLS, DmdMethod::Optimized,
                        DmdMethod::ApproxOptimized}) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

void SnapshotPairs::validate() const {
    require(x.rows() == y.rows() && x.cols() == y.cols(), ErrorCode::ShapeMismatch,
            "X and Y must have identical shapes");
    require(x.cols() >= 1 && x.rows() >= 1, ErrorCode::ShapeMismatch, "snapshot pairs are empty");
    require(dt > 0.0 && std::isfinite(dt), ErrorCode::InvalidArgument, "dt must be positive");
    require(x.allFinite() && y.allFinite(), ErrorCode::NonFinite, "snapshots contain NaN or Inf");
}

void normalize_modes(DmdResult& result) {
    const Index r = result.modes.cols();
    for (Index i = 0; i < r; ++i) {
        auto col = result.modes.col(i);
        const double norm = col.norm();
        if (norm == 0.0) continue;
        Index imax = 0;
        col.cwiseAbs().maxCoeff(&imax);
        const cplx phase = col(imax) / std::abs(col(imax));
        col /= (norm * phase);
    }

    if (result.amplitudes.size() != r) return;
    std::vector<Index> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return result.amplitudes(a) > result.amplitudes(b);
    });
    auto permute = [&](auto& v) {
        auto copy = v;
        for (Index i = 0; i < r; ++i) v(i) = copy(order[static_cast<std::size_t>(i)]);
    };
    permute(result.amplitudes);
    permute(result.eigenvalues);
    if (result.discrete_eigs.size() == r) permute(result.discrete_eigs);
    const CMatrix modes = result.modes;
    for (Index i = 0; i < r; ++i) result.modes.col(i) = modes.col(order[static_cast<std::size_t>(i)]);
}

RVector first_snapshot_amplitudes(const CMatrix& modes, const CVector& x0) {
    return lstsq(modes, x0).col(0).cwiseAbs();
}

DmdResult exact_dmd(const SnapshotPairs& pairs, Index r) {
    pairs.validate();
    const ThinSvd f = pod(pairs.x, r);
    const CMatrix yvs = pairs.y * f.v * f.s.cwiseInverse().asDiagonal();
    const CMatrix atilde = f.u.adjoint() * yvs;

    Eigen::ComplexEigenSolver<CMatrix> es(atilde);
    const CMatrix& w = es.eigenvectors();
    CMatrix modes = yvs * w;
    for (Index i = 0; i < r; ++i) {
        // Modes of zero eigenvalues vanish; fall back to the projected mode.
        if (modes.col(i).norm() <= 1e-14 * yvs.norm()) modes.col(i) = f.u * w.col(i);
    }
    return assemble(DmdMethod::Exact, es.eigenvalues(), modes, pairs.x.col(0), pairs.dt);
}

CMatrix sqrt_sign_select(const CVector& eigvals, const CMatrix& eigvecs, const CMatrix& reference) {
    const std::vector<double> s = best_signs(eigvals, eigvecs, reference);
    CVector root(eigvals.size());
    for (Index i = 0; i < eigvals.size(); ++i)
        root(i) = s[static_cast<std::size_t>(i)] * std::sqrt(eigvals(i));
    return eigvecs * root.asDiagonal() * eigvecs.inverse();
}

namespace {

struct FbParts {
    FbPropagators props;
    CVector eigvals;
    CMatrix eigvecs;
};

FbParts fb_parts(const SnapshotPairs& pairs, Index r) {
    pairs.validate();
    const ThinSvd f = pod(pairs.x, r);
    const Index rank_y = thin_svd(pairs.y, kNumericalRankTol).rank();
    require(r <= rank_y, ErrorCode::RankTooLarge,
            "requested rank " + std::to_string(r) + " exceeds numerical rank of Y " +
                std::to_string(rank_y));

    const CMatrix xt = f.u.adjoint() * pairs.x;
    const CMatrix yt = f.u.adjoint() * pairs.y;

    FbParts out;
    out.props.pod_basis = f.u;
    out.props.forward = yt * pinv(xt, kNumericalRankTol);
    out.props.backward = xt * pinv(yt, kNumericalRankTol);
    require(condition_number(out.props.backward) <= kConditionCap, ErrorCode::SingularBackward,
            "backward propagator is numerically singular");

    const CMatrix ratio = out.props.forward * out.props.backward.inverse();
    Eigen::ComplexEigenSolver<CMatrix> es(ratio);
    const std::vector<double> s = best_signs(es.eigenvalues(), es.eigenvectors(), out.props.forward);
    out.eigvals.resize(r);
    for (Index i = 0; i < r; ++i)
        out.eigvals(i) = s[static_cast<std::size_t>(i)] * std::sqrt(es.eigenvalues()(i));
    out.eigvecs = es.eigenvectors();
    out.props.combined = out.eigvecs * out.eigvals.asDiagonal() * out.eigvecs.inverse();
    return out;
}

}  // namespace

FbPropagators fb_propagators(const SnapshotPairs& pairs, Index r) {
    return fb_parts(pairs, r).props;
}

DmdResult fb_dmd(const SnapshotPairs& pairs, Index r) {
    const FbParts parts = fb_parts(pairs, r);
    return assemble(DmdMethod::FB, parts.eigvals, parts.props.pod_basis * parts.eigvecs,
                    pairs.x.col(0), pairs.dt);
}

DmdResult tls_dmd(const SnapshotPairs& pairs, Index r) {
    pairs.validate();
    const Index m = pairs.x.cols();
    require(2 * r < m, ErrorCode::RankConstraintViolated,
            "total-least-squares DMD needs r < m/2 (r = " + std::to_string(r) +
                ", m = " + std::to_string(m) + ")");
    const ThinSvd f = pod(pairs.x, r);

    CMatrix z(2 * r, m);
    z.topRows(r) = f.u.adjoint() * pairs.x;
    z.bottomRows(r) = f.u.adjoint() * pairs.y;
    Eigen::BDCSVD<CMatrix> zsvd(z, Eigen::ComputeThinU);
    const CMatrix& uz = zsvd.matrixU();
    const CMatrix u11 = uz.topLeftCorner(r, r);
    const CMatrix u21 = uz.block(r, 0, r, r);
    require(condition_number(u11) <= kConditionCap, ErrorCode::SingularBlock,
            "leading block of the stacked singular vectors is numerically singular");

    const CMatrix atilde = u21 * u11.inverse();
    Eigen::ComplexEigenSolver<CMatrix> es(atilde);
    return assemble(DmdMethod::TLS, es.eigenvalues(), f.u * es.eigenvectors(), pairs.x.col(0),
                    pairs.dt);
}

double gavish_donoho_lambda(double beta) {
    require(beta > 0.0 && beta <= 1.0, ErrorCode::InvalidArgument, "aspect ratio must lie in (0, 1]");
    const double bp1 = beta + 1.0;
    return std::sqrt(2.0 * bp1 + 8.0 * beta / (bp1 + std::sqrt(beta * beta + 14.0 * beta + 1.0)));
}

double gavish_donoho_omega(double beta) {
    require(beta > 0.0 && beta <= 1.0, ErrorCode::InvalidArgument, "aspect ratio must lie in (0, 1]");
    return 0.56 * beta * beta * beta - 0.95 * beta * beta + 1.82 * beta + 1.43;
}

RankSelection select_rank(const RVector& sv, Index n_rows, Index n_cols, const RankStrategy& strategy) {
    require(n_rows >= 1 && n_cols >= 1, ErrorCode::InvalidArgument, "matrix dimensions must be positive");
    const Index max_rank = std::min(n_rows, n_cols);
    require(sv.size() >= 1, ErrorCode::EmptySpectrum, "no singular values given");
    for (Index i = 0; i < sv.size(); ++i) {
        require(sv(i) >= 0.0 && std::isfinite(sv(i)), ErrorCode::InvalidArgument,
                "singular values must be finite and nonnegative");
        require(i == 0 || sv(i) <= sv(i - 1), ErrorCode::InvalidArgument,
                "singular values must be sorted in descending order");
    }
    require(sv(0) > 0.0, ErrorCode::EmptySpectrum, "all singular values are zero");

    RankSelection out{strategy, 0, 0.0};
    auto count_above = [&](double tau) {
        Index c = 0;
        while (c < sv.size() && sv(c) > tau) ++c;
        return c;
    };
    const double beta = static_cast<double>(max_rank) / static_cast<double>(std::max(n_rows, n_cols));

    if (const auto* fixed = std::get_if<FixedRank>(&strategy)) {
        require(fixed->rank >= 1 && fixed->rank <= max_rank, ErrorCode::RankTooLarge,
                "fixed rank out of range");
        out.chosen_rank = fixed->rank;
        return out;
    }
    if (const auto* known = std::get_if<GavishDonohoKnownSigma>(&strategy)) {
        require(known->sigma >= 0.0, ErrorCode::InvalidArgument, "noise level must be nonnegative");
        out.threshold = gavish_donoho_lambda(beta) *
                        std::sqrt(static_cast<double>(std::max(n_rows, n_cols))) * known->sigma;
        out.chosen_rank = count_above(out.threshold);
    } else if (std::holds_alternative<GavishDonohoMedian>(strategy)) {
        std::vector<double> v(sv.data(), sv.data() + sv.size());
        const std::size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
        double median = v[mid];
        if (v.size() % 2 == 0) {
            const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
            median = 0.5 * (median + lower);
        }
        out.threshold = gavish_donoho_omega(beta) * median;
        out.chosen_rank = count_above(out.threshold);
    } else {
        const double p = std::get<NuclearEnergy>(strategy).fraction;
        require(p > 0.0 && p <= 1.0, ErrorCode::InvalidArgument, "energy fraction must lie in (0, 1]");
        const double total = sv.sum();
        double cum = 0.0;
        Index r = 0;
        while (r < sv.size()) {
            cum += sv(r);
            ++r;
            if (cum / total >= p) break;
        }
        out.chosen_rank = r;
    }
    out.chosen_rank = std::clamp<Index>(out.chosen_rank, 1, max_rank);
    return out;
}

}  // namespace optdmd
