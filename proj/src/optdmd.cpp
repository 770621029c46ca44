#include "optdmd/optdmd.hpp"
#include "optdmd/error.hpp"

#include <cmath>
#include <string>

namespace optdmd {

namespace {

constexpr double kNumericalRankTol = 1e-12;

void check_rank(const SnapshotSet& data, Index r) {
    require(r >= 1, ErrorCode::InvalidArgument, "rank must be >= 1");
    require(r <= data.count(), ErrorCode::RankTooLarge,
            "rank " + std::to_string(r) + " exceeds the number of snapshots");
}

CVector starting_point(const SnapshotSet& data, const OptDmdConfig& cfg) {
    if (!cfg.init_alpha) return init_alpha(data, cfg.rank);
    require(cfg.init_alpha->size() == cfg.rank, ErrorCode::LengthMismatch,
            "initial alpha length must equal the rank");
    return *cfg.init_alpha;
}

// Mode i is column i of coeffs^T lifted by `lift`; its norm is the amplitude.
DmdResult modes_from_coefficients(DmdMethod method, const CVector& alpha, const CMatrix& lifted) {
    DmdResult out;
    out.method = method;
    out.eigenvalues = alpha;
    out.modes = lifted;
    out.amplitudes = lifted.colwise().norm().transpose();
    normalize_modes(out);
    return out;
}

}  // namespace

void SnapshotSet::validate() const {
    require(states.cols() == grid.size(), ErrorCode::ShapeMismatch,
            "snapshot count " + std::to_string(states.cols()) + " does not match grid length " +
                std::to_string(grid.size()));
    require(states.rows() >= 1 && states.cols() >= 1, ErrorCode::ShapeMismatch, "snapshot set is empty");
    require(states.allFinite(), ErrorCode::NonFinite, "snapshots contain NaN or Inf");
}

SnapshotPairs SnapshotSet::pairs() const {
    validate();
    require(count() >= 2, ErrorCode::ShapeMismatch, "need at least two snapshots to form pairs");
    const RVector steps = grid.steps();
    const double dt = steps.mean();
    require((steps.array() - dt).abs().maxCoeff() <= 1e-9 * dt, ErrorCode::DegenerateGrid,
            "pairwise DMD needs equispaced samples");
    return {states.leftCols(count() - 1), states.rightCols(count() - 1), dt};
}

CVector init_alpha(const SnapshotSet& data, Index r) {
    data.validate();
    require(data.count() >= 2, ErrorCode::ShapeMismatch, "initialization needs at least two snapshots");
    require(r >= 1, ErrorCode::InvalidArgument, "rank must be >= 1");
    const Index m = data.count() - 1;
    const RVector steps = data.grid.steps();
    require((steps.array() > 0.0).all(), ErrorCode::DegenerateGrid, "time steps must be nonzero");

    const CMatrix x1 = data.states.leftCols(m);
    const CMatrix x2 = data.states.rightCols(m);
    const CMatrix y = 0.5 * (x1 + x2);
    const CMatrix z = (x2 - x1) * steps.cwiseInverse().asDiagonal();

    const ThinSvd f = thin_svd(y, kNumericalRankTol);
    require(r <= f.rank(), ErrorCode::RankTooLarge,
            "rank " + std::to_string(r) + " exceeds numerical rank " + std::to_string(f.rank()) +
                " of the averaged snapshots");
    const CMatrix u = f.u.leftCols(r);
    const CMatrix atilde = u.adjoint() * z * f.v.leftCols(r) * f.s.head(r).cwiseInverse().asDiagonal();
    return Eigen::ComplexEigenSolver<CMatrix>(atilde, false).eigenvalues();
}

OptDmdOutput optimized_dmd(const SnapshotSet& data, const OptDmdConfig& cfg) {
    data.validate();
    check_rank(data, cfg.rank);
    const CVector alpha0 = starting_point(data, cfg);

    VarProSolution sol = solve_varpro(data.states.transpose(), data.grid, alpha0, cfg.varpro);
    DmdResult res = modes_from_coefficients(DmdMethod::Optimized, sol.alpha, sol.b.transpose());
    return {std::move(res), std::move(sol)};
}

OptDmdOutput approx_optimized_dmd(const SnapshotSet& data, const OptDmdConfig& cfg) {
    data.validate();
    check_rank(data, cfg.rank);
    const Index r = cfg.rank;
    require(r <= data.state_dim(), ErrorCode::RankTooLarge, "rank exceeds the state dimension");
    const CVector alpha0 = starting_point(data, cfg);

    Eigen::BDCSVD<CMatrix> svd(data.states, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const CMatrix ur = svd.matrixU().leftCols(r);
    const CMatrix target = svd.matrixV().leftCols(r).conjugate() * svd.singularValues().head(r).asDiagonal();

    VarProSolution sol = solve_varpro(target, data.grid, alpha0, cfg.varpro);
    DmdResult res = modes_from_coefficients(DmdMethod::ApproxOptimized, sol.alpha, ur * sol.b.transpose());
    return {std::move(res), std::move(sol)};
}

OptDmdOutput fit(const SnapshotSet& data, const OptDmdConfig& cfg) {
    return cfg.variant == OptDmdVariant::Full ? optimized_dmd(data, cfg) : approx_optimized_dmd(data, cfg);
}

}  // namespace optdmd
