#include "optdmd/expbasis.hpp"
#include "optdmd/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace optdmd {

namespace {

const double kMaxExponent = std::log(std::numeric_limits<double>::max());

void check_grid(const RVector& t) {
    for (Index i = 0; i < t.size(); ++i) {
        require(std::isfinite(t(i)), ErrorCode::NonFinite,
                "time grid entry " + std::to_string(i) + " is not finite");
        if (i > 0) {
            require(t(i - 1) < t(i), ErrorCode::NonMonotoneTime,
                    "time grid is not strictly increasing at index " + std::to_string(i));
        }
    }
}

void check_alpha(const CVector& alpha, const TimeGrid& grid) {
    require(alpha.size() >= 1, ErrorCode::InvalidArgument, "alpha must be nonempty");
    require(alpha.allFinite(), ErrorCode::NonFinite, "alpha contains NaN or Inf");
    const RVector& t = grid.times();
    if (t.size() == 0) return;
    const double tmin = t.minCoeff();
    const double tmax = t.maxCoeff();
    for (Index j = 0; j < alpha.size(); ++j) {
        const double re = alpha(j).real();
        const double worst = std::max(re * tmin, re * tmax);
        require(worst <= kMaxExponent, ErrorCode::NonFinite,
                "exp(alpha[" + std::to_string(j) + "] t) overflows on the grid");
    }
}

}  // namespace

TimeGrid::TimeGrid(RVector times) : times_(std::move(times)) {
    check_grid(times_);
}

TimeGrid::TimeGrid(const std::vector<double>& times)
    : TimeGrid(RVector(Eigen::Map<const RVector>(times.data(), static_cast<Index>(times.size())))) {}

TimeGrid TimeGrid::equispaced(Index count, double dt, double t0) {
    require(dt > 0.0, ErrorCode::DegenerateGrid, "time step must be positive");
    RVector t(count);
    for (Index i = 0; i < count; ++i) t(i) = t0 + static_cast<double>(i) * dt;
    return TimeGrid(std::move(t));
}

RVector TimeGrid::steps() const {
    if (size() < 2) return RVector(0);
    return times_.tail(size() - 1) - times_.head(size() - 1);
}

CMatrix ColumnDerivative::to_dense() const {
    CMatrix d = CMatrix::Zero(values.size(), cols);
    d.col(column) = values;
    return d;
}

ExpBasis build_phi(const CVector& alpha, const TimeGrid& grid) {
    check_alpha(alpha, grid);
    const RVector& t = grid.times();
    CMatrix phi(t.size(), alpha.size());
    for (Index j = 0; j < alpha.size(); ++j) {
        for (Index i = 0; i < t.size(); ++i) phi(i, j) = std::exp(alpha(j) * t(i));
    }
    require(phi.allFinite(), ErrorCode::NonFinite, "exponential basis is not finite");
    return {std::move(phi), alpha, grid};
}

ColumnDerivative build_dphi(const CVector& alpha, const TimeGrid& grid, Index j) {
    require(j >= 0 && j < alpha.size(), ErrorCode::IndexOutOfRange,
            "derivative index " + std::to_string(j) + " out of range");
    check_alpha(alpha, grid);
    const RVector& t = grid.times();
    ColumnDerivative d{j, alpha.size(), CVector(t.size())};
    for (Index i = 0; i < t.size(); ++i) d.values(i) = t(i) * std::exp(alpha(j) * t(i));
    require(d.values.allFinite(), ErrorCode::NonFinite, "basis derivative is not finite");
    return d;
}

cplx discrete_to_continuous(cplx lambda_d, double dt) {
    require(dt > 0.0, ErrorCode::InvalidArgument, "time step must be positive");
    require(lambda_d != cplx(0.0, 0.0), ErrorCode::ZeroEigenvalue,
            "zero discrete eigenvalue has no continuous-time counterpart");
    return std::log(lambda_d) / dt;
}

cplx continuous_to_discrete(cplx alpha, double dt) {
    require(dt > 0.0, ErrorCode::InvalidArgument, "time step must be positive");
    return std::exp(alpha * dt);
}

CVector discrete_to_continuous(const CVector& lambda_d, double dt) {
    CVector out(lambda_d.size());
    for (Index i = 0; i < lambda_d.size(); ++i) out(i) = discrete_to_continuous(lambda_d(i), dt);
    return out;
}

}  // namespace optdmd
