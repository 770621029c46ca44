#pragma once

#include <span>
#include <vector>

#include "optdmd/linalg.hpp"

namespace optdmd {

// Strictly increasing, finite sample instants.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(RVector times);
    explicit TimeGrid(const std::vector<double>& times);

    static TimeGrid equispaced(Index count, double dt, double t0 = 0.0);

    Index size() const { return times_.size(); }
    double operator[](Index i) const { return times_(i); }
    const RVector& times() const { return times_; }

    // Differences t[i+1] - t[i], length size() - 1.
    RVector steps() const;

private:
    RVector times_;
};

// Phi(alpha) with phi(i, j) = exp(alpha[j] * t[i]).
struct ExpBasis {
    CMatrix phi;
    CVector alpha;
    TimeGrid grid;
};

// D_j = dPhi/dalpha_j: a matrix of `cols` columns whose only nonzero column is
// `column`.
struct ColumnDerivative {
    Index column = 0;
    Index cols = 0;
    CVector values;

    CMatrix to_dense() const;
};

ExpBasis build_phi(const CVector& alpha, const TimeGrid& grid);

ColumnDerivative build_dphi(const CVector& alpha, const TimeGrid& grid, Index j);

// Principal branch: log(lambda_d) / dt. Frequencies at or beyond Nyquist alias.
cplx discrete_to_continuous(cplx lambda_d, double dt);
cplx continuous_to_discrete(cplx alpha, double dt);

CVector discrete_to_continuous(const CVector& lambda_d, double dt);

}  // namespace optdmd
