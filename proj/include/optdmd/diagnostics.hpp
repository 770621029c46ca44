#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optdmd/dmd.hpp"
#include "optdmd/optdmd.hpp"

namespace optdmd {

struct EllipseSummary {
    cplx center;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double angle = 0.0;  // radians in [0, pi)
};

struct TrialRecord {
    DmdMethod method = DmdMethod::Exact;
    Index m = 0;
    double sigma2 = 0.0;
    Index trial = 0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;      // error code name when !ok
    double a_error = 0.0;   // Frobenius; NaN when the example has no system matrix
    double eig_error = 0.0;
    double recon_error = 0.0;
    double wall_time = 0.0; // seconds
    CVector matched_eigs;   // estimates paired with the truth ordering
};

// A ~ modes diag(lambda) modes^+ using continuous-time eigenvalues.
CMatrix reconstruct_system_matrix(const DmdResult& result);

// ||X^T - Phi Phi^+ X^T||_F / ||X^T||_F.
double snapshot_residual(const SnapshotSet& data, const CVector& alpha);

enum class AmplitudeFit { FirstSnapshot, FullLstsq };

// Complex b in z(t) ~ sum_i b_i phi_i exp(lambda_i t), fitted on the data grid.
CVector amplitudes(const DmdResult& result, const SnapshotSet& data, AmplitudeFit method);

CMatrix extrapolate(const DmdResult& result, const CVector& b, const TimeGrid& times);

// Minimum over pairings of the l2 distance between the two eigenvalue sets.
double eigenvalue_match_error(const CVector& estimated, const CVector& truth);

// Estimated eigenvalues reordered so entry i is paired with truth(i).
CVector match_eigenvalues(const CVector& estimated, const CVector& truth);

// Gaussian confidence ellipse of complex samples viewed as 2-D points.
EllipseSummary confidence_ellipse(const CVector& samples, double level);

}  // namespace optdmd
