#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "optdmd/linalg.hpp"

namespace optdmd {

enum class DmdMethod { Exact, FB, TLS, Optimized, ApproxOptimized };

std::string_view to_string(DmdMethod method) noexcept;
std::optional<DmdMethod> parse_method(std::string_view name);

// Snapshot pairs y_j = A x_j with nominal spacing dt.
struct SnapshotPairs {
    CMatrix x;
    CMatrix y;
    double dt = 1.0;

    void validate() const;
};

struct DmdResult {
    CVector eigenvalues;    // continuous time
    CMatrix modes;          // unit-norm columns
    RVector amplitudes;     // nonnegative
    DmdMethod method = DmdMethod::Exact;
    CVector discrete_eigs;  // empty for methods that work in continuous time

    Index rank() const { return eigenvalues.size(); }
};

// Scales every mode to unit norm, rotates it so its largest-magnitude entry is
// real and positive, and sorts modes by descending amplitude.
void normalize_modes(DmdResult& result);

// Least-squares |b| for x0 = modes * b; used as the default amplitude of the
// pairwise methods.
RVector first_snapshot_amplitudes(const CMatrix& modes, const CVector& x0);

DmdResult exact_dmd(const SnapshotPairs& pairs, Index r);

// Projected propagators on the first r POD modes of X.
struct FbPropagators {
    CMatrix forward;   // A_f
    CMatrix backward;  // A_b
    CMatrix combined;  // selected square root of A_f A_b^{-1}
    CMatrix pod_basis; // n x r
};

FbPropagators fb_propagators(const SnapshotPairs& pairs, Index r);
DmdResult fb_dmd(const SnapshotPairs& pairs, Index r);

inline constexpr Index kSignSearchCap = 24;

// Among V diag(+-sqrt(eigvals)) V^{-1}, returns the matrix closest to
// `reference` in the Frobenius norm.
CMatrix sqrt_sign_select(const CVector& eigvals, const CMatrix& eigvecs, const CMatrix& reference);

DmdResult tls_dmd(const SnapshotPairs& pairs, Index r);

struct FixedRank { Index rank; };
struct GavishDonohoKnownSigma { double sigma; };
struct GavishDonohoMedian {};
struct NuclearEnergy { double fraction; };

using RankStrategy = std::variant<FixedRank, GavishDonohoKnownSigma, GavishDonohoMedian, NuclearEnergy>;

struct RankSelection {
    RankStrategy strategy;
    Index chosen_rank = 0;
    double threshold = 0.0;  // singular-value cutoff, 0 for Fixed/NuclearEnergy
};

// Optimal hard-threshold coefficient for known noise, beta = aspect ratio <= 1.
double gavish_donoho_lambda(double beta);
// Approximate coefficient for the median-based threshold.
double gavish_donoho_omega(double beta);

RankSelection select_rank(const RVector& singular_values, Index n_rows, Index n_cols,
                          const RankStrategy& strategy);

}  // namespace optdmd
