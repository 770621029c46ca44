#pragma once

#include <optional>

#include "optdmd/dmd.hpp"
#include "optdmd/expbasis.hpp"
#include "optdmd/varpro.hpp"

namespace optdmd {

// Snapshots z_0..z_m as columns, column j sampled at grid[j].
struct SnapshotSet {
    CMatrix states;
    TimeGrid grid;

    Index state_dim() const { return states.rows(); }
    Index count() const { return states.cols(); }

    void validate() const;

    // Consecutive pairs; requires an equispaced grid (dt is the mean step).
    SnapshotPairs pairs() const;
};

enum class OptDmdVariant { Full, Approximate };

struct OptDmdConfig {
    Index rank = 1;
    std::optional<CVector> init_alpha;
    VarProOptions varpro;
    OptDmdVariant variant = OptDmdVariant::Full;
};

struct OptDmdOutput {
    DmdResult result;
    VarProSolution solution;
};

// Trapezoidal-rule initial guess: eigenvalues of the projected A fitting
// (X2 - X1) T^{-1} = A (X1 + X2) / 2.
CVector init_alpha(const SnapshotSet& data, Index r);

// Fits X^T ~ Phi(alpha) B over all snapshots.
OptDmdOutput optimized_dmd(const SnapshotSet& data, const OptDmdConfig& cfg);

// Fits the rank-r projection conj(V_r) Sigma_r ~ Phi(alpha) B and lifts the
// modes back through U_r.
OptDmdOutput approx_optimized_dmd(const SnapshotSet& data, const OptDmdConfig& cfg);

// Dispatches on cfg.variant.
OptDmdOutput fit(const SnapshotSet& data, const OptDmdConfig& cfg);

}  // namespace optdmd
