#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "optdmd/diagnostics.hpp"
#include "optdmd/optdmd.hpp"

namespace optdmd {

struct GroundTruth {
    std::optional<RMatrix> system_matrix;
    CVector eigenvalues;  // continuous time
};

struct GeneratedData {
    SnapshotSet data;
    GroundTruth truth;
    RVector sample_times;  // instants actually sampled (differs from data.grid under jitter)
};

// The planar system z' = A z, A = [[1, -2], [1, -1]], z(0) = (1, 0.1).
RMatrix example1_system();
Eigen::Vector2d example1_state(double t);

// m snapshots at t_j = j dt with additive N(0, sigma^2) noise on every entry.
GeneratedData gen_example1(Index m, double dt, double sigma, std::uint64_t seed);

// Two translating waves, one growing and one decaying, on 300 points of [0, 15];
// m <= 512 snapshots with dt = 2 pi / 511.
GeneratedData gen_example2(Index m, double sigma, std::uint64_t seed);

inline constexpr Index kExample2Points = 300;
inline constexpr Index kExample2MaxSnapshots = 512;

// Example 1 sampled at jittered instants (j + sigma g_j) dt; the grid reports
// the nominal instants j dt.
GeneratedData gen_example3(Index m, double dt, double sigma, std::uint64_t seed);

enum class Example { Ex1Sensor, Ex2Hidden, Ex3Jitter };

std::string_view to_string(Example ex) noexcept;
std::optional<Example> parse_example(std::string_view name);

struct ExperimentConfig {
    Example example = Example::Ex1Sensor;
    std::vector<Index> m_values{64};
    std::vector<double> sigma2_values{1e-3};
    Index trials = 100;
    std::optional<Index> rank;  // nullopt: Gavish-Donoho median threshold per trial
    std::vector<DmdMethod> methods{DmdMethod::Exact, DmdMethod::FB, DmdMethod::TLS, DmdMethod::Optimized};
    std::uint64_t seed = 0;
    double dt = 0.1;  // Examples 1 and 3
    unsigned threads = 1;

    void validate() const;
};

// Deterministic per-trial stream seed.
std::uint64_t trial_seed(std::uint64_t seed, Index m, double sigma2, Index trial);

GeneratedData generate(const ExperimentConfig& cfg, Index m, double sigma2, std::uint64_t seed);

// Runs one method on one dataset and scores it against the truth.
TrialRecord run_method(DmdMethod method, const GeneratedData& gen, Example example,
                       std::optional<Index> rank);

// Records ordered by (m, sigma2, trial, method) regardless of thread count.
std::vector<TrialRecord> run_benchmark(const ExperimentConfig& cfg);

struct TrackedEigenvalue {
    cplx truth;
    cplx mean;
    double stderr_re = 0.0;
    double stderr_im = 0.0;
    EllipseSummary ellipse;  // 95 percent
};

struct CellSummary {
    DmdMethod method = DmdMethod::Exact;
    Index m = 0;
    double sigma2 = 0.0;
    Index trials = 0;
    Index failures = 0;
    double mean_a_error = 0.0;  // NaN when undefined
    double mean_eig_error = 0.0;
    double mean_recon_error = 0.0;
    double mean_wall_time = 0.0;
    std::vector<TrackedEigenvalue> tracked;
};

GroundTruth example_truth(Example ex);

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records, Example ex);

}  // namespace optdmd
