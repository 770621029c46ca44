#include "optdmd/harness.hpp"
#include "optdmd/error.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

namespace optdmd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CMatrix example1_states(const RVector& times) {
    CMatrix out(2, times.size());
    for (Index j = 0; j < times.size(); ++j) out.col(j) = example1_state(times(j)).cast<cplx>();
    return out;
}

void add_noise(CMatrix& states, double sigma, std::mt19937_64& rng) {
    if (sigma == 0.0) return;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index j = 0; j < states.cols(); ++j)
        for (Index i = 0; i < states.rows(); ++i) states(i, j) += sigma * normal(rng);
}

}  // namespace

RMatrix example1_system() {
    RMatrix a(2, 2);
    a << 1.0, -2.0, 1.0, -1.0;
    return a;
}

Eigen::Vector2d example1_state(double t) {
    // A^2 = -I, so exp(A t) = cos(t) I + sin(t) A.
    const Eigen::Vector2d z0(1.0, 0.1);
    const Eigen::Matrix2d a = example1_system();
    return std::cos(t) * z0 + std::sin(t) * (a * z0);
}

GroundTruth example_truth(Example ex) {
    GroundTruth truth;
    if (ex == Example::Ex2Hidden) {
        truth.eigenvalues.resize(4);
        truth.eigenvalues << cplx(1.0, 1.0), cplx(1.0, -1.0), cplx(-0.2, 3.7), cplx(-0.2, -3.7);
    } else {
        truth.system_matrix = example1_system();
        truth.eigenvalues.resize(2);
        truth.eigenvalues << cplx(0.0, 1.0), cplx(0.0, -1.0);
    }
    return truth;
}

GeneratedData gen_example1(Index m, double dt, double sigma, std::uint64_t seed) {
    require(m >= 1, ErrorCode::InvalidArgument, "need at least one snapshot");
    require(dt > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
    require(sigma >= 0.0, ErrorCode::InvalidArgument, "noise level must be nonnegative");
    TimeGrid grid = TimeGrid::equispaced(m, dt);
    CMatrix states = example1_states(grid.times());
    std::mt19937_64 rng(seed);
    add_noise(states, sigma, rng);
    RVector times = grid.times();
    return {{std::move(states), std::move(grid)}, example_truth(Example::Ex1Sensor), std::move(times)};
}

GeneratedData gen_example2(Index m, double sigma, std::uint64_t seed) {
    require(m >= 1 && m <= kExample2MaxSnapshots, ErrorCode::InvalidArgument,
            "example 2 supports 1 to 512 snapshots");
    require(sigma >= 0.0, ErrorCode::InvalidArgument, "noise level must be nonnegative");
    constexpr double k1 = 1.0, w1 = 1.0, g1 = 1.0;
    constexpr double k2 = 0.4, w2 = 3.7, g2 = -0.2;
    const double dt = 2.0 * std::numbers::pi / static_cast<double>(kExample2MaxSnapshots - 1);
    TimeGrid grid = TimeGrid::equispaced(m, dt);
    const RVector x = RVector::LinSpaced(kExample2Points, 0.0, 15.0);

    CMatrix states(kExample2Points, m);
    for (Index j = 0; j < m; ++j) {
        const double t = grid[j];
        for (Index i = 0; i < kExample2Points; ++i) {
            states(i, j) = std::sin(k1 * x(i) - w1 * t) * std::exp(g1 * t) +
                           std::sin(k2 * x(i) - w2 * t) * std::exp(g2 * t);
        }
    }
    std::mt19937_64 rng(seed);
    add_noise(states, sigma, rng);
    RVector times = grid.times();
    return {{std::move(states), std::move(grid)}, example_truth(Example::Ex2Hidden), std::move(times)};
}

GeneratedData gen_example3(Index m, double dt, double sigma, std::uint64_t seed) {
    require(m >= 1, ErrorCode::InvalidArgument, "need at least one snapshot");
    require(dt > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
    require(sigma >= 0.0, ErrorCode::InvalidArgument, "noise level must be nonnegative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    RVector offset(m);
    for (Index j = 0; j < m; ++j) offset(j) = sigma * normal(rng);
    // Both members of every out-of-order pair are redrawn until the instants
    // strictly increase.
    std::vector<char> redraw(static_cast<std::size_t>(m));
    for (int pass = 0;; ++pass) {
        std::fill(redraw.begin(), redraw.end(), 0);
        bool any = false;
        for (Index j = 1; j < m; ++j) {
            if ((j + offset(j)) * dt <= (j - 1 + offset(j - 1)) * dt) {
                redraw[static_cast<std::size_t>(j - 1)] = redraw[static_cast<std::size_t>(j)] = 1;
                any = true;
            }
        }
        if (!any) break;
        require(pass < 100000, ErrorCode::InvalidArgument, "jitter too large to keep samples ordered");
        for (Index j = 0; j < m; ++j)
            if (redraw[static_cast<std::size_t>(j)]) offset(j) = sigma * normal(rng);
    }
    RVector actual(m);
    for (Index j = 0; j < m; ++j) actual(j) = (static_cast<double>(j) + offset(j)) * dt;
    TimeGrid grid = TimeGrid::equispaced(m, dt);
    return {{example1_states(actual), std::move(grid)}, example_truth(Example::Ex3Jitter), std::move(actual)};
}

std::string_view to_string(Example ex) noexcept {
    switch (ex) {
    case Example::Ex1Sensor: return "ex1";
    case Example::Ex2Hidden: return "ex2";
    case Example::Ex3Jitter: return "ex3";
    }
    return "unknown";
}

std::optional<Example> parse_example(std::string_view name) {
    for (Example e : {Example::Ex1Sensor, Example::Ex2Hidden, Example::Ex3Jitter}) {
        if (to_string(e) == name) return e;
    }
    return std::nullopt;
}

void ExperimentConfig::validate() const {
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
    require(!m_values.empty(), ErrorCode::InvalidArgument, "m_values must be nonempty");
    require(!sigma2_values.empty(), ErrorCode::InvalidArgument, "sigma2_values must be nonempty");
    require(!methods.empty(), ErrorCode::InvalidArgument, "no methods requested");
    require(dt > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
    for (double s2 : sigma2_values)
        require(s2 >= 0.0 && std::isfinite(s2), ErrorCode::InvalidArgument, "sigma2 must be finite and >= 0");
    for (Index m : m_values) require(m >= 2, ErrorCode::InvalidArgument, "m must be >= 2");
    if (rank) require(*rank >= 1, ErrorCode::InvalidArgument, "rank must be >= 1");
}

std::uint64_t trial_seed(std::uint64_t seed, Index m, double sigma2, Index trial) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(m));
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(sigma2));
    h = splitmix64(h ^ static_cast<std::uint64_t>(trial));
    return h;
}

GeneratedData generate(const ExperimentConfig& cfg, Index m, double sigma2, std::uint64_t seed) {
    const double sigma = std::sqrt(sigma2);
    switch (cfg.example) {
    case Example::Ex1Sensor: return gen_example1(m, cfg.dt, sigma, seed);
    case Example::Ex2Hidden: return gen_example2(m, sigma, seed);
    case Example::Ex3Jitter: return gen_example3(m, cfg.dt, sigma, seed);
    }
    fail(ErrorCode::InvalidArgument, "unknown example");
}

TrialRecord run_method(DmdMethod method, const GeneratedData& gen, Example example,
                       std::optional<Index> rank) {
    TrialRecord rec;
    rec.method = method;
    rec.m = gen.data.count();
    rec.a_error = kNaN;
    rec.eig_error = kNaN;
    rec.recon_error = kNaN;
    try {
        Index r = 0;
        if (rank) {
            r = *rank;
        } else {
            const RVector sv = singular_values(gen.data.states);
            r = select_rank(sv, gen.data.state_dim(), gen.data.count(), GavishDonohoMedian{}).chosen_rank;
        }

        const auto start = std::chrono::steady_clock::now();
        DmdResult result;
        switch (method) {
        case DmdMethod::Exact: result = exact_dmd(gen.data.pairs(), r); break;
        case DmdMethod::FB: result = fb_dmd(gen.data.pairs(), r); break;
        case DmdMethod::TLS: result = tls_dmd(gen.data.pairs(), r); break;
        case DmdMethod::Optimized:
        case DmdMethod::ApproxOptimized: {
            OptDmdConfig cfg;
            cfg.rank = r;
            // High-dimensional data is fitted on its leading POD modes.
            const bool approx = method == DmdMethod::ApproxOptimized || example == Example::Ex2Hidden;
            cfg.variant = approx ? OptDmdVariant::Approximate : OptDmdVariant::Full;
            rec.method = approx ? DmdMethod::ApproxOptimized : DmdMethod::Optimized;
            result = fit(gen.data, cfg).result;
            break;
        }
        }
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (gen.truth.system_matrix) {
            rec.a_error = (reconstruct_system_matrix(result) - gen.truth.system_matrix->cast<cplx>()).norm();
        }
        rec.matched_eigs = match_eigenvalues(result.eigenvalues, gen.truth.eigenvalues);
        rec.eig_error = (rec.matched_eigs - gen.truth.eigenvalues).norm();
        rec.recon_error = snapshot_residual(gen.data, result.eigenvalues);
        require(std::isfinite(rec.eig_error) && std::isfinite(rec.recon_error) &&
                    (!gen.truth.system_matrix || std::isfinite(rec.a_error)),
                ErrorCode::NonFinite, "non-finite error metric");
    } catch (const Error& e) {
        rec.ok = false;
        rec.error = std::string(to_string(e.code()));
        rec.matched_eigs.resize(0);
    }
    return rec;
}

std::vector<TrialRecord> run_benchmark(const ExperimentConfig& cfg) {
    cfg.validate();
    struct Task {
        Index m;
        double sigma2;
        Index trial;
    };
    std::vector<Task> tasks;
    for (Index m : cfg.m_values)
        for (double s2 : cfg.sigma2_values)
            for (Index t = 0; t < cfg.trials; ++t) tasks.push_back({m, s2, t});

    std::vector<std::vector<TrialRecord>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const Task& task = tasks[i];
            const std::uint64_t seed = trial_seed(cfg.seed, task.m, task.sigma2, task.trial);
            const GeneratedData gen = generate(cfg, task.m, task.sigma2, seed);
            for (DmdMethod method : cfg.methods) {
                TrialRecord rec = run_method(method, gen, cfg.example, cfg.rank);
                rec.sigma2 = task.sigma2;
                rec.trial = task.trial;
                rec.seed = seed;
                results[i].push_back(std::move(rec));
            }
        }
    };

    const unsigned threads = std::max(1u, cfg.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    std::vector<TrialRecord> out;
    out.reserve(tasks.size() * cfg.methods.size());
    for (auto& batch : results)
        for (auto& rec : batch) out.push_back(std::move(rec));
    return out;
}

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records, Example ex) {
    const GroundTruth truth = example_truth(ex);
    const Index r = truth.eigenvalues.size();

    // Cells keep first-appearance order.
    std::vector<CellSummary> cells;
    std::vector<std::vector<const TrialRecord*>> members;
    std::map<std::tuple<int, Index, double>, std::size_t> index;
    for (const TrialRecord& rec : records) {
        const auto key = std::make_tuple(static_cast<int>(rec.method), rec.m, rec.sigma2);
        auto [it, inserted] = index.try_emplace(key, cells.size());
        if (inserted) {
            CellSummary c;
            c.method = rec.method;
            c.m = rec.m;
            c.sigma2 = rec.sigma2;
            cells.push_back(c);
            members.emplace_back();
        }
        members[it->second].push_back(&rec);
    }

    for (std::size_t c = 0; c < cells.size(); ++c) {
        CellSummary& cell = cells[c];
        std::vector<const TrialRecord*> good;
        for (const TrialRecord* rec : members[c]) {
            ++cell.trials;
            if (rec->ok && rec->matched_eigs.size() == r) good.push_back(rec);
            else ++cell.failures;
        }
        const double n = static_cast<double>(good.size());
        double a = 0.0, e = 0.0, rc = 0.0, w = 0.0;
        for (const TrialRecord* rec : good) {
            a += rec->a_error;
            e += rec->eig_error;
            rc += rec->recon_error;
            w += rec->wall_time;
        }
        cell.mean_a_error = (good.empty() || !truth.system_matrix) ? kNaN : a / n;
        cell.mean_eig_error = good.empty() ? kNaN : e / n;
        cell.mean_recon_error = good.empty() ? kNaN : rc / n;
        cell.mean_wall_time = good.empty() ? kNaN : w / n;

        for (Index k = 0; k < r; ++k) {
            TrackedEigenvalue tr;
            tr.truth = truth.eigenvalues(k);
            CVector samples(static_cast<Index>(good.size()));
            for (std::size_t i = 0; i < good.size(); ++i) samples(static_cast<Index>(i)) = good[i]->matched_eigs(k);
            if (!good.empty()) tr.mean = samples.mean();
            if (good.size() >= 3) {
                const RVector re = samples.real();
                const RVector im = samples.imag();
                const double var_re = (re.array() - tr.mean.real()).square().sum() / (n - 1.0);
                const double var_im = (im.array() - tr.mean.imag()).square().sum() / (n - 1.0);
                tr.stderr_re = std::sqrt(var_re / n);
                tr.stderr_im = std::sqrt(var_im / n);
                tr.ellipse = confidence_ellipse(samples, 0.95);
            } else {
                tr.mean = good.empty() ? cplx(kNaN, kNaN) : tr.mean;
                tr.stderr_re = tr.stderr_im = kNaN;
                tr.ellipse.center = tr.mean;
            }
            cell.tracked.push_back(tr);
        }
    }
    return cells;
}

}  // namespace optdmd
