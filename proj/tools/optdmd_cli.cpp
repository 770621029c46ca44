// Command-line front end: fit a CSV, run the synthetic benchmarks, or report
// rank-selection choices.

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "optdmd/dmd.hpp"
#include "optdmd/error.hpp"
#include "optdmd/harness.hpp"
#include "optdmd/io.hpp"
#include "optdmd/optdmd.hpp"

namespace {

using namespace optdmd;

std::optional<Index> parse_rank(const std::string& text) {
    if (text == "auto") return std::nullopt;
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(used == text.size() && v >= 1, ErrorCode::InvalidArgument, "rank must be a positive integer or 'auto'");
    return static_cast<Index>(v);
}

Index auto_rank(const SnapshotSet& data) {
    const RVector sv = singular_values(data.states);
    return select_rank(sv, data.state_dim(), data.count(), GavishDonohoMedian{}).chosen_rank;
}

struct FitArgs {
    std::string input;
    std::string output;
    std::string rank = "auto";
    std::string method = "opt";
    std::string variant = "full";
    std::string init = "trapezoid";
    std::string jacobian = "full";
    int max_iters = VarProOptions{}.max_outer_iters;
};

int run_fit(const FitArgs& args) {
    const SnapshotSet data = load_snapshots_csv(args.input);
    const auto fixed = parse_rank(args.rank);
    const Index r = fixed ? *fixed : auto_rank(data);

    const auto method = parse_method(args.method);
    require(method.has_value(), ErrorCode::InvalidArgument, "unknown method " + args.method);

    std::string text;
    if (*method == DmdMethod::Optimized || *method == DmdMethod::ApproxOptimized) {
        OptDmdConfig cfg;
        cfg.rank = r;
        cfg.variant = (*method == DmdMethod::ApproxOptimized || args.variant == "approx")
                          ? OptDmdVariant::Approximate
                          : OptDmdVariant::Full;
        cfg.varpro.max_outer_iters = args.max_iters;
        cfg.varpro.jacobian_mode = args.jacobian == "kaufman" ? JacobianMode::Kaufman : JacobianMode::Full;
        if (args.init == "exact") cfg.init_alpha = exact_dmd(data.pairs(), r).eigenvalues;
        const OptDmdOutput out = fit(data, cfg);
        text = result_json(out.result, &out.solution);
    } else {
        const SnapshotPairs pairs = data.pairs();
        DmdResult res;
        if (*method == DmdMethod::Exact) res = exact_dmd(pairs, r);
        else if (*method == DmdMethod::FB) res = fb_dmd(pairs, r);
        else res = tls_dmd(pairs, r);
        text = result_json(res, nullptr);
    }
    if (args.output.empty()) std::cout << text;
    else write_file(args.output, text);
    return 0;
}

struct BenchArgs {
    std::string example;
    std::vector<long long> m;
    std::vector<double> sigma2;
    long long trials = 100;
    unsigned long long seed = 0;
    std::string rank;
    std::vector<std::string> methods{"exact", "fb", "tls", "opt"};
    std::string out;
    unsigned threads = 1;
    bool timing = false;
    bool full_scale = false;
    double dt = 0.1;
};

int run_bench(const BenchArgs& args) {
    const auto ex = parse_example(args.example);
    require(ex.has_value(), ErrorCode::InvalidArgument, "unknown example " + args.example);

    ExperimentConfig cfg;
    cfg.example = *ex;
    cfg.seed = args.seed;
    cfg.dt = args.dt;
    cfg.threads = args.threads;
    cfg.trials = args.full_scale ? 1000 : static_cast<Index>(args.trials);

    // Default sweeps: desk scale unless --full-scale.
    const Index m_max_exp = args.full_scale ? 13 : 10;
    if (cfg.example == Example::Ex2Hidden) {
        cfg.m_values = {128, 256, 512};
        cfg.sigma2_values = {std::ldexp(1.0, -2), std::ldexp(1.0, -4), std::ldexp(1.0, -6),
                             std::ldexp(1.0, -8), std::ldexp(1.0, -10)};
        cfg.rank = 4;
    } else {
        cfg.m_values.clear();
        for (Index e = 6; e <= m_max_exp; ++e) cfg.m_values.push_back(Index{1} << e);
        if (cfg.example == Example::Ex1Sensor)
            cfg.sigma2_values = {1e-1, 1e-3, 1e-5, 1e-7, 1e-9};
        else
            cfg.sigma2_values = {std::ldexp(1.0, -2), std::ldexp(1.0, -4), std::ldexp(1.0, -6),
                                 std::ldexp(1.0, -8), std::ldexp(1.0, -10)};
        cfg.rank = 2;
    }
    if (!args.m.empty()) cfg.m_values.assign(args.m.begin(), args.m.end());
    if (!args.sigma2.empty()) cfg.sigma2_values = args.sigma2;
    if (!args.rank.empty()) cfg.rank = parse_rank(args.rank);

    cfg.methods.clear();
    for (const std::string& name : args.methods) {
        const auto m = parse_method(name);
        require(m.has_value(), ErrorCode::InvalidArgument, "unknown method " + name);
        cfg.methods.push_back(*m);
    }

    const std::vector<TrialRecord> records = run_benchmark(cfg);
    const std::vector<CellSummary> cells = summarize(records, cfg.example);
    const std::string prefix = args.out.empty() ? "bench_" + args.example : args.out;
    write_records_csv(records, prefix + ".csv", args.timing);
    write_summary_json(cells, cfg, prefix + ".json", args.timing);
    return 0;
}

int run_rank(const std::string& input, std::optional<double> sigma) {
    const SnapshotSet data = load_snapshots_csv(input);
    const RVector sv = singular_values(data.states);
    const Index rows = data.state_dim();
    const Index cols = data.count();

    nlohmann::json doc;
    doc["rows"] = rows;
    doc["cols"] = cols;
    const RankSelection med = select_rank(sv, rows, cols, GavishDonohoMedian{});
    doc["gavish_donoho_median"] = {{"rank", med.chosen_rank}, {"threshold", med.threshold}};
    if (sigma) {
        const RankSelection known = select_rank(sv, rows, cols, GavishDonohoKnownSigma{*sigma});
        doc["gavish_donoho_known_sigma"] = {{"rank", known.chosen_rank}, {"threshold", known.threshold}, {"sigma", *sigma}};
    }
    for (double p : {0.999, 0.99, 0.9}) {
        const RankSelection e = select_rank(sv, rows, cols, NuclearEnergy{p});
        doc["nuclear_energy"].push_back({{"fraction", p}, {"rank", e.chosen_rank}});
    }
    std::cout << doc.dump(2) << "\n";
    return 0;
}

struct GenArgs {
    std::string example;
    long long m = 64;
    double sigma2 = 0.0;
    unsigned long long seed = 0;
    double dt = 0.1;
    std::string out;
};

int run_gen(const GenArgs& args) {
    const auto ex = parse_example(args.example);
    require(ex.has_value(), ErrorCode::InvalidArgument, "unknown example " + args.example);
    ExperimentConfig cfg;
    cfg.example = *ex;
    cfg.dt = args.dt;
    const GeneratedData gen = generate(cfg, static_cast<Index>(args.m), args.sigma2, args.seed);
    save_snapshots_csv(gen.data, args.out);
    return 0;
}

void report_error(std::string_view code, std::string_view message) {
    nlohmann::json line = {{"error", code}, {"message", message}};
    std::cerr << line.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimized dynamic mode decomposition by variable projection"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a DMD to a snapshot CSV and emit result JSON");
    fit_cmd->add_option("input", fit_args.input, "Snapshot CSV (header: t,<states>)")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--out,-o", fit_args.output, "Result JSON path (stdout if omitted)");
    fit_cmd->add_option("--rank,-r", fit_args.rank, "Rank or 'auto' (Gavish-Donoho median)");
    fit_cmd->add_option("--method", fit_args.method, "opt, opt-approx, exact, fb or tls")
        ->check(CLI::IsMember({"opt", "opt-approx", "exact", "fb", "tls"}));
    fit_cmd->add_option("--variant", fit_args.variant, "Optimized DMD variant")->check(CLI::IsMember({"full", "approx"}));
    fit_cmd->add_option("--init", fit_args.init, "Initial eigenvalues")->check(CLI::IsMember({"trapezoid", "exact"}));
    fit_cmd->add_option("--jacobian", fit_args.jacobian, "Jacobian form")->check(CLI::IsMember({"full", "kaufman"}));
    fit_cmd->add_option("--max-iters", fit_args.max_iters, "Outer iteration cap")->check(CLI::PositiveNumber);

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo comparison on a synthetic example");
    bench_cmd->add_option("example", bench_args.example, "ex1, ex2 or ex3")->required()
        ->check(CLI::IsMember({"ex1", "ex2", "ex3"}));
    bench_cmd->add_option("--m", bench_args.m, "Snapshot counts")->delimiter(',');
    bench_cmd->add_option("--sigma2", bench_args.sigma2, "Noise variances")->delimiter(',');
    bench_cmd->add_option("--trials", bench_args.trials, "Trials per cell")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", bench_args.seed, "Base seed");
    bench_cmd->add_option("--rank", bench_args.rank, "Rank or 'auto'");
    bench_cmd->add_option("--methods", bench_args.methods, "Methods to run")->delimiter(',');
    bench_cmd->add_option("--out", bench_args.out, "Output prefix for <prefix>.csv and <prefix>.json");
    bench_cmd->add_option("--threads", bench_args.threads, "Worker threads")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--dt", bench_args.dt, "Sample spacing for ex1/ex3")->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--timing", bench_args.timing, "Include wall-clock times (output no longer reproducible)");
    bench_cmd->add_flag("--full-scale", bench_args.full_scale, "1000 trials and the full snapshot sweep");

    std::string rank_input;
    std::optional<double> rank_sigma;
    auto* rank_cmd = app.add_subcommand("rank", "Report hard-threshold rank choices for a snapshot CSV");
    rank_cmd->add_option("input", rank_input, "Snapshot CSV")->required()->check(CLI::ExistingFile);
    rank_cmd->add_option("--sigma", rank_sigma, "Known noise standard deviation");

    GenArgs gen_args;
    auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic example as snapshot CSV");
    gen_cmd->add_option("example", gen_args.example, "ex1, ex2 or ex3")->required()
        ->check(CLI::IsMember({"ex1", "ex2", "ex3"}));
    gen_cmd->add_option("--m", gen_args.m, "Snapshot count")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--sigma2", gen_args.sigma2, "Noise variance");
    gen_cmd->add_option("--seed", gen_args.seed, "Seed");
    gen_cmd->add_option("--dt", gen_args.dt, "Sample spacing for ex1/ex3")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--out,-o", gen_args.out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        report_error("UsageError", e.what());
        return 64;
    }

    try {
        if (*fit_cmd) return run_fit(fit_args);
        if (*bench_cmd) return run_bench(bench_args);
        if (*rank_cmd) return run_rank(rank_input, rank_sigma);
        if (*gen_cmd) return run_gen(gen_args);
    } catch (const Error& e) {
        report_error(to_string(e.code()), e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error("Internal", e.what());
        return 3;
    }
    return 1;
}
