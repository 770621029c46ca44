#include "optdmd/io.hpp"
#include "optdmd/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "json.hpp"

namespace optdmd {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_number(std::string_view cell, std::size_t line_no) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        fail(ErrorCode::ParseError,
             "line " + std::to_string(line_no) + ": cannot parse '" + std::string(cell) + "' as a number");
    }
    if (!std::isfinite(v)) {
        fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": non-finite value");
    }
    return v;
}

json complex_pair(cplx z) {
    return json::array({z.real(), z.imag()});
}

json complex_array(const CVector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(complex_pair(v(i)));
    return out;
}

cplx read_pair(const json& j) {
    if (!j.is_array() || j.size() != 2) fail(ErrorCode::ParseError, "expected a [re, im] pair");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

CVector read_complex_array(const json& j) {
    if (!j.is_array()) fail(ErrorCode::ParseError, "expected an array of [re, im] pairs");
    CVector out(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) out(static_cast<Index>(i)) = read_pair(j[i]);
    return out;
}

json number_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json ellipse_json(const EllipseSummary& e) {
    return {{"center", complex_pair(e.center)},
            {"semi_major", number_or_null(e.semi_major)},
            {"semi_minor", number_or_null(e.semi_minor)},
            {"angle", number_or_null(e.angle)}};
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

SnapshotSet parse_snapshots_csv(const std::string& text) {
    std::vector<std::string_view> lines;
    {
        std::string_view rest(text);
        while (!rest.empty()) {
            const std::size_t pos = rest.find('\n');
            lines.push_back(rest.substr(0, pos));
            if (pos == std::string_view::npos) break;
            rest.remove_prefix(pos + 1);
        }
    }
    if (lines.empty() || trim(lines[0]).empty()) fail(ErrorCode::ParseError, "line 1: missing header");
    const auto header = split(lines[0], ',');
    if (header[0] != "t") fail(ErrorCode::ParseError, "line 1: first column must be named 't'");
    if (header.size() < 2) fail(ErrorCode::ParseError, "line 1: no state columns");
    const std::size_t n = header.size() - 1;

    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        if (trim(lines[l]).empty()) continue;
        const auto cells = split(lines[l], ',');
        if (cells.size() != header.size()) {
            fail(ErrorCode::ParseError, "line " + std::to_string(l + 1) + ": expected " +
                                            std::to_string(header.size()) + " fields, found " +
                                            std::to_string(cells.size()));
        }
        const double t = parse_number(cells[0], l + 1);
        if (!times.empty() && !(t > times.back())) {
            fail(ErrorCode::NonMonotoneTime,
                 "line " + std::to_string(l + 1) + ": time " + std::string(cells[0]) +
                     " does not increase");
        }
        times.push_back(t);
        std::vector<double> row(n);
        for (std::size_t c = 0; c < n; ++c) row[c] = parse_number(cells[c + 1], l + 1);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(ErrorCode::ParseError, "no snapshot rows");

    CMatrix states(static_cast<Index>(n), static_cast<Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) states(static_cast<Index>(i), static_cast<Index>(j)) = rows[j][i];
    return {std::move(states), TimeGrid(times)};
}

SnapshotSet load_snapshots_csv(const std::filesystem::path& path) {
    return parse_snapshots_csv(read_file(path));
}

void save_snapshots_csv(const SnapshotSet& data, const std::filesystem::path& path) {
    data.validate();
    require(data.states.imag().isZero(0.0), ErrorCode::InvalidArgument,
            "CSV snapshots must be real");
    std::string out = "t";
    for (Index i = 0; i < data.state_dim(); ++i) out += ",z" + std::to_string(i);
    out += '\n';
    for (Index j = 0; j < data.count(); ++j) {
        out += format_double(data.grid[j]);
        for (Index i = 0; i < data.state_dim(); ++i) out += "," + format_double(data.states(i, j).real());
        out += '\n';
    }
    write_file(path, out);
}

std::string result_json(const DmdResult& result, const VarProSolution* solution) {
    json modes = json::array();
    for (Index i = 0; i < result.modes.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < result.modes.cols(); ++j) row.push_back(complex_pair(result.modes(i, j)));
        modes.push_back(std::move(row));
    }
    json doc = {
        {"schema", kResultSchema},
        {"method", std::string(to_string(result.method))},
        {"rank", result.rank()},
        {"eigenvalues", complex_array(result.eigenvalues)},
        {"discrete_eigenvalues", complex_array(result.discrete_eigs)},
        {"modes", std::move(modes)},
        {"amplitudes", std::vector<double>(result.amplitudes.data(),
                                           result.amplitudes.data() + result.amplitudes.size())},
        {"residual_history", solution ? solution->residual_history : std::vector<double>{}},
        {"status", solution ? to_string(solution->status) : "NotApplicable"},
        {"iterations", solution ? solution->iterations : 0},
    };
    return doc.dump(2) + "\n";
}

void save_result_json(const DmdResult& result, const VarProSolution* solution,
                      const std::filesystem::path& path) {
    write_file(path, result_json(result, solution));
}

ResultFile parse_result_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("schema").get<std::string>() != kResultSchema)
            fail(ErrorCode::ParseError, "unsupported schema " + doc.at("schema").get<std::string>());
        ResultFile out;
        const auto method = parse_method(doc.at("method").get<std::string>());
        if (!method) fail(ErrorCode::ParseError, "unknown method");
        out.result.method = *method;
        out.result.eigenvalues = read_complex_array(doc.at("eigenvalues"));
        out.result.discrete_eigs = read_complex_array(doc.at("discrete_eigenvalues"));
        const Index r = doc.at("rank").get<Index>();
        if (r != out.result.eigenvalues.size()) fail(ErrorCode::ParseError, "rank does not match eigenvalues");

        const json& modes = doc.at("modes");
        out.result.modes.resize(static_cast<Index>(modes.size()), r);
        for (std::size_t i = 0; i < modes.size(); ++i) {
            if (!modes[i].is_array() || static_cast<Index>(modes[i].size()) != r)
                fail(ErrorCode::ParseError, "mode row has the wrong length");
            for (Index j = 0; j < r; ++j)
                out.result.modes(static_cast<Index>(i), j) = read_pair(modes[i][static_cast<std::size_t>(j)]);
        }
        const auto amps = doc.at("amplitudes").get<std::vector<double>>();
        out.result.amplitudes = Eigen::Map<const RVector>(amps.data(), static_cast<Index>(amps.size()));
        out.residual_history = doc.at("residual_history").get<std::vector<double>>();
        out.status = doc.at("status").get<std::string>();
        out.iterations = doc.at("iterations").get<int>();
        return out;
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("malformed result JSON: ") + e.what());
    }
}

ResultFile load_result_json(const std::filesystem::path& path) {
    return parse_result_json(read_file(path));
}

void write_records_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path,
                       bool include_timing) {
    Index neig = 0;
    for (const TrialRecord& r : records) neig = std::max(neig, r.matched_eigs.size());

    std::string out = "method,m,sigma2,trial,seed,ok,error,a_error,eig_error,recon_error";
    if (include_timing) out += ",wall_time";
    for (Index k = 0; k < neig; ++k) out += ",eig" + std::to_string(k) + "_re,eig" + std::to_string(k) + "_im";
    out += '\n';
    for (const TrialRecord& r : records) {
        out += std::string(to_string(r.method)) + "," + std::to_string(r.m) + "," + format_double(r.sigma2) +
               "," + std::to_string(r.trial) + "," + std::to_string(r.seed) + "," + (r.ok ? "1" : "0") +
               "," + r.error + "," + format_double(r.a_error) + "," + format_double(r.eig_error) + "," +
               format_double(r.recon_error);
        if (include_timing) out += "," + format_double(r.wall_time);
        for (Index k = 0; k < neig; ++k) {
            if (k < r.matched_eigs.size())
                out += "," + format_double(r.matched_eigs(k).real()) + "," + format_double(r.matched_eigs(k).imag());
            else
                out += ",nan,nan";
        }
        out += '\n';
    }
    write_file(path, out);
}

void write_summary_json(const std::vector<CellSummary>& cells, const ExperimentConfig& cfg,
                        const std::filesystem::path& path, bool include_timing) {
    json jcells = json::array();
    for (const CellSummary& c : cells) {
        json tracked = json::array();
        for (const TrackedEigenvalue& t : c.tracked) {
            tracked.push_back({{"truth", complex_pair(t.truth)},
                               {"mean", complex_pair(t.mean)},
                               {"stderr", json::array({number_or_null(t.stderr_re), number_or_null(t.stderr_im)})},
                               {"ellipse95", ellipse_json(t.ellipse)}});
        }
        json cell = {{"method", std::string(to_string(c.method))},
                     {"m", c.m},
                     {"sigma2", c.sigma2},
                     {"trials", c.trials},
                     {"failures", c.failures},
                     {"mean_a_error", number_or_null(c.mean_a_error)},
                     {"mean_eig_error", number_or_null(c.mean_eig_error)},
                     {"mean_recon_error", number_or_null(c.mean_recon_error)},
                     {"tracked_eigenvalues", std::move(tracked)}};
        if (include_timing) cell["mean_wall_time"] = number_or_null(c.mean_wall_time);
        jcells.push_back(std::move(cell));
    }
    json methods = json::array();
    for (DmdMethod m : cfg.methods) methods.push_back(std::string(to_string(m)));
    json doc = {{"schema", "optdmd-bench-v1"},
                {"example", std::string(to_string(cfg.example))},
                {"seed", cfg.seed},
                {"trials", cfg.trials},
                {"m_values", cfg.m_values},
                {"sigma2_values", cfg.sigma2_values},
                {"rank", cfg.rank ? json(*cfg.rank) : json("auto")},
                {"methods", std::move(methods)},
                {"cells", std::move(jcells)}};
    write_file(path, doc.dump(2) + "\n");
}

}  // namespace optdmd
