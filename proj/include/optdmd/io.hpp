#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "optdmd/harness.hpp"

namespace optdmd {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// CSV with a header row whose first column is `t`; each further column is a
// real state component and each row one snapshot.
SnapshotSet load_snapshots_csv(const std::filesystem::path& path);
SnapshotSet parse_snapshots_csv(const std::string& text);
void save_snapshots_csv(const SnapshotSet& data, const std::filesystem::path& path);

inline constexpr const char* kResultSchema = "optdmd-result-v1";

struct ResultFile {
    DmdResult result;
    std::vector<double> residual_history;
    std::string status;
    int iterations = 0;
};

std::string result_json(const DmdResult& result, const VarProSolution* solution);
void save_result_json(const DmdResult& result, const VarProSolution* solution,
                      const std::filesystem::path& path);
ResultFile load_result_json(const std::filesystem::path& path);
ResultFile parse_result_json(const std::string& text);

// Raw per-trial table. Timing is left out unless requested so that repeated
// runs produce identical files.
void write_records_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path,
                       bool include_timing);
void write_summary_json(const std::vector<CellSummary>& cells, const ExperimentConfig& cfg,
                        const std::filesystem::path& path, bool include_timing);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace optdmd
