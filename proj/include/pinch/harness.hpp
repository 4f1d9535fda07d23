#pragma once

// Experiment sweeps over random realizations, result files, and the
// command-line front end.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pinch/scenario.hpp"

namespace pinch {

enum class Mode { single_cc, single_sc, single_pareto, multi_sc, multi_cc, multi_pareto, baselines, verify };

std::string_view mode_name(Mode m);
/// Throws ParseError for an unknown name.
Mode parse_mode(std::string_view name);

enum class Format { csv, json };

struct SweepSpec {
  Mode mode = Mode::single_cc;
  /// Config key or "alpha"; empty for a single run at the config values.
  std::string sweep_var;
  std::vector<double> sweep_values;
  int num_realizations = 1;
  std::filesystem::path output_path;
  Format format = Format::csv;
  bool timing = false;  // adds wall_time_ms to the CSV body
  bool write_summary = true;
};

/// Rate-profile weights used when alpha is not swept explicitly:
/// 0.001, 0.05, 0.10, ..., 0.95, 0.999.
std::vector<double> default_alphas();

/// Parses "var=v1,v2,...".
void parse_sweep(std::string_view text, SweepSpec& spec);

struct ResultRow {
  int realization_id = 0;
  std::string mode;
  std::string scheme;
  std::string sweep_var;
  double sweep_value = 0.0;
  double alpha = 0.0;           // NaN outside the Pareto modes
  double rate = 0.0;            // bit/s/Hz
  double bcrb = 0.0;            // m^2
  std::string bcrb_model;       // "2d", or "1d" for the known-u^y single-PA model
  int iterations = 0;
  bool feasible = true;
  double oracle_reference = 0.0;  // verify mode only, NaN otherwise
  double oracle_fast = 0.0;
  double oracle_rel_error = 0.0;
  std::string error;
  double wall_time_ms = 0.0;
};

bool same_row(const ResultRow& a, const ResultRow& b);

/// Rows of one realization at one parameter set; failures become error rows.
std::vector<ResultRow> run_realization(Mode mode, const SystemConfig& cfg, int realization_id,
                                       const std::vector<double>& alphas);

struct SweepOutcome {
  std::vector<ResultRow> rows;
  int failed_rows = 0;
};

/// Runs every (sweep value, realization). Rows go to spec.output_path in
/// realization order as each chunk completes; the CSV summary of mean and
/// 10/90 percentiles per (sweep value, scheme, alpha) is written next to it.
SweepOutcome run_sweep(const SweepSpec& spec, const SystemConfig& cfg);

/// Fixed CSV column order.
std::vector<std::string> csv_columns(bool timing);

/// Writes rows as CSV (comment line with schema and config hash, header,
/// rows) or as a JSON envelope with the resolved config.
void emit_results(const std::vector<ResultRow>& rows, Format format, const std::filesystem::path& path,
                  const SystemConfig& cfg, const SweepSpec& spec);

struct LoadedResults {
  int schema_version = 0;
  std::uint64_t config_hash = 0;
  SystemParams params;
  std::vector<ResultRow> rows;
};
LoadedResults load_results_json(const std::filesystem::path& path);

inline constexpr int kSchemaVersion = 1;

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace pinch
