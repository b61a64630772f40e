#pragma once

#include "arpen/error.hpp"
#include "arpen/model.hpp"
#include "arpen/penalty.hpp"
#include "arpen/simlab.hpp"
#include "arpen/solver.hpp"
#include "arpen/table.hpp"
#include "arpen/tuning.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace arpen {

/// Library version string reported in every output header.
const char* version();

// CSV -------------------------------------------------------------------------

/// Reads a comma-separated file with a header row. Rows are kept in file
/// order. An empty `covariates` list selects every column except the response.
TimeSeriesDataset ingest_csv(const std::string& path, const std::string& response,
                             const std::vector<std::string>& covariates = {});
TimeSeriesDataset parse_csv(std::istream& in, const std::string& source, const std::string& response,
                            const std::vector<std::string>& covariates = {});

/// Response first, then covariates; 17 significant digits so re-reading is exact.
void write_dataset_csv(const TimeSeriesDataset& data, std::ostream& out);
void write_dataset_csv(const TimeSeriesDataset& data, const std::string& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

// Run configuration -----------------------------------------------------------

enum class Command { Fit, Tune, SelectOrder, Simulate };

std::string_view to_string(Command c);
Command parse_command(std::string_view name);

struct RunConfig {
  Command command = Command::Fit;
  std::optional<std::string> data_path;
  std::string response = "y";
  std::vector<std::string> covariates;
  ModelSpec model;
  bool family_given = false;  // simulate defaults to t at the generating nu otherwise
  PenaltySpec penalty;
  TuningGrid grid;
  SolverOptions options;
  int p_max = 3;
  double level = 0.95;
  std::optional<SimCaseConfig> sim;
  unsigned threads = 0;
  bool intervals = true;
  std::string output_path;  // empty: stdout only
  ReportFormat output_format = ReportFormat::Table;

  /// Throws ConfigError when the command's requirements are not met.
  void validate() const;
};

/// Overlays the keys present in a JSON document onto `config`.
void apply_config_json(RunConfig& config, const std::string& json_text);
void apply_config_file(RunConfig& config, const std::string& path);

/// Resolved configuration as compact JSON, used in report headers.
std::string describe_config(const RunConfig& config);

struct ReportSection {
  std::string title;
  Table table;
  std::vector<std::string> notes;
};

/// Command output independent of its rendering.
struct Report {
  std::vector<std::string> header;  // version, seed, resolved config
  std::vector<ReportSection> sections;
  std::vector<std::string> warnings;
};

/// Executes the command without writing anything. Throws on failure.
Report build_report(const RunConfig& config);

std::string render(const Report& report, ReportFormat format);

/// Executes the command. The report goes to `config.output_path` (if set) in
/// the requested format, and an aligned-text copy always goes to `out`.
/// Returns the process exit status.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// 0 success, 2 configuration, 3 data, 4 numerical.
int exit_code(ErrorKind kind);

/// Parses command-line arguments (optionally layered over --config) and runs.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace arpen
