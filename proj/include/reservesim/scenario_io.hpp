#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reservesim/engine.hpp"
#include "reservesim/metrics.hpp"

namespace reservesim {

/// Malformed scenario, CSV, or command-line input.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json, Table };

struct OutputSpec {
  OutputFormat format = OutputFormat::Csv;
  std::filesystem::path path;
};

struct ScenarioFile {
  ScenarioScript script;
  std::vector<OutputSpec> outputs;
};

/// Parses the YAML scenario format. Unknown keys are errors; amounts are
/// decimal strings in whole units.
ScenarioFile parse_scenario(std::string_view text);
ScenarioFile load_scenario(const std::filesystem::path& path);

/// Applies a "name=value" regulatory override.
void apply_param_override(RegulatoryParams& params, std::string_view assignment);

// ---- metrics series --------------------------------------------------------------

/// One row per snapshot. Money columns are integer minor units; the period
/// column (`step`) comes first. A cut-short run ends with a `# failed:` line.
void write_series_csv(std::ostream& os, const MetricsSeries& series);
MetricsSeries parse_series_csv(std::string_view text);

/// Full structured dump: snapshots, breaches, shortfalls, final status.
void write_run_json(std::ostream& os, const RunResult& run);

/// Balance-sheet tables in the column order Bank | Deposits | Loan | Cash |
/// Equity Capital | Σ Deposits | Σ Bank Loans + MBS, one table per labelled
/// snapshot (every snapshot if none are labelled).
void write_tables(std::ostream& os, const MetricsSeries& series);

// ---- external statistical series ------------------------------------------------

struct ExternalPoint {
  std::string period;
  double value = 0.0;
  friend bool operator==(const ExternalPoint&, const ExternalPoint&) = default;
};

struct ExternalSeries {
  std::string label;
  std::vector<ExternalPoint> points;
};

/// Reads a wide CSV: first column is the period, every other column one
/// series named by its header. Periods must be strictly increasing (numeric
/// order when all periods are numbers, string order otherwise). Columns with
/// non-numeric cells are skipped unless named in `required`, which makes them
/// an error.
std::map<std::string, ExternalSeries> read_external_csv(std::string_view text,
                                                        const std::vector<std::string>& required = {});

/// Pointwise a / b over the periods both series share.
ExternalSeries ratio_report(const ExternalSeries& a, const ExternalSeries& b);
void write_external_csv(std::ostream& os, const ExternalSeries& series);

// ---- small CSV helpers shared with tests -------------------------------------------

std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text);
std::string csv_escape(std::string_view field);

} // namespace reservesim
