#pragma once

#include "drgbt/bubbles.hpp"
#include "drgbt/sim.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace drgbt::output {

/// Header rows of the CSV outputs; files are validated against these.
extern const std::vector<std::string> kRunsHeader;
extern const std::vector<std::string> kTrialHeader;
extern const std::vector<std::string> kTimingHeader;
extern const std::vector<std::string> kSliceHeader;
/// Keys every events.jsonl record carries.
extern const std::vector<std::string> kEventKeys;

/// Shortest round-trip decimal form with a period separator, independent of locale.
std::string fmt(double x);

void write_runs_csv(std::ostream& os, const std::vector<sim::RunRow>& rows);
void write_trial_csv(std::ostream& os, const std::vector<sim::CellRow>& cells);

/// Quantiles of every routine's per-iteration wall time.
extern const std::vector<double> kTimingQuantiles;
void write_timing_cdf_csv(std::ostream& os, const std::vector<scheduler::IterationTiming>& timings);

struct SliceRow {
  int root{0};
  bubbles::SliceSample sample;
};
void write_slice_csv(std::ostream& os, const std::vector<SliceRow>& rows);

/// One JSON object per line.
std::string event_json(const sim::IterationEvent& ev);

/// Human-readable metrics block printed by the run command.
std::string describe(const sim::RunMetrics& m);

/// Writes `content` to `dir/name`, creating `dir`. Throws Error on I/O failure.
std::string write_file(const std::string& dir, const std::string& name, const std::string& content);

struct ValidationResult {
  bool ok{true};
  long records{0};
  std::vector<std::string> errors;
};

/// Re-parses an output file. The schema is picked from the file name
/// (runs.csv, trial.csv, timing_cdf.csv, deb_slice.csv, events.jsonl).
ValidationResult validate_file(const std::string& path);
ValidationResult validate_csv(const std::string& text, const std::vector<std::string>& header);
ValidationResult validate_jsonl(const std::string& text);

}  // namespace drgbt::output
