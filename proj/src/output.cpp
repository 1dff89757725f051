#include "drgbt/output.hpp"

#include "drgbt/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace drgbt::output {

const std::vector<std::string> kRunsHeader = {
    "T",          "e1",          "u1",         "n_obs",          "run",        "seed",
    "success",    "outcome",     "algorithm_time", "path_length", "iterations", "deadline_overruns",
    "replans_requested", "replans_succeeded", "fallbacks", "initial_path"};
const std::vector<std::string> kTrialHeader = {"T",           "e1",          "u1",          "n_obs",
                                               "runs",        "success_rate", "time_mean",  "time_std",
                                               "length_mean", "length_std",  "collisions_I", "collisions_II",
                                               "timeouts"};
const std::vector<std::string> kTimingHeader = {"routine", "quantile", "seconds", "samples"};
const std::vector<std::string> kSliceHeader = {"root", "q_a", "q_b", "v_obs", "inside"};
const std::vector<std::string> kEventKeys = {"iteration", "time", "outcome", "status", "d_c", "N_h",
                                             "horizon_nodes", "weight_max", "weight_mean", "replan_requested",
                                             "replan_attempted", "replan_succeeded", "fallback", "timing"};
const std::vector<double> kTimingQuantiles = {0.5, 0.9, 0.95, 0.99, 0.999, 1.0};

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += v[i];
  }
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

struct Routine {
  const char* name;
  double scheduler::IterationTiming::*field;
};

const std::vector<Routine>& routines() {
  using T = scheduler::IterationTiming;
  static const std::vector<Routine> r = {{"compute_distances", &T::compute_distances},
                                         {"generate_horizon", &T::generate_horizon},
                                         {"update_horizon", &T::update_horizon},
                                         {"generate_gbur", &T::generate_gbur},
                                         {"weights_next_state", &T::weights_next_state},
                                         {"update_curr_state", &T::update_curr_state},
                                         {"is_valid", &T::is_valid},
                                         {"replan", &T::replan},
                                         {"t1_total", &T::t1_total},
                                         {"total", &T::total}};
  return r;
}

// Nearest-rank quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const auto n = sorted.size();
  auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  return sorted[k - 1];
}

}  // namespace

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_runs_csv(std::ostream& os, const std::vector<sim::RunRow>& rows) {
  os << join(kRunsHeader) << '\n';
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    os << fmt(r.cell.T) << ',' << fmt(r.cell.e1) << ',' << fmt(r.cell.u1) << ',' << r.cell.n_obs << ',' << r.run << ','
       << r.seed << ',' << (m.success ? 1 : 0) << ',' << sim::to_string(m.outcome) << ',' << fmt(m.algorithm_time)
       << ',' << fmt(m.path_length) << ',' << m.iterations << ',' << m.deadline_overruns << ','
       << m.replans_requested << ',' << m.replans_succeeded << ',' << m.fallbacks << ',' << (m.initial_path ? 1 : 0)
       << '\n';
  }
}

void write_trial_csv(std::ostream& os, const std::vector<sim::CellRow>& cells) {
  os << join(kTrialHeader) << '\n';
  for (const auto& c : cells) {
    os << fmt(c.cell.T) << ',' << fmt(c.cell.e1) << ',' << fmt(c.cell.u1) << ',' << c.cell.n_obs << ',' << c.runs
       << ',' << fmt(c.success_rate) << ',' << fmt(c.time_mean) << ',' << fmt(c.time_std) << ','
       << fmt(c.length_mean) << ',' << fmt(c.length_std) << ',' << c.collisions_I << ',' << c.collisions_II << ','
       << c.timeouts << '\n';
  }
}

void write_timing_cdf_csv(std::ostream& os, const std::vector<scheduler::IterationTiming>& timings) {
  os << join(kTimingHeader) << '\n';
  for (const auto& r : routines()) {
    std::vector<double> v;
    v.reserve(timings.size());
    for (const auto& t : timings) v.push_back(t.*(r.field));
    std::sort(v.begin(), v.end());
    for (double q : kTimingQuantiles) {
      os << r.name << ',' << fmt(q) << ',' << fmt(quantile(v, q)) << ',' << v.size() << '\n';
    }
  }
}

void write_slice_csv(std::ostream& os, const std::vector<SliceRow>& rows) {
  os << join(kSliceHeader) << '\n';
  for (const auto& r : rows) {
    os << r.root << ',' << fmt(r.sample.x) << ',' << fmt(r.sample.y) << ',' << fmt(r.sample.v_obs) << ','
       << (r.sample.inside ? 1 : 0) << '\n';
  }
}

std::string event_json(const sim::IterationEvent& ev) {
  const auto& o = ev.report.outcome;
  json timing = json::object();
  for (const auto& r : routines()) timing[r.name] = ev.report.timing.*(r.field);
  timing["max_spine"] = ev.report.timing.max_spine;
  json j = {{"iteration", ev.iteration},
            {"time", ev.time},
            {"outcome", planner::to_string(o.kind)},
            {"status", planner::to_string(o.status)},
            {"d_c", o.d_c},
            {"N_h", o.N_h},
            {"horizon_nodes", o.horizon_nodes},
            {"weight_max", o.weight_max},
            {"weight_mean", o.weight_mean},
            {"replan_requested", o.replan_requested},
            {"replan_attempted", ev.report.replan_attempted},
            {"replan_succeeded", ev.report.replan_succeeded},
            {"fallback", o.fallback},
            {"bisections", o.bisections},
            {"deadline_overrun", ev.report.deadline_overrun},
            {"t1_checkpoints", ev.report.t1_checkpoints},
            {"timing", timing}};
  return j.dump();
}

std::string describe(const sim::RunMetrics& m) {
  std::ostringstream os;
  os << "outcome: " << sim::to_string(m.outcome) << '\n'
     << "success: " << (m.success ? "true" : "false") << '\n'
     << "algorithm_time: " << fmt(m.algorithm_time) << " s\n"
     << "path_length: " << fmt(m.path_length) << " rad\n"
     << "iterations: " << m.iterations << '\n'
     << "deadline_overruns: " << m.deadline_overruns << '\n'
     << "replans_requested: " << m.replans_requested << '\n'
     << "replans_succeeded: " << m.replans_succeeded << '\n';
  return os.str();
}

std::string write_file(const std::string& dir, const std::string& name, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir + "': " + ec.message());
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path + "'");
  return path;
}

ValidationResult validate_csv(const std::string& text, const std::vector<std::string>& header) {
  ValidationResult res;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  const auto error = [&res](long l, const std::string& msg) {
    res.ok = false;
    res.errors.push_back("line " + std::to_string(l) + ": " + msg);
  };
  if (!std::getline(in, line)) {
    error(1, "missing header");
    return res;
  }
  ++lineno;
  if (line != join(header)) error(1, "header mismatch, expected '" + join(header) + "'");
  // Column types are taken from the first data row and must stay fixed.
  std::vector<bool> numeric;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      error(lineno, "empty line");
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      error(lineno, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
      continue;
    }
    if (numeric.empty()) {
      for (const auto& f : fields) numeric.push_back(is_number(f));
    } else {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (numeric[i] && !is_number(fields[i])) error(lineno, "field '" + header[i] + "' is not numeric");
      }
    }
    ++res.records;
  }
  return res;
}

ValidationResult validate_jsonl(const std::string& text) {
  ValidationResult res;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      const json j = json::parse(line);
      if (!j.is_object()) throw Error("not an object");
      for (const auto& k : kEventKeys) {
        if (!j.contains(k)) throw Error("missing key '" + k + "'");
      }
      ++res.records;
    } catch (const std::exception& e) {
      res.ok = false;
      res.errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return res;
}

ValidationResult validate_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const std::string name = std::filesystem::path(path).filename().string();
  const auto ends_with = [&name](const std::string& suffix) {
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".jsonl")) return validate_jsonl(text);
  if (ends_with("runs.csv")) return validate_csv(text, kRunsHeader);
  if (ends_with("trial.csv")) return validate_csv(text, kTrialHeader);
  if (ends_with("timing_cdf.csv")) return validate_csv(text, kTimingHeader);
  if (ends_with("deb_slice.csv")) return validate_csv(text, kSliceHeader);
  throw Error("no schema for '" + name + "'");
}

}  // namespace drgbt::output
