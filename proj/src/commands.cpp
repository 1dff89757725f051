#include "drgbt/commands.hpp"

#include "drgbt/errors.hpp"

#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace drgbt::commands {

namespace {

std::uint64_t parse_seed(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected an unsigned integer, got '" + s + "'");
  }
}

}  // namespace

config::AppConfig resolve_config(const std::string& path, const Overrides& ov) {
  config::AppConfig cfg;
  if (std::filesystem::exists(path)) {
    cfg = config::load_config(path);
  } else if (path == "planar" || path == "xarm6" || path == "xarm6_large") {
    cfg = config::parse_config("{\"preset\": \"" + path + "\"}");
  } else {
    throw ConfigError("config file '" + path + "' not found");
  }
  if (ov.use_env) {
    if (const char* s = std::getenv("DRGBT_SEED")) cfg.seed = parse_seed(s, "DRGBT_SEED");
    if (const char* o = std::getenv("DRGBT_OUT")) cfg.out = o;
  }
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.out) cfg.out = *ov.out;
  if (ov.budget_mode) cfg.spec.sched.mode = scheduler::parse_budget_mode(*ov.budget_mode);
  if (ov.safe) cfg.spec.planner.safe_on = *ov.safe;
  if (ov.threads) {
    if (*ov.threads < 1) throw ConfigError("--threads must be at least 1");
    cfg.trial.threads = *ov.threads;
  }
  cfg.trial.seed = cfg.seed;
  return cfg;
}

int cmd_run(const config::AppConfig& cfg, std::ostream& log) {
  const sim::Scenario sc = sim::make_scenario(cfg.spec, cfg.seed);
  std::ostringstream events;
  sim::RunHooks hooks;
  hooks.on_iteration = [&events](const sim::IterationEvent& ev) { events << output::event_json(ev) << '\n'; };
  const sim::RunMetrics m = sim::run_scenario(sc, hooks);
  const std::string path = output::write_file(cfg.out, "events.jsonl", events.str());
  log << output::describe(m) << "events: " << path << '\n';
  switch (m.outcome) {
    case sim::RunOutcome::Goal:
      return kGoal;
    case sim::RunOutcome::CollisionI:
    case sim::RunOutcome::CollisionII:
      return kCollision;
    case sim::RunOutcome::Timeout:
      return kTimeout;
  }
  return kTimeout;
}

int cmd_trial(const config::AppConfig& cfg, std::ostream& log) {
  const sim::TrialResult res = sim::run_trial(cfg.spec, cfg.trial);
  std::ostringstream trial, runs, timing;
  output::write_trial_csv(trial, res.cells);
  output::write_runs_csv(runs, res.runs);
  output::write_timing_cdf_csv(timing, res.timings);
  output::write_file(cfg.out, "trial.csv", trial.str());
  output::write_file(cfg.out, "runs.csv", runs.str());
  output::write_file(cfg.out, "timing_cdf.csv", timing.str());
  for (const auto& c : res.cells) {
    log << "T=" << output::fmt(c.cell.T) << " e1=" << output::fmt(c.cell.e1) << " n_obs=" << c.cell.n_obs
        << " success=" << output::fmt(c.success_rate) << " time=" << output::fmt(c.time_mean)
        << " length=" << output::fmt(c.length_mean) << '\n';
  }
  log << "wrote trial.csv, runs.csv, timing_cdf.csv to " << cfg.out << '\n';
  return kGoal;
}

std::vector<output::SliceRow> deb_slice_rows(const config::AppConfig& cfg) {
  const auto& d = cfg.deb;
  const RobotModel& model = cfg.spec.robot;
  std::mt19937_64 rng(cfg.seed);
  const sim::Environment env = sim::make_environment(cfg.spec, rng);
  std::vector<output::SliceRow> rows;
  for (std::size_t r = 0; r < d.roots.size(); ++r) {
    const Eigen::VectorXd& root = d.roots[r];
    if (root.size() != model.dof()) throw ConfigError("deb_slice root has the wrong size");
    const planner::LocalView view = planner::compute_local_view(model.chain, root, env, cfg.spec.planner.d_max);
    const bubbles::DynamicExpandedBubble deb{root, view.d, view.radii, 0.0};
    const Eigen::VectorXd omega = model.limits.omega_max;
    const auto time_of = [&root, &omega](const cspace::Configuration& y) {
      return ((y - root).cwiseAbs().array() / omega.array()).maxCoeff();
    };
    const auto samples =
        bubbles::deb_slice(deb, d.axis_a, d.axis_b, root[d.axis_a] - d.half_width, root[d.axis_a] + d.half_width,
                           root[d.axis_b] - d.half_width, root[d.axis_b] + d.half_width, d.resolution, d.velocities,
                           time_of);
    for (const auto& s : samples) rows.push_back({static_cast<int>(r), s});
  }
  return rows;
}

int cmd_deb_slice(const config::AppConfig& cfg, std::ostream& log) {
  const auto rows = deb_slice_rows(cfg);
  std::ostringstream os;
  output::write_slice_csv(os, rows);
  const std::string path = output::write_file(cfg.out, "deb_slice.csv", os.str());
  for (double v : cfg.deb.velocities) {
    long inside = 0;
    for (const auto& r : rows) inside += (r.sample.v_obs == v && r.sample.inside) ? 1 : 0;
    log << "v_obs=" << output::fmt(v) << " inside=" << inside << '\n';
  }
  log << "wrote " << path << '\n';
  return kGoal;
}

int cmd_validate(const std::string& path, std::ostream& log) {
  std::vector<std::string> files;
  if (std::filesystem::is_directory(path)) {
    for (const char* name : {"runs.csv", "trial.csv", "timing_cdf.csv", "deb_slice.csv", "events.jsonl"}) {
      const auto p = std::filesystem::path(path) / name;
      if (std::filesystem::exists(p)) files.push_back(p.string());
    }
    if (files.empty()) {
      log << "no output files in " << path << '\n';
      return kConfigError;
    }
  } else {
    files.push_back(path);
  }
  bool ok = true;
  for (const auto& f : files) {
    const output::ValidationResult r = output::validate_file(f);
    log << f << ": " << (r.ok ? "ok" : "invalid") << " (" << r.records << " records)\n";
    for (const auto& e : r.errors) log << "  " << e << '\n';
    ok = ok && r.ok;
  }
  return ok ? kGoal : kConfigError;
}

}  // namespace drgbt::commands
