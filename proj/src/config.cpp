#include "drgbt/config.hpp"

#include "drgbt/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace drgbt::config {

namespace {

using nlohmann::json;
using geometry::Box;
using geometry::Vec3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_at_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

// Resolves lines of keys by searching the source text for "key". Keys are
// searched after the line of the enclosing section, which is good enough to
// anchor diagnostics for hand-written files.
class Source {
 public:
  explicit Source(const std::string& text) : text_(text) {}

  int line_of(const std::string& key, int after_line = 1) const {
    const std::string needle = "\"" + key + "\"";
    std::size_t start = 0;
    for (int l = 1; l < after_line && start != std::string::npos; ++l) {
      start = text_.find('\n', start);
      if (start != std::string::npos) ++start;
    }
    if (start == std::string::npos) start = 0;
    std::size_t pos = text_.find(needle, start);
    if (pos == std::string::npos) pos = text_.find(needle);
    return pos == std::string::npos ? 0 : line_at_byte(text_, pos);
  }

 private:
  const std::string& text_;
};

// Typed access to one JSON object with line-anchored errors and unknown-key detection.
class Section {
 public:
  Section(const json& j, const Source& src, std::string name, int line)
      : j_(j), src_(src), name_(std::move(name)), line_(line) {
    if (!j_.is_object()) fail(name_ + " must be an object", line_);
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  int line_of(const std::string& key) const { return src_.line_of(key, line_); }

  [[noreturn]] void fail(const std::string& msg, int line) const { throw ConfigError(msg, line); }
  [[noreturn]] void fail_key(const std::string& key, const std::string& msg) const {
    fail(qualified(key) + ": " + msg, line_of(key));
  }

  std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  double number(const std::string& key) const {
    const json& v = j_.at(key);
    if (!v.is_number()) fail_key(key, "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double def) const { return has(key) ? number(key) : def; }
  double positive(const std::string& key, double def) const {
    const double v = number(key, def);
    if (!(v > 0.0)) fail_key(key, "must be positive");
    return v;
  }
  double nonnegative(const std::string& key, double def) const {
    const double v = number(key, def);
    if (!(v >= 0.0)) fail_key(key, "must be nonnegative");
    return v;
  }
  long integer(const std::string& key, long def, long lo = std::numeric_limits<long>::min()) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail_key(key, "expected an integer");
    const long x = v.get<long>();
    if (x < lo) fail_key(key, "must be at least " + std::to_string(lo));
    return x;
  }
  std::uint64_t u64(const std::string& key, std::uint64_t def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail_key(key, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string() && (v == "on" || v == "off")) return v == "on";
    fail_key(key, "expected true/false or \"on\"/\"off\"");
  }
  std::string string(const std::string& key, const std::string& def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) fail_key(key, "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key) const {
    const json& v = j_.at(key);
    if (!v.is_array()) fail_key(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail_key(key, "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  Eigen::VectorXd vector(const std::string& key, int size = -1) const {
    const std::vector<double> v = numbers(key);
    if (size >= 0 && static_cast<int>(v.size()) != size) {
      fail_key(key, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
  }
  geometry::Vec3 vec3(const std::string& key) const { return vector(key, 3); }
  /// Scalar broadcast to `n` entries, or an array of exactly `n`.
  Eigen::VectorXd per_joint(const std::string& key, int n) const {
    if (j_.at(key).is_number()) return Eigen::VectorXd::Constant(n, number(key));
    return vector(key, n);
  }
  Section sub(const std::string& key) const { return Section(j_.at(key), src_, qualified(key), line_of(key)); }
  const json& raw(const std::string& key) const { return j_.at(key); }
  const json& raw() const { return j_; }
  const Source& source() const { return src_; }
  int line() const { return line_; }

  void allow_only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!allowed.count(it.key())) fail_key(it.key(), "unknown key");
    }
  }

 private:
  const json& j_;
  const Source& src_;
  std::string name_;
  int line_;
};

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    const auto p = msg.find("parse error");
    if (p != std::string::npos) msg = msg.substr(p);
    throw ConfigError("syntax error: " + msg, line_at_byte(text, e.byte > 0 ? e.byte - 1 : 0));
  }
}

Box parse_box(const Section& s, bool moving) {
  s.allow_only({"center", "size", "half_extents", "velocity"});
  Box b;
  b.center = s.vec3("center");
  if (s.has("half_extents")) {
    b.half_extents = s.vec3("half_extents");
  } else if (s.has("size")) {
    b.half_extents = Vec3::Constant(0.5 * s.positive("size", 0.01));
  } else {
    s.fail("box needs \"size\" or \"half_extents\"", s.line());
  }
  if ((b.half_extents.array() < 0.0).any()) s.fail_key("half_extents", "must be nonnegative");
  b.velocity = s.has("velocity") ? s.vec3("velocity") : Vec3::Zero();
  if (!moving && b.velocity.norm() > 0.0) s.fail_key("velocity", "fixtures must be static");
  return b;
}

std::vector<Box> parse_boxes(const Section& parent, const std::string& key, bool moving) {
  const json& arr = parent.raw(key);
  if (!arr.is_array()) parent.fail_key(key, "expected an array of boxes");
  std::vector<Box> out;
  const int line = parent.line_of(key);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(parse_box(Section(arr[i], parent.source(), parent.qualified(key) + "[" + std::to_string(i) + "]", line),
                            moving));
  }
  return out;
}

RobotModel parse_model_section(const Section& s) {
  s.allow_only({"name", "base_position", "joint_offsets", "joint_axes", "tool_offset", "link_radii", "lower",
                "upper", "base_radius", "self_gap", "omega_max", "alpha_max", "jerk_max"});
  RobotModel m;
  auto& c = m.chain;
  c.name = s.string("name", "custom");
  c.base_position = s.has("base_position") ? s.vec3("base_position") : Vec3::Zero();
  const auto vec3_list = [&s](const std::string& key) {
    const json& arr = s.raw(key);
    if (!arr.is_array()) s.fail_key(key, "expected an array of 3-vectors");
    std::vector<Vec3> out;
    for (const auto& v : arr) {
      if (!v.is_array() || v.size() != 3) s.fail_key(key, "expected an array of 3-vectors");
      out.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }
    return out;
  };
  if (!s.has("joint_offsets") || !s.has("joint_axes")) s.fail("model needs joint_offsets and joint_axes", s.line());
  c.joint_offsets = vec3_list("joint_offsets");
  c.joint_axes = vec3_list("joint_axes");
  const int n = static_cast<int>(c.joint_axes.size());
  if (static_cast<int>(c.joint_offsets.size()) != n) s.fail_key("joint_offsets", "must have one entry per joint axis");
  c.tool_offset = s.has("tool_offset") ? s.vec3("tool_offset") : Vec3::Zero();
  if (!s.has("link_radii")) s.fail("model needs link_radii", s.line());
  c.link_radii = s.per_joint("link_radii", n);
  c.joint_limits.lower = s.has("lower") ? s.per_joint("lower", n) : Eigen::VectorXd::Constant(n, -std::numbers::pi);
  c.joint_limits.upper = s.has("upper") ? s.per_joint("upper", n) : Eigen::VectorXd::Constant(n, std::numbers::pi);
  c.base_radius = s.nonnegative("base_radius", 0.0);
  c.self_gap = static_cast<int>(s.integer("self_gap", 2, 2));
  m.limits.omega_max = s.has("omega_max") ? s.per_joint("omega_max", n) : Eigen::VectorXd::Constant(n, std::numbers::pi);
  m.limits.alpha_max = s.has("alpha_max") ? s.per_joint("alpha_max", n) : Eigen::VectorXd::Constant(n, 20.0);
  m.limits.jerk_max = s.has("jerk_max") ? s.per_joint("jerk_max", n) : Eigen::VectorXd::Constant(n, 500.0);
  try {
    m.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), s.line());
  }
  return m;
}

void parse_scenario(const Section& s, sim::ScenarioSpec& spec, int dof) {
  s.allow_only({"n_obs", "obstacle_size", "v_obs", "v_obs_per_iteration", "uniform_speed", "rho0", "max_runtime",
                "init_plan_budget", "q_start", "q_goal", "workspace_center", "workspace_radius", "base_center",
                "base_exclusion", "planar", "obstacles", "fixtures"});
  spec.obstacle_params.n_obs = static_cast<int>(s.integer("n_obs", spec.obstacle_params.n_obs, 0));
  spec.obstacle_params.size = s.positive("obstacle_size", spec.obstacle_params.size);
  spec.obstacle_params.uniform_speed = s.boolean("uniform_speed", spec.obstacle_params.uniform_speed);
  spec.v_obs = s.nonnegative("v_obs", spec.v_obs);
  if (s.has("v_obs_per_iteration")) spec.v_obs_per_iteration = s.nonnegative("v_obs_per_iteration", 0.0);
  spec.rho0 = s.nonnegative("rho0", spec.rho0);
  spec.max_runtime = s.positive("max_runtime", spec.max_runtime);
  spec.init_plan_budget = s.nonnegative("init_plan_budget", spec.init_plan_budget);
  if (s.has("q_start")) spec.q_start = s.vector("q_start", dof);
  if (s.has("q_goal")) spec.q_goal = s.vector("q_goal", dof);
  if (s.has("workspace_center")) spec.workspace_center = s.vec3("workspace_center");
  spec.workspace_radius = s.positive("workspace_radius", spec.workspace_radius);
  if (s.has("base_center")) spec.base_center = s.vec3("base_center");
  if (s.has("base_exclusion")) spec.base_exclusion = s.nonnegative("base_exclusion", 0.0);
  spec.planar = s.boolean("planar", spec.planar);
  if (s.has("obstacles")) spec.obstacles = parse_boxes(s, "obstacles", true);
  if (s.has("fixtures")) spec.fixtures = parse_boxes(s, "fixtures", false);
}

void parse_budget(const Section& s, sim::ScenarioSpec& spec) {
  s.allow_only({"T", "e1", "u1", "mode", "units_per_second", "realtime"});
  const double T = s.positive("T", spec.budget.T);
  double e1 = spec.budget.e1;
  if (s.has("e1") && s.has("u1")) s.fail_key("u1", "give either e1 or u1, not both");
  if (s.has("e1")) e1 = s.positive("e1", e1);
  else if (s.has("u1")) e1 = s.positive("u1", 1.0) * T;
  else e1 = std::min(e1, T);
  try {
    spec.budget = scheduler::TaskBudget::make(T, e1);
  } catch (const ConfigError& e) {
    s.fail_key(s.has("e1") ? "e1" : (s.has("u1") ? "u1" : "T"), e.what());
  }
  if (s.has("mode")) {
    try {
      spec.sched.mode = scheduler::parse_budget_mode(s.string("mode", "wall"));
    } catch (const ConfigError& e) {
      s.fail_key("mode", e.what());
    }
  }
  spec.sched.units_per_second = s.positive("units_per_second", spec.sched.units_per_second);
  spec.sched.realtime = s.boolean("realtime", spec.sched.realtime);
}

void parse_planner(const Section& s, planner::DrgbtParams& p) {
  s.allow_only({"N_h0", "d_crit", "w_min", "w_mean_min", "max_modify_attempts", "safe_on", "D_ref",
                "neighborhood_radius", "spine_layers", "dgbur_layers", "max_bisection_iters", "dt", "dt_check",
                "d_max", "planning_margin", "goal_tolerance"});
  p.N_h0 = static_cast<int>(s.integer("N_h0", p.N_h0, 1));
  p.d_crit = s.positive("d_crit", p.d_crit);
  p.w_min = s.nonnegative("w_min", p.w_min);
  p.w_mean_min = s.nonnegative("w_mean_min", p.w_mean_min);
  if (p.w_min > 1.0) s.fail_key("w_min", "must lie in [0, 1]");
  if (p.w_mean_min > 1.0) s.fail_key("w_mean_min", "must lie in [0, 1]");
  p.max_modify_attempts = static_cast<int>(s.integer("max_modify_attempts", p.max_modify_attempts, 0));
  p.safe_on = s.boolean("safe_on", p.safe_on);
  p.D_ref = s.positive("D_ref", p.D_ref);
  p.neighborhood_radius = s.positive("neighborhood_radius", p.neighborhood_radius);
  p.spine_layers = static_cast<int>(s.integer("spine_layers", p.spine_layers, 1));
  p.dgbur_layers = static_cast<int>(s.integer("dgbur_layers", p.dgbur_layers, 1));
  p.max_bisection_iters = static_cast<int>(s.integer("max_bisection_iters", p.max_bisection_iters, 0));
  p.dt = s.positive("dt", p.dt);
  p.dt_check = s.has("dt_check") ? s.positive("dt_check", p.dt_check) : p.dt / 10.0;
  p.d_max = s.positive("d_max", p.d_max);
  p.planning_margin = s.nonnegative("planning_margin", p.planning_margin);
  p.goal_tolerance = s.positive("goal_tolerance", p.goal_tolerance);
}

void parse_replanner(const Section& s, replanner::ReplannerParams& p) {
  s.allow_only({"spine_layers", "goal_bias", "d_max", "brute_force_below", "shortcut"});
  p.spine_layers = static_cast<int>(s.integer("spine_layers", p.spine_layers, 1));
  p.goal_bias = s.nonnegative("goal_bias", p.goal_bias);
  if (p.goal_bias > 1.0) s.fail_key("goal_bias", "must lie in [0, 1]");
  p.d_max = s.positive("d_max", p.d_max);
  p.brute_force_below = static_cast<std::size_t>(s.integer("brute_force_below", 64, 0));
  p.shortcut = s.boolean("shortcut", p.shortcut);
}

void parse_trial(const Section& s, sim::TrialGrid& g) {
  s.allow_only({"T_values", "n_obs_values", "u1_values", "runs_per_cell", "threads"});
  if (s.has("T_values")) {
    g.T_values = s.numbers("T_values");
    for (double T : g.T_values) {
      if (!(T > 0.0)) s.fail_key("T_values", "periods must be positive");
    }
  }
  if (s.has("n_obs_values")) {
    g.n_obs_values.clear();
    for (double v : s.numbers("n_obs_values")) {
      if (v < 0.0 || v != std::floor(v)) s.fail_key("n_obs_values", "expected nonnegative integers");
      g.n_obs_values.push_back(static_cast<int>(v));
    }
  }
  if (s.has("u1_values")) {
    g.u1_values = s.numbers("u1_values");
    for (double u : g.u1_values) {
      if (!(u > 0.0) || u > 1.0) s.fail_key("u1_values", "entries must lie in (0, 1]");
    }
  }
  g.runs_per_cell = static_cast<int>(s.integer("runs_per_cell", g.runs_per_cell, 1));
  g.threads = static_cast<int>(s.integer("threads", g.threads, 1));
}

void parse_deb(const Section& s, DebSliceConfig& d, int dof) {
  s.allow_only({"roots", "axes", "half_width", "resolution", "velocities"});
  if (s.has("roots")) {
    const json& arr = s.raw("roots");
    if (!arr.is_array() || arr.empty()) s.fail_key("roots", "expected a nonempty array of configurations");
    d.roots.clear();
    for (const auto& r : arr) {
      if (!r.is_array() || static_cast<int>(r.size()) != dof) {
        s.fail_key("roots", "each root needs " + std::to_string(dof) + " entries");
      }
      Eigen::VectorXd q(dof);
      for (int i = 0; i < dof; ++i) {
        if (!r[static_cast<std::size_t>(i)].is_number()) s.fail_key("roots", "expected numbers");
        q[i] = r[static_cast<std::size_t>(i)].get<double>();
      }
      d.roots.push_back(q);
    }
  }
  if (s.has("axes")) {
    const Eigen::VectorXd a = s.vector("axes", 2);
    d.axis_a = static_cast<int>(a[0]);
    d.axis_b = static_cast<int>(a[1]);
    if (d.axis_a == d.axis_b || d.axis_a < 0 || d.axis_b < 0 || d.axis_a >= dof || d.axis_b >= dof) {
      s.fail_key("axes", "expected two distinct joint indices below " + std::to_string(dof));
    }
  }
  d.half_width = s.positive("half_width", d.half_width);
  d.resolution = static_cast<int>(s.integer("resolution", d.resolution, 1));
  if (s.has("velocities")) {
    d.velocities = s.numbers("velocities");
    for (double v : d.velocities) {
      if (v < 0.0) s.fail_key("velocities", "must be nonnegative");
    }
  }
}

}  // namespace

RobotModel parse_robot_model(const std::string& text) {
  const json j = parse_json(text);
  const Source src(text);
  return parse_model_section(Section(j, src, "", 1));
}

RobotModel load_robot_model(const std::string& path) { return parse_robot_model(read_file(path)); }

AppConfig parse_config(const std::string& text, const std::string& base_dir) {
  const json j = parse_json(text);
  const Source src(text);
  const Section root(j, src, "", 1);
  root.allow_only({"preset", "robot", "robot_model", "seed", "out", "scenario", "budget", "planner", "replanner",
                   "trial", "deb_slice"});

  AppConfig cfg;
  const std::string preset = root.string("preset", "xarm6");
  try {
    cfg.spec = sim::preset_by_name(preset);
  } catch (const ConfigError& e) {
    root.fail_key("preset", e.what());
  }
  if (root.has("robot") && root.has("robot_model")) root.fail_key("robot_model", "give either robot or robot_model");
  if (root.has("robot")) {
    cfg.spec.robot = parse_model_section(root.sub("robot"));
    cfg.spec.name = cfg.spec.robot.chain.name;
  } else if (root.has("robot_model")) {
    std::filesystem::path p = root.string("robot_model", "");
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    try {
      cfg.spec.robot = load_robot_model(p.string());
    } catch (const ConfigError& e) {
      root.fail_key("robot_model", std::string("in '") + p.string() + "': " + e.what());
    }
    cfg.spec.name = cfg.spec.robot.chain.name;
  }
  const int dof = cfg.spec.robot.dof();
  cfg.seed = root.u64("seed", cfg.seed);
  cfg.out = root.string("out", cfg.out);
  if (root.has("scenario")) parse_scenario(root.sub("scenario"), cfg.spec, dof);
  if (root.has("budget")) parse_budget(root.sub("budget"), cfg.spec);
  if (root.has("planner")) parse_planner(root.sub("planner"), cfg.spec.planner);
  if (root.has("replanner")) parse_replanner(root.sub("replanner"), cfg.spec.replanner);
  cfg.trial.seed = cfg.seed;
  cfg.trial.T_values = {cfg.spec.budget.T};
  cfg.trial.n_obs_values = {cfg.spec.obstacle_params.n_obs};
  if (root.has("trial")) parse_trial(root.sub("trial"), cfg.trial);
  if (cfg.deb.roots.empty()) cfg.deb.roots = {Eigen::VectorXd::Zero(dof)};
  if (root.has("deb_slice")) parse_deb(root.sub("deb_slice"), cfg.deb, dof);
  if (dof < 2) cfg.deb.axis_b = cfg.deb.axis_a;
  return cfg;
}

AppConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  const std::filesystem::path p(path);
  AppConfig cfg = parse_config(text, p.has_parent_path() ? p.parent_path().string() : ".");
  cfg.path = path;
  return cfg;
}

}  // namespace drgbt::config
