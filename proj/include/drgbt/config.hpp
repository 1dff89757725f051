#pragma once

#include "drgbt/sim.hpp"

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace drgbt::config {

/// Grid slice of dynamic expanded bubbles rooted at one or more configurations.
struct DebSliceConfig {
  std::vector<cspace::Configuration> roots;
  int axis_a{0};
  int axis_b{1};
  double half_width{std::numbers::pi};  // slice window around each root, per axis
  int resolution{200};
  std::vector<double> velocities{0.0, 2.0, 4.0, 6.0};
};

struct AppConfig {
  sim::ScenarioSpec spec;
  sim::TrialGrid trial;
  DebSliceConfig deb;
  std::uint64_t seed{1};
  std::string out{"out"};
  std::string path;  // file the config came from, empty for presets
};

/// Parses a JSON config document. Errors carry the 1-based line of the
/// offending key (or of the syntax error). `base_dir` resolves relative model paths.
AppConfig parse_config(const std::string& text, const std::string& base_dir = ".");
AppConfig load_config(const std::string& path);

/// Robot model document: chain geometry, joint limits and kinematic limits.
RobotModel parse_robot_model(const std::string& text);
RobotModel load_robot_model(const std::string& path);

}  // namespace drgbt::config
