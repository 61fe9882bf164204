#pragma once

// Scenario descriptions: which arms exist, which are controlled, what they
// track and how the external ones move.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "dawnik/costs.hpp"
#include "dawnik/geometry.hpp"
#include "dawnik/paths.hpp"
#include "dawnik/robot_model.hpp"
#include "dawnik/solver.hpp"

namespace dawnik {

enum class ScenarioId { S1, S2, S3, S4 };
ScenarioId parse_scenario_id(std::string_view s);
const char* to_string(ScenarioId id);

// Joint trajectory played back in a loop with linear interpolation.
class JointTrajectory {
 public:
  JointTrajectory() = default;
  // Stamps strictly increasing from 0. Throws ConfigError otherwise.
  JointTrajectory(std::vector<double> stamps, std::vector<Eigen::VectorXd> samples);

  // Rows of `stamp, q_1..q_m`; an optional non-numeric header line is
  // skipped. Throws ConfigError naming the file and line.
  static JointTrajectory load_csv(const std::filesystem::path& path, int dof);

  bool empty() const { return stamps_.empty(); }
  double period() const { return stamps_.empty() ? 0.0 : stamps_.back(); }
  std::span<const double> stamps() const { return stamps_; }
  std::span<const Eigen::VectorXd> samples() const { return samples_; }

  // Position at time t; t wraps modulo the last stamp.
  Eigen::VectorXd sample(double t) const;

 private:
  std::vector<double> stamps_;
  std::vector<Eigen::VectorXd> samples_;
};

enum class ArmRole { Controlled, External };

struct ArmConfig {
  std::string name;
  std::filesystem::path model_path;
  std::shared_ptr<const RobotModel> model;
  Transform base;
  ArmRole role = ArmRole::Controlled;
  Eigen::VectorXd initial_q;
  // Controlled arms.
  PathSpec path;
  GoalMode goal_mode = GoalMode::Pose;
  std::optional<Eigen::Quaterniond> goal_orientation;  // default: orientation at the settled start
  double w_position = 1.0;
  double w_orientation = 1.0;
  CostWeights weights;
  // External arms.
  JointTrajectory trajectory;

  bool controlled() const { return role == ArmRole::Controlled; }
};

struct ScenarioSpec {
  std::string name;
  ScenarioId id = ScenarioId::S1;
  std::vector<ArmConfig> arms;
  double tick_rate = 100.0;  // Hz
  double duration = 12.0;    // s
  int trials = 5;
  std::uint64_t seed = 1;
  bool expect_no_collisions = false;
  bool settle_start = true;  // drive controlled arms onto their first waypoint before tick 0
  SolverOptions solver;
  int verify_substeps = 4;

  int controlled_count() const;
  int external_count() const;
  // Throws ConfigError, including when the arm roles do not match the
  // scenario id (S1 1/0, S2 1/1, S3 1/2, S4 2/0).
  void validate() const;
};

// Parses a scenario document. Relative file names resolve against
// `base_dir`. Throws ParseError for malformed JSON and schema problems (with
// the field path), ConfigError for semantic problems and missing files, and
// lets model loading errors propagate.
ScenarioSpec parse_scenario(const std::string& text, const std::filesystem::path& base_dir);
ScenarioSpec load_scenario(const std::filesystem::path& path);

// Resolves a scenario name against DAWNIK_DEFAULT_CONFIG_DIR when `name`
// is not an existing path.
std::filesystem::path resolve_config_path(const std::filesystem::path& name);

}  // namespace dawnik
