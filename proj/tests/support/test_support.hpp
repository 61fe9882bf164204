#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "dawnik/costs.hpp"
#include "dawnik/kinematics.hpp"
#include "dawnik/robot_model.hpp"
#include "dawnik/scenario.hpp"

namespace dawnik::testing {

std::filesystem::path data_dir();
std::filesystem::path robot_path(const std::string& name);     // "s6" -> data/robots/s6.json
std::filesystem::path scenario_path(const std::string& name);  // "s1_circle_xy" -> data/scenarios/...
std::vector<std::filesystem::path> shipped_scenarios();          // every file in data/scenarios, sorted

const RobotModel& s6();
const RobotModel& s7();
const RobotModel& planar2();

std::string read_text(const std::filesystem::path& path);

// Per-test scratch directory under the system temp dir, emptied on creation.
std::filesystem::path scratch_dir(const std::string& tag);

// Uniform sample inside the joint limits, shrunk by `margin` on each side.
Eigen::VectorXd random_configuration(const RobotModel& model, std::mt19937_64& rng, double margin = 0.0);

// Link frames computed straight from the description file with Eigen's
// Isometry3d products: the file is read with its own JSON parser, every
// joint contributes Translation(xyz) * R(rpy) * AngleAxis(q, axis). Returns
// frames keyed by child link name.
struct OracleFrame {
  std::string link;
  Eigen::Isometry3d pose;
};
std::vector<OracleFrame> fk_oracle(const std::filesystem::path& description, const Eigen::VectorXd& q,
                                   const Eigen::Isometry3d& base = Eigen::Isometry3d::Identity());
Eigen::Isometry3d oracle_frame(const std::vector<OracleFrame>& frames, const std::string& link);

// Central differences of a vector function, step h.
Eigen::MatrixXd central_difference(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-6);

// max |a - b| / max(1, |b|) over all entries.
double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// A resting state with a short random motion history, for kinodynamic terms.
ArmState moving_state(const Eigen::VectorXd& q, double dt, std::mt19937_64& rng, double speed);

// Copy of a shipped scenario with its trials and duration cut down.
ScenarioSpec short_scenario(const std::string& name, int trials, double duration);

struct GradientReport {
  int states = 0;
  int blocks = 0;
  double worst = 0.0;  // largest relative error over all blocks
  std::string worst_block;
};

// Compares every block's Jacobian with central differences (h = 1e-6) over
// random moving s6 states near a random s7. States with a pair closer than
// the gap-floor region are redrawn.
GradientReport check_gradients(int states, std::uint64_t seed);

struct ProximityReport {
  int scenes = 0;
  long expected = 0;  // brute-force pairs within the activation distance
  long missed = 0;    // of those, absent from the pipeline output
  long spurious = 0;  // pipeline pairs that are ACM-skipped or beyond activation
};

// Random s6 scenes with an s7 and a second s6 nearby; compares the pipeline
// (with an unlimited pair budget) against exhaustive search.
ProximityReport check_proximity_superset(int scenes, std::uint64_t seed);

}  // namespace dawnik::testing
