#pragma once

// Fixed-rate multi-arm simulation. Each tick the external arms advance along
// their trajectories, every controlled arm solves against a snapshot of all
// other arms, and the commands are applied together.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dawnik/geometry.hpp"
#include "dawnik/scenario.hpp"
#include "dawnik/solver.hpp"

namespace dawnik {

struct PairRecord {
  int id_a = 0;  // sphere on the controlled arm
  int arm_b = 0;
  int id_b = 0;
  double gap = 0.0;
};

struct TickRecord {
  int tick = 0;
  double stamp = 0.0;  // s
  int arm = 0;
  Eigen::VectorXd q;   // command (controlled) or played-back state (external)
  Pose ee;             // world frame, from q
  // Controlled arms only.
  std::size_t waypoint = 0;
  Eigen::Vector3d reference = Eigen::Vector3d::Zero();
  double min_gap = std::numeric_limits<double>::infinity();  // over the pairs active this tick
  int active_pairs = 0;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  std::vector<PairRecord> pairs;  // filled when RunOptions::record_active_pairs
};

struct ArmStart {
  std::string name;
  bool controlled = false;
  Eigen::VectorXd q;                                                    // state before tick 0
  Eigen::Quaterniond goal_orientation = Eigen::Quaterniond::Identity();  // controlled arms
};

struct RunLog {
  std::string scenario;
  int trial = 0;
  std::uint64_t seed = 0;
  double tick_rate = 100.0;
  std::vector<ArmStart> arms;
  std::vector<TickRecord> records;  // tick-major, arms in scenario order
  // Not serialized.
  std::vector<double> solve_times;  // s, one per controlled-arm solve
  int solver_failures = 0;

  std::size_t tick_count() const { return arms.empty() ? 0 : records.size() / arms.size(); }
  const TickRecord& at(std::size_t tick, std::size_t arm) const { return records[tick * arms.size() + arm]; }
};

// Seed of trial `trial` of a scenario seeded with `base`, and of the solver
// of arm `arm` within that trial.
std::uint64_t trial_seed(std::uint64_t base, int trial);
std::uint64_t solver_seed(std::uint64_t trial_seed, int arm);

// Runs the solver on a resting arm until it stops moving, to place the arm
// on its first waypoint. Other arms are fixed obstacles.
Eigen::VectorXd settle_configuration(const RobotModel& model, const Transform& base, const Eigen::VectorXd& q0,
                                     const GoalSpec& goal, const CostWeights& weights, const SolverOptions& options,
                                     const WorldSpheres& others, const AllowedCollisionMatrix& acm, int arm,
                                     double dt, int max_solves = 400);

struct RunOptions {
  bool record_active_pairs = false;
};

RunLog run_trial(const ScenarioSpec& spec, int trial, const RunOptions& options = {});
std::vector<RunLog> run_scenario(const ScenarioSpec& spec, const RunOptions& options = {});

// Scene ACM over all arms of the scenario, with the given sphere resolution.
struct SceneGeometry {
  std::vector<RobotModel> models;
  std::vector<Transform> bases;
  AllowedCollisionMatrix acm;
};
SceneGeometry scene_geometry(const ScenarioSpec& spec, int max_per_link = 0);  // 0: models as loaded

}  // namespace dawnik
