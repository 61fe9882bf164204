#pragma once

// Bound-constrained trust-region Levenberg-Marquardt over the joint command.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dawnik/costs.hpp"
#include "dawnik/kinematics.hpp"
#include "dawnik/proximity.hpp"
#include "dawnik/robot_model.hpp"

namespace dawnik {

enum class SolveStatus { Converged, MaxIterations, InfeasibleStart };
const char* to_string(SolveStatus status);

// How the jerk-derived displacement bounds the step.
//   PerJoint: |delta_i| <= dq_max_i for every joint.
//   Uniform:  ||delta||_inf <= min_i dq_max_i.
enum class StepLimit { PerJoint, Uniform };

struct SolverOptions {
  int max_iterations = 50;
  double initial_lambda = 1e-4;
  double min_lambda = 1e-9;
  double max_lambda = 1e9;
  double lambda_decrease = 3.0;
  double lambda_increase = 2.0;
  double step_tolerance = 1e-7;           // rad, inf-norm
  double cost_change_tolerance = 1e-9;    // relative
  double gradient_tolerance = 1e-10;      // inf-norm
  double radius_cap = 0.1;                // rad
  StepLimit step_limit = StepLimit::PerJoint;
  ProximityOptions proximity;

  void validate() const;
};

struct SolveRequest {
  const RobotModel* model = nullptr;
  Transform base;
  const ArmState* state = nullptr;
  int arm = 0;  // index of the controlled arm in the ACM
  // Spheres of every other arm at their current q.
  WorldSpheres external_spheres;
  const AllowedCollisionMatrix* acm = nullptr;
  GoalSpec goal;
  CostWeights weights;
  double dt = 0.01;  // s
};

struct SolveResult {
  Eigen::VectorXd q_cmd;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  int accepted = 0;
  int rejected = 0;
  CostBreakdown cost_breakdown;  // at q_cmd
  double initial_cost = 0.0;     // at the noisy start
  double final_cost = 0.0;
  std::vector<double> accepted_costs;  // start cost then every accepted iterate
  std::vector<ActivePair> active_pairs;
  double min_active_gap = 0.0;  // +inf when no pair is active
  Eigen::VectorXd step_bounds;  // per-joint step limit used
  double wall_time = 0.0;       // s
};

struct TrustRegionState {
  double lambda = 1e-4;
  Eigen::VectorXd radius;  // per joint, rad
  int accepted = 0;
  int rejected = 0;
};

// q_curr plus uniform noise in [-magnitude, magnitude], clamped to bounds.
Eigen::VectorXd initialize_variables(const Eigen::VectorXd& q_curr, double noise_magnitude,
                                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                     std::mt19937_64& rng);
Eigen::VectorXd initialize_variables(const Eigen::VectorXd& q_curr, double noise_magnitude,
                                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                     std::uint64_t seed);

// |qdot| dt + |qddot| dt^2 / 2 + j_max dt^3 / 6 per joint, from the filtered
// derivatives held in `state`. Throws std::invalid_argument for dt <= 0.
Eigen::VectorXd max_step_from_jerk(const ArmState& state, double dt, double j_max);

// Per-joint step bounds for the trust region under `options`.
Eigen::VectorXd trust_region_radius(const Eigen::VectorXd& dq_max, const SolverOptions& options);

// Box that q_cmd must stay in: the position limits intersected with the
// displacement each joint can make in one tick at its velocity limit. Joints
// without a velocity limit are bounded by position only.
struct CommandBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};
CommandBounds command_bounds(const RobotModel& model, const Eigen::VectorXd& q, double dt);

struct NormalEquations {
  Eigen::MatrixXd hessian;   // J^T W J
  Eigen::VectorXd gradient;  // J^T W r
};

// IRLS-weighted normal equations of the stacked blocks; W = weight * rho'(s)
// per block.
NormalEquations build_normal_equations(std::span<const ResidualBlock> blocks, int dof);

// Solves (H + lambda diag(H)) delta = -g. Returns false when the system is
// singular or the step is not finite.
bool solve_damped(const NormalEquations& eq, double lambda, Eigen::VectorXd& delta);

// Clips delta into the per-joint box [-radius, radius].
Eigen::VectorXd clip_step(const Eigen::VectorXd& delta, const Eigen::VectorXd& radius);

enum class Convergence { Continue, Converged };
Convergence convergence_check(double step_inf_norm, double cost_before, double cost_after, double gradient_inf_norm,
                              const SolverOptions& options);

// One solver per controlled arm. Owns the noise generator, so consecutive
// solves draw consecutive noise.
class Solver {
 public:
  explicit Solver(SolverOptions options = {}, std::uint64_t seed = 0);

  SolveResult solve(const SolveRequest& request);

  const SolverOptions& options() const { return options_; }

 private:
  SolverOptions options_;
  std::mt19937_64 rng_;
};

}  // namespace dawnik
