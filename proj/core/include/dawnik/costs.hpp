#pragma once

// Residual blocks for the IK objective and their robust losses.
//
// Each residual family is written once as a template over the scalar type so
// the same code yields plain values (double) and exact Jacobians (Dual).

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dawnik/dual.hpp"
#include "dawnik/geometry.hpp"
#include "dawnik/kinematics.hpp"
#include "dawnik/proximity.hpp"
#include "dawnik/robot_model.hpp"

namespace dawnik {

// Derivative slots available to the solver; models with more actuated
// joints are rejected.
inline constexpr int kMaxDof = 8;
using Jet = Dual<kMaxDof>;

enum class GoalMode { Position, Orientation, Pose };

struct GoalSpec {
  GoalMode mode = GoalMode::Pose;
  Pose target;
  double w_position = 1.0;     // w11
  double w_orientation = 1.0;  // w12

  static GoalSpec position(const Eigen::Vector3d& p, double weight = 1.0);
  static GoalSpec orientation(const Eigen::Quaterniond& q, double weight = 1.0);
  static GoalSpec pose(const Pose& target, double w_position = 1.0, double w_orientation = 1.0);

  // Throws ConfigError when the weights do not match the mode.
  void validate() const;
};

enum class Loss { Identity, Cauchy, Tukey };

enum class CostFamily { EndEffector, Collision, PreferredPosition, JointLimits, Kinodynamic };
inline constexpr std::array<CostFamily, 5> kCostFamilies{CostFamily::EndEffector, CostFamily::Collision,
                                                         CostFamily::PreferredPosition, CostFamily::JointLimits,
                                                         CostFamily::Kinodynamic};
const char* to_string(CostFamily family);

inline constexpr double kDefaultGapFloor = 1e-4;     // m
inline constexpr double kDefaultTukeyScale = 0.5;    // rad
inline constexpr double kDefaultMaxJerk = 10.0;      // rad/s^3
inline constexpr double kDefaultNoiseMagnitude = 1e-5;  // rad

struct CostWeights {
  double w_ee = 1000.0;
  double w_coll = 5.0;
  double w_pref = 0.01;
  double w_poslim = 1.0;
  double w_kino = 1.0;
  double eps_coll = 0.02;   // m
  double eps_limit = 0.01;  // rad
  Eigen::VectorXd q_pref;   // empty: joint-range centers
  double j_max = kDefaultMaxJerk;
  double noise_magnitude = kDefaultNoiseMagnitude;
  double tukey_scale = kDefaultTukeyScale;
  double gap_floor = kDefaultGapFloor;

  void validate() const;
};

struct ResidualBlock {
  CostFamily label = CostFamily::EndEffector;
  Eigen::VectorXd residuals;
  // d residuals / d q_cmd, rows x dof. Empty when evaluated without
  // derivatives or when the block does not depend on q_cmd.
  Eigen::MatrixXd jacobian;
  Loss loss = Loss::Identity;
  double weight = 1.0;
  double tukey_scale = kDefaultTukeyScale;

  double squared_norm() const { return residuals.squaredNorm(); }
};

struct LossValue {
  double rho = 0.0;   // rho(s)
  double drho = 1.0;  // rho'(s), the IRLS weight
};

// rho(s) and rho'(s) for s = ||r||^2.
//   identity: s
//   cauchy:   log(1 + s)
//   tukey(a): a^2/6 * (1 - (1 - s/a^2)^3) for s <= a^2, else a^2/6
LossValue robust_loss(Loss loss, double s, double tukey_scale = kDefaultTukeyScale);
LossValue apply_robust_loss(const ResidualBlock& block);
// weight * rho(||r||^2)
double block_cost(const ResidualBlock& block);

// --- residual templates -----------------------------------------------------

template <typename T>
void ee_residual_values(const Vec3<T>& position, const Mat3<T>& rotation, const GoalSpec& goal, T* out) {
  const Vec3<T> dp = position - goal.target.position.cast<T>();
  const double sp = std::sqrt(goal.w_position);
  const double so = std::sqrt(goal.w_orientation);
  for (int i = 0; i < 3; ++i) out[i] = goal.w_position > 0.0 ? T(sp * dp[i]) : T(0.0);
  if (goal.w_orientation > 0.0) {
    const Vec3<T> rv = orientation_error<T>(goal.target.orientation.toRotationMatrix(), rotation);
    for (int i = 0; i < 3; ++i) out[3 + i] = so * rv[i];
  } else {
    for (int i = 0; i < 3; ++i) out[3 + i] = T(0.0);
  }
}

// eps / gap for gap >= floor. Between 0 and the floor the residual is held at
// eps / floor; penetration keeps growing linearly with depth.
template <typename T>
T collision_residual_value(const T& gap, double eps, double floor = kDefaultGapFloor) {
  if (gap >= floor) return eps / gap;
  const double at_floor = eps / floor;
  if (gap >= 0.0) return T(at_floor);
  return at_floor * (1.0 - gap / floor);
}

// Barrier pair eps / (q - q_l - eps), eps / (q - q_u - eps). Denominators are
// kept at least eps * 1e-6 away from zero.
template <typename T>
void joint_limit_residual_values(const T& q, double lower, double upper, double eps, T* out) {
  const double min_den = eps * 1e-6;
  auto safe = [&](T den) {
    if (den < min_den && den > -min_den) return T(den < 0.0 ? -min_den : min_den);
    return den;
  };
  out[0] = eps / safe(q - lower - eps);
  out[1] = eps / safe(q - upper - eps);
}

// Kinodynamic residuals for one joint, four entries: velocity, acceleration
// and jerk excess over their limits (zero inside), and the displacement
// from the current position. `history` is q_{t-1}, q_{t-2}, q_{t-3} for this
// joint (newest first); missing depth zeroes the matching entries.
template <typename T>
void kinodynamic_residual_values(const T& q_cmd, std::span<const double> history, double dt, double vel_limit,
                                 double acc_limit, double jerk_limit, T* out) {
  auto hinge = [](const T& x, double limit) {
    const T mag = x < 0.0 ? T(-x) : x;
    return mag > limit ? T(mag - limit) : T(0.0);
  };
  for (int i = 0; i < 4; ++i) out[i] = T(0.0);
  if (history.empty()) return;
  const T v0 = (q_cmd - history[0]) / dt;
  out[0] = hinge(v0, vel_limit);
  out[3] = q_cmd - history[0];
  if (history.size() < 2) return;
  const double v1 = (history[0] - history[1]) / dt;
  const T a0 = (v0 - v1) / dt;
  out[1] = hinge(a0, acc_limit);
  if (history.size() < 3) return;
  const double v2 = (history[1] - history[2]) / dt;
  const double a1 = (v1 - v2) / dt;
  out[2] = hinge(T((a0 - a1) / dt), jerk_limit);
}

// --- block builders ---------------------------------------------------------

// Six components: sqrt(w11) (p_cur - p_des) then sqrt(w12) log(q_des q_cur^-1).
ResidualBlock ee_residuals(const Pose& current, const GoalSpec& goal);

// One component per pair from the pairs' stored gaps.
ResidualBlock collision_residuals(std::span<const ActivePair> active, double eps_coll, double weight = 1.0,
                                  double gap_floor = kDefaultGapFloor);

ResidualBlock preferred_position_residuals(const Eigen::VectorXd& q_cmd, const Eigen::VectorXd& q_pref,
                                           double weight);

// Two components per joint (lower, upper), identity loss.
ResidualBlock joint_limit_residuals(const Eigen::VectorXd& q_cmd, const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper, double eps_limit, double weight = 1.0);

struct KinodynamicLimits {
  Eigen::VectorXd velocity;
  Eigen::VectorXd acceleration;
  double jerk = kDefaultMaxJerk;

  static KinodynamicLimits from_model(const RobotModel& model, double j_max);
};

// Four components per joint, Tukey loss.
ResidualBlock kinodynamic_residuals(const Eigen::VectorXd& q_cmd, const ArmState& state, double dt,
                                    const KinodynamicLimits& limits, double weight = 1.0,
                                    double tukey_scale = kDefaultTukeyScale);

struct CostBreakdown {
  double ee = 0.0;
  double collision = 0.0;
  double preferred = 0.0;
  double joint_limits = 0.0;
  double kinodynamic = 0.0;

  double total() const { return ee + collision + preferred + joint_limits + kinodynamic; }
  double& operator[](CostFamily family);
  double operator[](CostFamily family) const;
};

CostBreakdown breakdown(std::span<const ResidualBlock> blocks);
double total_cost(std::span<const ResidualBlock> blocks);

// Objective for one solve: all five families as functions of q_cmd, with the
// active pairs fixed for the duration of the solve.
class CostProblem {
 public:
  CostProblem(const RobotModel& model, const Transform& base, const ArmState& state,
              std::vector<ActivePair> active_pairs, const GoalSpec& goal, const CostWeights& weights, double dt);

  int dof() const { return dof_; }

  // Blocks in CostFamily order. With derivatives each block carries its
  // Jacobian with respect to q.
  std::vector<ResidualBlock> evaluate(const Eigen::VectorXd& q, bool with_jacobian) const;
  double cost(const Eigen::VectorXd& q) const;

  std::span<const ActivePair> active_pairs() const { return active_; }
  const Eigen::VectorXd& preferred_positions() const { return q_pref_; }

 private:
  template <typename T>
  void evaluate_values(const T* q, std::array<std::vector<T>, 5>& out) const;

  const RobotModel& model_;
  Transform base_;
  const ArmState& state_;
  std::vector<ActivePair> active_;
  GoalSpec goal_;
  CostWeights weights_;
  double dt_;
  int dof_;
  Eigen::VectorXd lower_, upper_, q_pref_;
  KinodynamicLimits kino_;
  // Per-joint history (newest first), transposed for residual evaluation.
  std::vector<std::vector<double>> joint_history_;
};

}  // namespace dawnik
