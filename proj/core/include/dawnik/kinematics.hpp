#pragma once

// Forward kinematics, world-frame collision spheres and command-history
// derivative estimates.

#include <deque>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dawnik/errors.hpp"
#include "dawnik/geometry.hpp"
#include "dawnik/robot_model.hpp"

namespace dawnik {

void check_dimension(const RobotModel& model, Eigen::Index size);

// Link transforms in the model's base frame, indexed like model.links().
// The root link is the identity. `q` holds model.dof() joint values.
template <typename T>
void link_transforms(const RobotModel& model, const T* q, std::vector<RigidTransform<T>>& out) {
  out.assign(model.links().size(), RigidTransform<T>());
  const auto joints = model.joints();
  for (int j : model.chain()) {
    const auto& joint = joints[static_cast<std::size_t>(j)];
    const auto& parent = out[static_cast<std::size_t>(joint.parent_link)];
    auto& child = out[static_cast<std::size_t>(joint.child_link)];
    const Mat3<T> parent_origin = parent.rotation * joint.origin.rotation.template cast<T>();
    child.translation = parent.rotation * joint.origin.translation.template cast<T>() + parent.translation;
    const int var = model.variable_of_joint(j);
    if (var >= 0) {
      child.rotation = parent_origin * axis_angle_rotation<T>(joint.axis, q[var]);
    } else {
      child.rotation = parent_origin;
    }
  }
}

std::vector<Transform> forward_kinematics(const RobotModel& model, const Eigen::VectorXd& q);

Pose end_effector_pose(const RobotModel& model, const Eigen::VectorXd& q, const Transform& base = Transform());

struct WorldSphere {
  int arm = 0;     // owning arm
  int link = 0;    // link index within that arm's model
  int id = 0;      // sphere id within that arm's model
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // world frame, m
  Eigen::Vector3d local = Eigen::Vector3d::Zero();   // link frame, m
  double radius = 0.0;
};

using WorldSpheres = std::vector<WorldSphere>;

WorldSpheres sphere_world_positions(const RobotModel& model, const Eigen::VectorXd& q,
                                    const Transform& base = Transform(), int arm = 0);

// Derivative estimates from backward differences of the command sequence.
struct Derivatives {
  Eigen::VectorXd qdot;
  Eigen::VectorXd qddot;
  Eigen::VectorXd qdddot;
  // Number of derivative orders that had enough history (0..3). Orders
  // beyond it are reported as zero.
  int valid_orders = 0;
  bool warm_up() const { return valid_orders < 3; }
};

// `q_t` is the newest sample; `history` holds earlier samples newest first
// (q_{t-1}, q_{t-2}, q_{t-3}). Throws std::invalid_argument for dt <= 0.
Derivatives backward_difference_derivatives(const Eigen::VectorXd& q_t, std::span<const Eigen::VectorXd> history,
                                            double dt);

// Exponential moving average: alpha * raw + (1 - alpha) * previous.
Eigen::VectorXd filter_derivatives(const Eigen::VectorXd& raw, const Eigen::VectorXd& previous, double alpha);

inline constexpr double kDefaultDerivativeFilterAlpha = 0.5;
inline constexpr std::size_t kCommandHistoryDepth = 3;

// Joint state of one arm plus the command history needed for kinodynamic
// estimates. history[0] is the latest command (equal to q).
class ArmState {
 public:
  ArmState() = default;
  // Fresh state with only the current sample known (derivatives warm up).
  ArmState(Eigen::VectorXd q, double stamp);
  // State of an arm that has been resting at q: full history, zero motion.
  static ArmState at_rest(const Eigen::VectorXd& q, double stamp, double dt);

  const Eigen::VectorXd& q() const { return q_; }
  double stamp() const { return stamp_; }
  Eigen::Index size() const { return q_.size(); }

  // Earlier commands, newest first.
  std::span<const Eigen::VectorXd> history() const { return history_; }
  std::span<const double> history_stamps() const { return history_stamps_; }

  const Eigen::VectorXd& qdot() const { return qdot_; }
  const Eigen::VectorXd& qddot() const { return qddot_; }
  const Eigen::VectorXd& qdddot() const { return qdddot_; }

  // Applies a new command at `stamp` and refreshes filtered derivatives.
  void commit(const Eigen::VectorXd& q_cmd, double stamp, double alpha = kDefaultDerivativeFilterAlpha);

 private:
  Eigen::VectorXd q_;
  double stamp_ = 0.0;
  std::vector<Eigen::VectorXd> history_;
  std::vector<double> history_stamps_;
  Eigen::VectorXd qdot_, qddot_, qdddot_;
};

}  // namespace dawnik
