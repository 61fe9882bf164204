#include "dawnik/kinematics.hpp"

#include <stdexcept>
#include <string>

namespace dawnik {

void check_dimension(const RobotModel& model, Eigen::Index size) {
  if (size != model.dof())
    throw DimensionError("joint vector has " + std::to_string(size) + " entries, model '" + model.name() +
                         "' has " + std::to_string(model.dof()) + " joints");
}

std::vector<Transform> forward_kinematics(const RobotModel& model, const Eigen::VectorXd& q) {
  check_dimension(model, q.size());
  std::vector<Transform> out;
  link_transforms<double>(model, q.data(), out);
  return out;
}

Pose end_effector_pose(const RobotModel& model, const Eigen::VectorXd& q, const Transform& base) {
  const auto frames = forward_kinematics(model, q);
  return Pose::from_transform(base * frames[static_cast<std::size_t>(model.end_effector_link())]);
}

WorldSpheres sphere_world_positions(const RobotModel& model, const Eigen::VectorXd& q, const Transform& base, int arm) {
  const auto frames = forward_kinematics(model, q);
  WorldSpheres out;
  out.reserve(model.spheres().total());
  const auto& per_link = model.spheres().per_link;
  for (std::size_t l = 0; l < per_link.size(); ++l) {
    const Transform world = base * frames[l];
    for (const auto& s : per_link[l])
      out.push_back({arm, static_cast<int>(l), s.id, world.apply(s.center), s.center, s.radius});
  }
  return out;
}

Derivatives backward_difference_derivatives(const Eigen::VectorXd& q_t, std::span<const Eigen::VectorXd> history,
                                            double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("backward differences need dt > 0, got " + std::to_string(dt));
  const Eigen::Index n = q_t.size();
  for (const auto& h : history)
    if (h.size() != n) throw DimensionError("command history entry has the wrong length");

  Derivatives out;
  out.qdot = Eigen::VectorXd::Zero(n);
  out.qddot = Eigen::VectorXd::Zero(n);
  out.qdddot = Eigen::VectorXd::Zero(n);
  const std::size_t depth = std::min<std::size_t>(history.size(), 3);
  out.valid_orders = static_cast<int>(depth);
  if (depth == 0) return out;

  // Velocities at t, t-1, t-2 as available.
  const Eigen::VectorXd v0 = (q_t - history[0]) / dt;
  out.qdot = v0;
  if (depth < 2) return out;
  const Eigen::VectorXd v1 = (history[0] - history[1]) / dt;
  const Eigen::VectorXd a0 = (v0 - v1) / dt;
  out.qddot = a0;
  if (depth < 3) return out;
  const Eigen::VectorXd v2 = (history[1] - history[2]) / dt;
  const Eigen::VectorXd a1 = (v1 - v2) / dt;
  out.qdddot = (a0 - a1) / dt;
  return out;
}

Eigen::VectorXd filter_derivatives(const Eigen::VectorXd& raw, const Eigen::VectorXd& previous, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("filter alpha must lie in [0, 1]");
  if (raw.size() != previous.size()) throw DimensionError("filter inputs differ in length");
  return alpha * raw + (1.0 - alpha) * previous;
}

ArmState::ArmState(Eigen::VectorXd q, double stamp) : q_(std::move(q)), stamp_(stamp) {
  history_.push_back(q_);
  history_stamps_.push_back(stamp_);
  qdot_ = qddot_ = qdddot_ = Eigen::VectorXd::Zero(q_.size());
}

ArmState ArmState::at_rest(const Eigen::VectorXd& q, double stamp, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("at_rest needs dt > 0");
  ArmState s(q, stamp);
  for (std::size_t k = 1; k < kCommandHistoryDepth; ++k) {
    s.history_.push_back(q);
    s.history_stamps_.push_back(stamp - static_cast<double>(k) * dt);
  }
  return s;
}

void ArmState::commit(const Eigen::VectorXd& q_cmd, double stamp, double alpha) {
  if (q_cmd.size() != q_.size()) throw DimensionError("command length differs from the arm state");
  if (!(stamp > stamp_)) throw std::invalid_argument("command stamps must be strictly increasing");
  const Derivatives raw = backward_difference_derivatives(q_cmd, history_, stamp - stamp_);
  qdot_ = filter_derivatives(raw.qdot, qdot_, alpha);
  qddot_ = filter_derivatives(raw.qddot, qddot_, alpha);
  qdddot_ = filter_derivatives(raw.qdddot, qdddot_, alpha);

  history_.insert(history_.begin(), q_cmd);
  history_stamps_.insert(history_stamps_.begin(), stamp);
  if (history_.size() > kCommandHistoryDepth) {
    history_.pop_back();
    history_stamps_.pop_back();
  }
  q_ = q_cmd;
  stamp_ = stamp;
}

}  // namespace dawnik
