#include "dawnik/costs.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dawnik/errors.hpp"

namespace dawnik {

GoalSpec GoalSpec::position(const Eigen::Vector3d& p, double weight) {
  GoalSpec g;
  g.mode = GoalMode::Position;
  g.target = Pose(p, Eigen::Quaterniond::Identity());
  g.w_position = weight;
  g.w_orientation = 0.0;
  return g;
}

GoalSpec GoalSpec::orientation(const Eigen::Quaterniond& q, double weight) {
  GoalSpec g;
  g.mode = GoalMode::Orientation;
  g.target = Pose(Eigen::Vector3d::Zero(), q);
  g.w_position = 0.0;
  g.w_orientation = weight;
  return g;
}

GoalSpec GoalSpec::pose(const Pose& target, double w_position, double w_orientation) {
  GoalSpec g;
  g.mode = GoalMode::Pose;
  g.target = target;
  g.w_position = w_position;
  g.w_orientation = w_orientation;
  return g;
}

void GoalSpec::validate() const {
  if (!(w_position >= 0.0) || !(w_orientation >= 0.0)) throw ConfigError("goal weights must be >= 0");
  if (!target.position.allFinite() || !target.orientation.coeffs().allFinite())
    throw ConfigError("goal target must be finite");
  switch (mode) {
    case GoalMode::Position:
      if (w_orientation != 0.0) throw ConfigError("position goal must have zero orientation weight");
      break;
    case GoalMode::Orientation:
      if (w_position != 0.0) throw ConfigError("orientation goal must have zero position weight");
      break;
    case GoalMode::Pose:
      if (!(w_position > 0.0) || !(w_orientation > 0.0))
        throw ConfigError("pose goal needs positive position and orientation weights");
      break;
  }
}

void CostWeights::validate() const {
  for (double w : {w_ee, w_coll, w_pref, w_poslim, w_kino})
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("cost weights must be finite and >= 0");
  if (!(eps_coll > 0.0)) throw ConfigError("eps_coll must be > 0");
  if (!(eps_limit > 0.0)) throw ConfigError("eps_limit must be > 0");
  if (!(j_max > 0.0)) throw ConfigError("j_max must be > 0");
  if (!(noise_magnitude >= 0.0)) throw ConfigError("noise_magnitude must be >= 0");
  if (!(tukey_scale > 0.0)) throw ConfigError("tukey scale must be > 0");
  if (!(gap_floor > 0.0)) throw ConfigError("gap floor must be > 0");
  if (q_pref.size() > 0 && !q_pref.allFinite()) throw ConfigError("q_pref must be finite");
}

const char* to_string(CostFamily family) {
  switch (family) {
    case CostFamily::EndEffector:
      return "ee";
    case CostFamily::Collision:
      return "collision";
    case CostFamily::PreferredPosition:
      return "preferred";
    case CostFamily::JointLimits:
      return "joint_limits";
    case CostFamily::Kinodynamic:
      return "kinodynamic";
  }
  return "unknown";
}

LossValue robust_loss(Loss loss, double s, double tukey_scale) {
  switch (loss) {
    case Loss::Identity:
      return {s, 1.0};
    case Loss::Cauchy:
      return {std::log1p(s), 1.0 / (1.0 + s)};
    case Loss::Tukey: {
      const double a2 = tukey_scale * tukey_scale;
      if (s > a2) return {a2 / 6.0, 0.0};
      const double u = 1.0 - s / a2;
      return {a2 / 6.0 * (1.0 - u * u * u), 0.5 * u * u};
    }
  }
  throw std::logic_error("unknown loss");
}

LossValue apply_robust_loss(const ResidualBlock& block) {
  return robust_loss(block.loss, block.squared_norm(), block.tukey_scale);
}

double block_cost(const ResidualBlock& block) { return block.weight * apply_robust_loss(block).rho; }

ResidualBlock ee_residuals(const Pose& current, const GoalSpec& goal) {
  goal.validate();
  ResidualBlock b;
  b.label = CostFamily::EndEffector;
  b.residuals.resize(6);
  ee_residual_values<double>(current.position, current.orientation.toRotationMatrix(), goal, b.residuals.data());
  return b;
}

ResidualBlock collision_residuals(std::span<const ActivePair> active, double eps_coll, double weight,
                                  double gap_floor) {
  ResidualBlock b;
  b.label = CostFamily::Collision;
  b.weight = weight;
  b.residuals.resize(static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < active.size(); ++i)
    b.residuals[static_cast<Eigen::Index>(i)] = collision_residual_value(active[i].gap, eps_coll, gap_floor);
  return b;
}

ResidualBlock preferred_position_residuals(const Eigen::VectorXd& q_cmd, const Eigen::VectorXd& q_pref,
                                           double weight) {
  if (q_cmd.size() != q_pref.size()) throw DimensionError("q_cmd and q_pref differ in length");
  ResidualBlock b;
  b.label = CostFamily::PreferredPosition;
  b.loss = Loss::Cauchy;
  b.weight = weight;
  b.residuals = q_cmd - q_pref;
  return b;
}

ResidualBlock joint_limit_residuals(const Eigen::VectorXd& q_cmd, const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper, double eps_limit, double weight) {
  if (q_cmd.size() != lower.size() || q_cmd.size() != upper.size())
    throw DimensionError("joint vector and limits differ in length");
  ResidualBlock b;
  b.label = CostFamily::JointLimits;
  b.weight = weight;
  b.residuals.resize(2 * q_cmd.size());
  for (Eigen::Index i = 0; i < q_cmd.size(); ++i)
    joint_limit_residual_values<double>(q_cmd[i], lower[i], upper[i], eps_limit, b.residuals.data() + 2 * i);
  return b;
}

KinodynamicLimits KinodynamicLimits::from_model(const RobotModel& model, double j_max) {
  KinodynamicLimits k;
  k.velocity.resize(model.dof());
  k.acceleration.resize(model.dof());
  for (int i = 0; i < model.dof(); ++i) {
    const auto& lim = model.actuated_joint(i).limits;
    k.velocity[i] = lim.velocity;
    k.acceleration[i] = lim.acceleration;
  }
  k.jerk = j_max;
  return k;
}

namespace {

std::vector<double> joint_history(const ArmState& state, Eigen::Index joint) {
  std::vector<double> h;
  for (const auto& q : state.history()) h.push_back(q[joint]);
  return h;
}

}  // namespace

ResidualBlock kinodynamic_residuals(const Eigen::VectorXd& q_cmd, const ArmState& state, double dt,
                                    const KinodynamicLimits& limits, double weight, double tukey_scale) {
  if (!(dt > 0.0)) throw std::invalid_argument("kinodynamic residuals need dt > 0");
  if (q_cmd.size() != state.size() || limits.velocity.size() != q_cmd.size() ||
      limits.acceleration.size() != q_cmd.size())
    throw DimensionError("kinodynamic inputs differ in length");
  ResidualBlock b;
  b.label = CostFamily::Kinodynamic;
  b.loss = Loss::Tukey;
  b.tukey_scale = tukey_scale;
  b.weight = weight;
  b.residuals.resize(4 * q_cmd.size());
  for (Eigen::Index i = 0; i < q_cmd.size(); ++i) {
    const auto h = joint_history(state, i);
    kinodynamic_residual_values<double>(q_cmd[i], h, dt, limits.velocity[i], limits.acceleration[i], limits.jerk,
                                        b.residuals.data() + 4 * i);
  }
  return b;
}

double& CostBreakdown::operator[](CostFamily family) {
  switch (family) {
    case CostFamily::EndEffector:
      return ee;
    case CostFamily::Collision:
      return collision;
    case CostFamily::PreferredPosition:
      return preferred;
    case CostFamily::JointLimits:
      return joint_limits;
    case CostFamily::Kinodynamic:
      return kinodynamic;
  }
  throw std::logic_error("unknown cost family");
}

double CostBreakdown::operator[](CostFamily family) const { return const_cast<CostBreakdown&>(*this)[family]; }

CostBreakdown breakdown(std::span<const ResidualBlock> blocks) {
  CostBreakdown out;
  for (const auto& b : blocks) out[b.label] += block_cost(b);
  return out;
}

double total_cost(std::span<const ResidualBlock> blocks) {
  double c = 0.0;
  for (const auto& b : blocks) c += block_cost(b);
  return c;
}

// --- CostProblem ------------------------------------------------------------

CostProblem::CostProblem(const RobotModel& model, const Transform& base, const ArmState& state,
                         std::vector<ActivePair> active_pairs, const GoalSpec& goal, const CostWeights& weights,
                         double dt)
    : model_(model),
      base_(base),
      state_(state),
      active_(std::move(active_pairs)),
      goal_(goal),
      weights_(weights),
      dt_(dt),
      dof_(model.dof()) {
  if (dof_ > kMaxDof)
    throw DimensionError("model '" + model.name() + "' has " + std::to_string(dof_) + " joints, at most " +
                         std::to_string(kMaxDof) + " supported");
  if (!(dt > 0.0)) throw std::invalid_argument("cost problem needs dt > 0");
  check_dimension(model, state.size());
  goal_.validate();
  weights_.validate();
  lower_ = model.lower_limits();
  upper_ = model.upper_limits();
  q_pref_ = weights_.q_pref.size() > 0 ? weights_.q_pref : model.center_positions();
  if (q_pref_.size() != dof_) throw DimensionError("q_pref length differs from the model");
  kino_ = KinodynamicLimits::from_model(model, weights_.j_max);
  for (Eigen::Index i = 0; i < dof_; ++i) joint_history_.push_back(joint_history(state, i));
}

template <typename T>
void CostProblem::evaluate_values(const T* q, std::array<std::vector<T>, 5>& out) const {
  using std::sqrt;
  std::vector<RigidTransform<T>> frames;
  link_transforms<T>(model_, q, frames);
  const RigidTransform<T> base = base_.template cast<T>();

  // End effector.
  auto& ee = out[0];
  ee.assign(6, T(0.0));
  const RigidTransform<T> tcp = base * frames[static_cast<std::size_t>(model_.end_effector_link())];
  ee_residual_values<T>(tcp.translation, tcp.rotation, goal_, ee.data());

  // Collision: gaps recomputed through FK for the spheres on this arm.
  auto& coll = out[1];
  coll.clear();
  for (const auto& p : active_) {
    const Vec3<T> ca = (base * frames[static_cast<std::size_t>(p.link_a)]).template apply<T>(p.local_a);
    const Vec3<T> cb = p.b_on_controlled
                           ? Vec3<T>((base * frames[static_cast<std::size_t>(p.link_b)]).template apply<T>(p.local_b))
                           : Vec3<T>(p.center_b.cast<T>());
    const T d2 = (ca - cb).squaredNorm();
    const T d = value_of(d2) > 1e-24 ? T(sqrt(d2)) : T(0.0);
    coll.push_back(collision_residual_value<T>(d - (p.r_a + p.r_b), weights_.eps_coll, weights_.gap_floor));
  }

  auto& pref = out[2];
  pref.resize(static_cast<std::size_t>(dof_));
  for (int i = 0; i < dof_; ++i) pref[static_cast<std::size_t>(i)] = q[i] - q_pref_[i];

  auto& lim = out[3];
  lim.resize(2 * static_cast<std::size_t>(dof_));
  for (int i = 0; i < dof_; ++i)
    joint_limit_residual_values<T>(q[i], lower_[i], upper_[i], weights_.eps_limit, lim.data() + 2 * i);

  auto& kino = out[4];
  kino.resize(4 * static_cast<std::size_t>(dof_));
  for (int i = 0; i < dof_; ++i)
    kinodynamic_residual_values<T>(q[i], joint_history_[static_cast<std::size_t>(i)], dt_, kino_.velocity[i],
                                   kino_.acceleration[i], kino_.jerk, kino.data() + 4 * i);
}

namespace {

ResidualBlock make_block(CostFamily label, const CostWeights& w) {
  ResidualBlock b;
  b.label = label;
  b.tukey_scale = w.tukey_scale;
  switch (label) {
    case CostFamily::EndEffector:
      b.weight = w.w_ee;
      break;
    case CostFamily::Collision:
      b.weight = w.w_coll;
      break;
    case CostFamily::PreferredPosition:
      b.weight = w.w_pref;
      b.loss = Loss::Cauchy;
      break;
    case CostFamily::JointLimits:
      b.weight = w.w_poslim;
      break;
    case CostFamily::Kinodynamic:
      b.weight = w.w_kino;
      b.loss = Loss::Tukey;
      break;
  }
  return b;
}

}  // namespace

std::vector<ResidualBlock> CostProblem::evaluate(const Eigen::VectorXd& q, bool with_jacobian) const {
  check_dimension(model_, q.size());
  std::vector<ResidualBlock> blocks;
  blocks.reserve(kCostFamilies.size());
  if (!with_jacobian) {
    std::array<std::vector<double>, 5> values;
    evaluate_values<double>(q.data(), values);
    for (std::size_t k = 0; k < kCostFamilies.size(); ++k) {
      ResidualBlock b = make_block(kCostFamilies[k], weights_);
      b.residuals = Eigen::Map<const Eigen::VectorXd>(values[k].data(), static_cast<Eigen::Index>(values[k].size()));
      blocks.push_back(std::move(b));
    }
    return blocks;
  }

  std::array<Jet, kMaxDof> qj;
  for (int i = 0; i < dof_; ++i) qj[static_cast<std::size_t>(i)] = Jet::variable(q[i], i);
  std::array<std::vector<Jet>, 5> values;
  evaluate_values<Jet>(qj.data(), values);
  for (std::size_t k = 0; k < kCostFamilies.size(); ++k) {
    ResidualBlock b = make_block(kCostFamilies[k], weights_);
    const auto rows = static_cast<Eigen::Index>(values[k].size());
    b.residuals.resize(rows);
    b.jacobian.resize(rows, dof_);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Jet& v = values[k][static_cast<std::size_t>(r)];
      b.residuals[r] = v.v;
      for (int c = 0; c < dof_; ++c) b.jacobian(r, c) = v.d[static_cast<std::size_t>(c)];
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

double CostProblem::cost(const Eigen::VectorXd& q) const {
  const auto blocks = evaluate(q, false);
  return total_cost(blocks);
}

}  // namespace dawnik
