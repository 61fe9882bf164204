#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dawnik/costs.hpp"
#include "dawnik/errors.hpp"
#include "test_support.hpp"

namespace dawnik {
namespace {

using std::numbers::pi;

ActivePair pair_with_gap(double gap) {
  ActivePair p;
  p.gap = gap;
  return p;
}

Eigen::Quaterniond rotation(double angle, const Eigen::Vector3d& axis) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized()));
}

// --- end effector -------------------------------------------------------------

TEST(EndEffector, ZeroAtGoal) {
  const Pose goal(Eigen::Vector3d(0.3, -0.1, 0.5), rotation(0.7, Eigen::Vector3d(1, 2, 3)));
  const ResidualBlock b = ee_residuals(goal, GoalSpec::pose(goal, 3.0, 2.0));
  EXPECT_EQ(b.residuals.size(), 6);
  EXPECT_LT(b.residuals.norm(), 1e-12);
}

TEST(EndEffector, PositionModeZeroesOrientation) {
  const Pose current(Eigen::Vector3d(0.1, 0.2, 0.3), rotation(2.0, Eigen::Vector3d(0, 1, 1)));
  const ResidualBlock b = ee_residuals(current, GoalSpec::position(Eigen::Vector3d::Zero()));
  EXPECT_EQ(b.residuals.tail<3>(), Eigen::Vector3d::Zero());
  EXPECT_EQ(b.residuals.head<3>(), Eigen::Vector3d(0.1, 0.2, 0.3));
}

TEST(EndEffector, SquareRootWeightScaling) {
  const Pose current(Eigen::Vector3d(0.1, 0, 0), Eigen::Quaterniond::Identity());
  const ResidualBlock b = ee_residuals(current, GoalSpec::position(Eigen::Vector3d::Zero(), 4.0));
  EXPECT_NEAR(b.residuals[0], 0.2, 1e-15);
  EXPECT_EQ(b.residuals[1], 0.0);
  EXPECT_EQ(b.residuals[2], 0.0);
}

TEST(EndEffector, OrientationComponentIsRotationVector) {
  const Pose current(Eigen::Vector3d::Zero(), Eigen::Quaterniond::Identity());
  const ResidualBlock b = ee_residuals(current, GoalSpec::orientation(rotation(0.3, Eigen::Vector3d::UnitZ())));
  EXPECT_NEAR(std::abs(b.residuals[5]), 0.3, 1e-12);
  EXPECT_EQ(b.residuals.head<3>(), Eigen::Vector3d::Zero());
}

TEST(EndEffector, ModeInvariance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const GoalSpec pos = GoalSpec::position(Eigen::Vector3d(0.4, 0, 0.3), 2.0);
  const GoalSpec ori = GoalSpec::orientation(rotation(1.0, Eigen::Vector3d(1, 0, 1)), 2.0);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d p(u(rng), u(rng), u(rng));
    const Eigen::Vector3d p2(u(rng), u(rng), u(rng));
    const auto r1 = rotation(3.0 * u(rng), Eigen::Vector3d(u(rng), u(rng), u(rng)));
    const auto r2 = rotation(3.0 * u(rng), Eigen::Vector3d(u(rng), u(rng), u(rng)));
    EXPECT_EQ(block_cost(ee_residuals(Pose(p, r1), pos)), block_cost(ee_residuals(Pose(p, r2), pos)));
    EXPECT_EQ(block_cost(ee_residuals(Pose(p, r1), ori)), block_cost(ee_residuals(Pose(p2, r1), ori)));
  }
}

TEST(EndEffector, RejectsMismatchedWeights) {
  GoalSpec g = GoalSpec::position(Eigen::Vector3d::Zero());
  g.w_orientation = 1.0;
  EXPECT_THROW(ee_residuals(Pose(), g), ConfigError);
  EXPECT_THROW(GoalSpec::pose(Pose(), 1.0, 0.0).validate(), ConfigError);
  EXPECT_THROW(GoalSpec::position(Eigen::Vector3d::Zero(), -1.0).validate(), ConfigError);
}

// --- collision ------------------------------------------------------------------

TEST(Collision, ReferenceValue) {
  ActivePair p;
  p.r_a = p.r_b = 0.05;
  p.d_ab = 0.2;
  p.gap = sphere_gap(Eigen::Vector3d::Zero(), 0.05, Eigen::Vector3d(0.2, 0, 0), 0.05);
  const ActivePair pairs[] = {p};
  const ResidualBlock b = collision_residuals(pairs, 0.02);
  ASSERT_EQ(b.residuals.size(), 1);
  EXPECT_NEAR(b.residuals[0], 0.2, 1e-15);
}

TEST(Collision, SmallAtActivationBoundary) {
  EXPECT_NEAR(collision_residual_value(0.15, 0.02), 0.02 / 0.15, 1e-15);
  EXPECT_NEAR(collision_residual_value(0.15, 0.02), 0.133, 1e-3);
}

TEST(Collision, InverseProportional) {
  for (double gap : {0.01, 0.05, 0.12})
    EXPECT_NEAR(collision_residual_value(gap / 2.0, 0.02), 2.0 * collision_residual_value(gap, 0.02), 1e-12);
}

TEST(Collision, StrictlyDecreasingOverActiveRange) {
  double prev = collision_residual_value(kDefaultGapFloor, 0.02);
  for (double gap = kDefaultGapFloor + 1e-4; gap <= 0.15; gap += 1e-4) {
    const double r = collision_residual_value(gap, 0.02);
    EXPECT_LT(r, prev) << gap;
    prev = r;
  }
}

TEST(Collision, PenetrationWorseThanContact) {
  const double contact = collision_residual_value(0.0, 0.02);
  EXPECT_TRUE(std::isfinite(contact));
  EXPECT_EQ(contact, collision_residual_value(kDefaultGapFloor, 0.02));
  double prev = contact;
  for (double depth : {1e-5, 1e-3, 0.01, 0.1}) {
    const double r = collision_residual_value(-depth, 0.02);
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(Collision, OneComponentPerPair) {
  const std::vector<ActivePair> pairs{pair_with_gap(0.1), pair_with_gap(0.05), pair_with_gap(0.02)};
  const ResidualBlock b = collision_residuals(pairs, 0.02, 5.0);
  EXPECT_EQ(b.residuals.size(), 3);
  EXPECT_EQ(b.weight, 5.0);
  EXPECT_EQ(collision_residuals({}, 0.02).residuals.size(), 0);
}

// --- preferred position -----------------------------------------------------------

TEST(Preferred, ZeroAtPreference) {
  const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(6, -1, 1);
  EXPECT_EQ(block_cost(preferred_position_residuals(q, q, 1.0)), 0.0);
}

TEST(Preferred, CauchyLogIdentity) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(3);
  q[1] = std::sqrt(std::exp(1.0) - 1.0);
  const ResidualBlock b = preferred_position_residuals(q, Eigen::VectorXd::Zero(3), 1.0);
  EXPECT_EQ(b.loss, Loss::Cauchy);
  EXPECT_NEAR(block_cost(b), 1.0, 1e-15);
}

TEST(Preferred, DefaultIsRangeCenter) {
  const RobotModel m = parse_robot_description(R"({
    "name": "full_turn",
    "joints": [{"name": "j", "kind": "revolute", "axis": [0, 0, 1],
                "limits": {"pos": [-3.141592653589793, 3.141592653589793], "vel": 1, "acc": 1}}],
    "links": [{"name": "base"}, {"name": "l", "parent_joint": "j"}],
    "end_effector": "l"})");
  EXPECT_EQ(m.center_positions()[0], 0.0);
}

TEST(Preferred, LengthMismatch) {
  EXPECT_THROW(preferred_position_residuals(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2), 1.0), DimensionError);
}

// --- joint limits --------------------------------------------------------------------

TEST(JointLimits, ReferenceValues) {
  const ResidualBlock b = joint_limit_residuals(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, -pi),
                                                Eigen::VectorXd::Constant(1, pi), 0.01);
  ASSERT_EQ(b.residuals.size(), 2);
  // Independent evaluation: 0.01 / (pi - 0.01) and 0.01 / (-pi - 0.01).
  EXPECT_NEAR(b.residuals[0], 0.0031932633347242162, 1e-12);
  EXPECT_NEAR(b.residuals[1], -0.0031729988926740235, 1e-12);
  EXPECT_EQ(b.loss, Loss::Identity);
}

TEST(JointLimits, NearlySymmetricAtCenter) {
  const ResidualBlock b = joint_limit_residuals(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, -1.0),
                                                Eigen::VectorXd::Constant(1, 1.0), 0.01);
  // eps/(1 - eps) - eps/(1 + eps) = 2 eps^2 / (1 - eps^2)
  EXPECT_NEAR(std::abs(b.residuals[0]) - std::abs(b.residuals[1]), 2e-4 / (1.0 - 1e-4), 1e-15);
}

// Sum of |r_l| + |r_u| for one joint with limits [-1, 1].
double barrier_total(double q, double eps) {
  double r[2];
  joint_limit_residual_values<double>(q, -1.0, 1.0, eps, r);
  return std::abs(r[0]) + std::abs(r[1]);
}

TEST(JointLimits, EvenUpToSecondOrderInEps) {
  // The barrier's pole sits at q_l + eps but at q_u + eps for the upper
  // side, so mirror symmetry holds up to a term of order eps^2.
  const double eps = 0.01;
  for (double q = 0.0; q < 0.9; q += 0.01) {
    const double a = 1.0 - q, b = 1.0 + q;
    const double bound = 2.0 * eps * eps * std::abs(1.0 / (b * b - eps * eps) - 1.0 / (a * a - eps * eps));
    EXPECT_NEAR(barrier_total(q, eps), barrier_total(-q, eps), bound + 1e-15) << q;
  }
}

TEST(JointLimits, BlowsUpApproachingLowerPole) {
  double prev = 0.0;
  for (double d : {0.5, 0.1, 0.01, 1e-3, 1e-5}) {
    double r[2];
    joint_limit_residual_values<double>(-1.0 + 0.01 + d, -1.0, 1.0, 0.01, r);
    EXPECT_GT(r[0], prev);
    EXPECT_TRUE(std::isfinite(r[0]));
    prev = r[0];
  }
  EXPECT_GT(prev, 999.0);
}

// --- kinodynamic ---------------------------------------------------------------------

KinodynamicLimits unit_limits(int n) {
  KinodynamicLimits k;
  k.velocity = Eigen::VectorXd::Ones(n);
  k.acceleration = Eigen::VectorXd::Constant(n, 100.0);
  k.jerk = 1e6;
  return k;
}

TEST(Kinodynamic, ZeroWhenHolding) {
  const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(3, -0.5, 0.5);
  const ArmState state(q, 0.0);
  const ResidualBlock b = kinodynamic_residuals(q, state, 0.01, unit_limits(3));
  EXPECT_EQ(b.residuals.size(), 12);
  EXPECT_EQ(b.residuals, Eigen::VectorXd::Zero(12));
  EXPECT_EQ(b.loss, Loss::Tukey);
  const ArmState rest = ArmState::at_rest(q, 0.0, 0.01);
  EXPECT_EQ(kinodynamic_residuals(q, rest, 0.01, unit_limits(3)).residuals, Eigen::VectorXd::Zero(12));
}

TEST(Kinodynamic, VelocityBoundaryIsZero) {
  const ArmState state(Eigen::VectorXd::Zero(1), 0.0);
  const ResidualBlock b = kinodynamic_residuals(Eigen::VectorXd::Constant(1, 0.0078125), state, 0.0078125,
                                                unit_limits(1));
  EXPECT_EQ(b.residuals[0], 0.0);
}

TEST(Kinodynamic, VelocityExcess) {
  const ArmState state(Eigen::VectorXd::Zero(1), 0.0);
  const ResidualBlock b = kinodynamic_residuals(Eigen::VectorXd::Constant(1, 0.02), state, 0.01, unit_limits(1));
  EXPECT_NEAR(b.residuals[0], 1.0, 1e-12);
  EXPECT_EQ(b.residuals[3], 0.02);
}

TEST(Kinodynamic, HistoryDepthEnablesHigherOrders) {
  // Resting for three ticks then a jump: acceleration and jerk both exceed.
  KinodynamicLimits k = unit_limits(1);
  k.jerk = 10.0;
  const ArmState rest = ArmState::at_rest(Eigen::VectorXd::Zero(1), 0.0, 0.01);
  const ResidualBlock b = kinodynamic_residuals(Eigen::VectorXd::Constant(1, 0.01), rest, 0.01, k);
  EXPECT_EQ(b.residuals[0], 0.0);
  EXPECT_NEAR(b.residuals[1], 0.0, 1e-9);   // a = 100, exactly at the limit
  EXPECT_NEAR(b.residuals[2], 1e4 - 10.0, 1e-6);
}

TEST(Kinodynamic, RejectsBadStep) {
  const ArmState state(Eigen::VectorXd::Zero(1), 0.0);
  EXPECT_THROW(kinodynamic_residuals(Eigen::VectorXd::Zero(1), state, 0.0, unit_limits(1)), std::invalid_argument);
  EXPECT_THROW(kinodynamic_residuals(Eigen::VectorXd::Zero(2), state, 0.01, unit_limits(1)), DimensionError);
}

// --- robust losses -------------------------------------------------------------------

TEST(Loss, AllStartAtZero) {
  for (Loss l : {Loss::Identity, Loss::Cauchy, Loss::Tukey}) EXPECT_EQ(robust_loss(l, 0.0).rho, 0.0);
  EXPECT_EQ(robust_loss(Loss::Identity, 0.0).drho, 1.0);
  EXPECT_EQ(robust_loss(Loss::Cauchy, 0.0).drho, 1.0);
  // d/ds a^2/6 (1 - (1 - s/a^2)^3) = (1 - s/a^2)^2 / 2
  EXPECT_EQ(robust_loss(Loss::Tukey, 0.0).drho, 0.5);
  EXPECT_EQ(robust_loss(Loss::Tukey, 0.0625, 0.5).drho, 0.5 * 0.75 * 0.75);
}

TEST(Loss, CauchyAtOne) {
  const LossValue v = robust_loss(Loss::Cauchy, 1.0);
  EXPECT_NEAR(v.rho, std::log(2.0), 1e-15);
  EXPECT_EQ(v.drho, 0.5);
}

TEST(Loss, TukeySuppressesOutliers) {
  const LossValue v = robust_loss(Loss::Tukey, 4.0, 1.0);
  EXPECT_NEAR(v.rho, 1.0 / 6.0, 1e-15);
  EXPECT_EQ(v.drho, 0.0);
  EXPECT_NEAR(robust_loss(Loss::Tukey, 1.0, 1.0).rho, 1.0 / 6.0, 1e-15);
}

TEST(Loss, MonotoneAndConcave) {
  for (Loss l : {Loss::Identity, Loss::Cauchy, Loss::Tukey}) {
    LossValue prev = robust_loss(l, 0.0);
    for (double s = 0.01; s < 10.0; s += 0.01) {
      const LossValue v = robust_loss(l, s);
      EXPECT_GE(v.rho, prev.rho);
      EXPECT_GE(v.drho, 0.0);
      if (l != Loss::Identity) {
        EXPECT_LE(v.drho, prev.drho);
      }
      prev = v;
    }
  }
}

TEST(Loss, DerivativeMatchesFiniteDifference) {
  for (Loss l : {Loss::Cauchy, Loss::Tukey})
    for (double s : {0.01, 0.1, 0.2}) {
      const double h = 1e-6;
      const double fd = (robust_loss(l, s + h).rho - robust_loss(l, s - h).rho) / (2 * h);
      EXPECT_NEAR(robust_loss(l, s).drho, fd, 1e-8);
    }
}

TEST(Loss, BlockCostIsWeighted) {
  ResidualBlock b;
  b.residuals = Eigen::Vector2d(1.0, 2.0);
  b.weight = 3.0;
  EXPECT_EQ(block_cost(b), 15.0);
}

// --- whole problem ---------------------------------------------------------------------

TEST(CostProblem, JacobiansMatchFiniteDifferences) {
  const testing::GradientReport r = testing::check_gradients(100, 5);
  EXPECT_EQ(r.states, 100);
  EXPECT_GE(r.blocks, 400);
  EXPECT_LT(r.worst, 1e-5) << r.worst_block;
}

TEST(CostProblem, FamiliesInOrderWithWeights) {
  const Eigen::VectorXd q = testing::s6().center_positions();
  const ArmState state(q, 0.0);
  CostWeights w;
  const CostProblem p(testing::s6(), Transform(), state, {}, GoalSpec::position(Eigen::Vector3d(0.4, 0, 0.3)), w,
                      0.01);
  const auto blocks = p.evaluate(q, false);
  ASSERT_EQ(blocks.size(), kCostFamilies.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) EXPECT_EQ(blocks[k].label, kCostFamilies[k]);
  EXPECT_EQ(blocks[0].weight, w.w_ee);
  EXPECT_EQ(blocks[2].loss, Loss::Cauchy);
  EXPECT_EQ(blocks[4].loss, Loss::Tukey);
  EXPECT_EQ(blocks[2].residuals, Eigen::VectorXd::Zero(6));
  EXPECT_NEAR(p.cost(q), total_cost(blocks), 1e-12);
  const CostBreakdown bd = breakdown(blocks);
  EXPECT_NEAR(bd.total(), p.cost(q), 1e-12);
}

TEST(CostProblem, RejectsBadInputs) {
  const Eigen::VectorXd q = testing::s6().center_positions();
  const ArmState state(q, 0.0);
  const GoalSpec g = GoalSpec::position(Eigen::Vector3d::Zero());
  EXPECT_THROW(CostProblem(testing::s6(), Transform(), state, {}, g, CostWeights{}, 0.0), std::invalid_argument);
  CostWeights bad;
  bad.eps_coll = 0.0;
  EXPECT_THROW(CostProblem(testing::s6(), Transform(), state, {}, g, bad, 0.01), ConfigError);
  const ArmState wrong(Eigen::VectorXd::Zero(7), 0.0);
  EXPECT_THROW(CostProblem(testing::s6(), Transform(), wrong, {}, g, CostWeights{}, 0.01), DimensionError);
}

}  // namespace
}  // namespace dawnik
