#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "dawnik/errors.hpp"
#include "dawnik/solver.hpp"
#include "test_support.hpp"

namespace dawnik {
namespace {

using testing::s6;

constexpr double kDt = 0.01;

const AllowedCollisionMatrix& solo_acm() {
  static const AllowedCollisionMatrix acm = build_acm(s6(), {});
  return acm;
}

SolveRequest free_request(const ArmState& state, const GoalSpec& goal, CostWeights weights = {}) {
  SolveRequest r;
  r.model = &s6();
  r.state = &state;
  r.acm = &solo_acm();
  r.goal = goal;
  r.weights = weights;
  r.dt = kDt;
  return r;
}

bool within(const Eigen::VectorXd& q, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return (q.array() >= lo.array()).all() && (q.array() <= hi.array()).all();
}

bool strictly_decreasing(const std::vector<double>& costs) {
  for (std::size_t i = 1; i < costs.size(); ++i)
    if (!(costs[i] < costs[i - 1])) return false;
  return true;
}

// Smallest gap over every pair the ACM does not skip.
double min_gap(const WorldSpheres& own, const WorldSpheres& others, const AllowedCollisionMatrix& acm) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < own.size(); ++a) {
    for (std::size_t b = a + 1; b < own.size(); ++b)
      if (!acm.allowed(own[a].arm, own[a].link, own[b].arm, own[b].link))
        g = std::min(g, sphere_gap(own[a].center, own[a].radius, own[b].center, own[b].radius));
    for (const auto& o : others)
      if (!acm.allowed(own[a].arm, own[a].link, o.arm, o.link))
        g = std::min(g, sphere_gap(own[a].center, own[a].radius, o.center, o.radius));
  }
  return g;
}

// --- building blocks ------------------------------------------------------------

TEST(Initialize, ZeroNoiseIsIdentity) {
  const Eigen::VectorXd q = s6().center_positions();
  EXPECT_EQ(initialize_variables(q, 0.0, s6().lower_limits(), s6().upper_limits(), std::uint64_t{3}), q);
}

TEST(Initialize, ReproducibleAndBounded) {
  const Eigen::VectorXd q = s6().center_positions();
  const auto a = initialize_variables(q, 0.01, s6().lower_limits(), s6().upper_limits(), std::uint64_t{42});
  const auto b = initialize_variables(q, 0.01, s6().lower_limits(), s6().upper_limits(), std::uint64_t{42});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, q);
  EXPECT_LE((a - q).cwiseAbs().maxCoeff(), 0.01);
}

TEST(Initialize, ClampsAtUpperBound) {
  const Eigen::VectorXd upper = s6().upper_limits();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto q = initialize_variables(upper, 0.5, s6().lower_limits(), upper, seed);
    EXPECT_TRUE(within(q, s6().lower_limits(), upper));
  }
  EXPECT_THROW(initialize_variables(upper, -1.0, s6().lower_limits(), upper, std::uint64_t{0}),
               std::invalid_argument);
}

TEST(StepBound, PureJerkAtRest) {
  const ArmState rest = ArmState::at_rest(Eigen::VectorXd::Zero(6), 0.0, kDt);
  const Eigen::VectorXd dq = max_step_from_jerk(rest, kDt, 10.0);
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(dq[i], 10.0 * 1e-6 / 6.0, 1e-18);
  EXPECT_NEAR(dq[0], 1.67e-6, 1e-8);
}

TEST(StepBound, UnitVelocity) {
  // Steady motion at 1 rad/s until the filtered derivatives settle.
  ArmState s(Eigen::VectorXd::Zero(1), 0.0);
  for (int k = 1; k <= 80; ++k) s.commit(Eigen::VectorXd::Constant(1, k * kDt), k * kDt);
  const Eigen::VectorXd dq = max_step_from_jerk(s, kDt, 10.0);
  EXPECT_NEAR(dq[0], 0.01, 1e-5);
}

TEST(StepBound, LargeJerkHitsCap) {
  const ArmState rest = ArmState::at_rest(Eigen::VectorXd::Zero(3), 0.0, kDt);
  SolverOptions o;
  const Eigen::VectorXd r = trust_region_radius(max_step_from_jerk(rest, kDt, 1e12), o);
  EXPECT_EQ(r, Eigen::VectorXd::Constant(3, o.radius_cap));
  EXPECT_THROW(max_step_from_jerk(rest, 0.0, 10.0), std::invalid_argument);
}

TEST(StepBound, UniformUsesSmallest) {
  SolverOptions o;
  o.step_limit = StepLimit::Uniform;
  const Eigen::VectorXd r = trust_region_radius(Eigen::Vector3d(0.01, 0.002, 0.5), o);
  EXPECT_EQ(r, Eigen::VectorXd::Constant(3, 0.002));
  o.step_limit = StepLimit::PerJoint;
  EXPECT_EQ(trust_region_radius(Eigen::Vector3d(0.01, 0.002, 0.5), o), Eigen::Vector3d(0.01, 0.002, 0.1));
}

TEST(StepBound, ClipIsPerJointBox) {
  const Eigen::Vector3d d(0.5, -0.5, 0.001);
  EXPECT_EQ(clip_step(d, Eigen::Vector3d(0.1, 0.2, 0.1)), Eigen::Vector3d(0.1, -0.2, 0.001));
}

TEST(CommandBox, VelocityTimesTickInsideLimits) {
  const Eigen::VectorXd q = s6().center_positions();
  const CommandBounds b = command_bounds(s6(), q, kDt);
  for (int i = 0; i < 6; ++i) {
    const double v = s6().actuated_joint(i).limits.velocity;
    EXPECT_NEAR(b.upper[i] - q[i], v * kDt, 1e-15);
    EXPECT_NEAR(q[i] - b.lower[i], v * kDt, 1e-15);
  }
  const CommandBounds edge = command_bounds(s6(), s6().upper_limits(), kDt);
  EXPECT_EQ(edge.upper, s6().upper_limits());
  EXPECT_TRUE((edge.lower.array() <= edge.upper.array()).all());
  EXPECT_THROW(command_bounds(s6(), q, 0.0), std::invalid_argument);
  EXPECT_THROW(command_bounds(s6(), Eigen::VectorXd::Zero(3), kDt), DimensionError);
}

TEST(NormalEquationsTest, LinearResidualSolvedInOneStep) {
  const Eigen::Vector3d target(0.3, -0.2, 0.1);
  const Eigen::Vector3d x(0.0, 0.0, 0.0);
  ResidualBlock b;
  b.residuals = x - target;
  b.jacobian = Eigen::Matrix3d::Identity();
  const ResidualBlock blocks[] = {b};
  const NormalEquations eq = build_normal_equations(blocks, 3);
  Eigen::VectorXd delta;
  ASSERT_TRUE(solve_damped(eq, 1e-4, delta));
  EXPECT_LT((x + delta - target).norm(), 1e-4 * target.norm() + 1e-15);
  EXPECT_LT((x + delta - target).squaredNorm(), b.residuals.squaredNorm());
}

TEST(NormalEquationsTest, ZeroRowContributesNothing) {
  ResidualBlock b;
  b.residuals = Eigen::Vector2d(0.5, -0.25);
  b.jacobian = Eigen::Matrix2d{{1.0, 2.0}, {0.5, -1.0}};
  ResidualBlock padded = b;
  padded.residuals = Eigen::Vector3d(0.5, -0.25, 0.0);
  padded.jacobian = Eigen::MatrixXd::Zero(3, 2);
  padded.jacobian.topRows(2) = b.jacobian;
  const ResidualBlock one[] = {b};
  const ResidualBlock two[] = {padded};
  const NormalEquations e1 = build_normal_equations(one, 2);
  const NormalEquations e2 = build_normal_equations(two, 2);
  EXPECT_EQ(e1.hessian, e2.hessian);
  EXPECT_EQ(e1.gradient, e2.gradient);
}

TEST(NormalEquationsTest, RobustWeightApplied) {
  ResidualBlock b;
  b.residuals = Eigen::VectorXd::Constant(1, 1.0);
  b.jacobian = Eigen::MatrixXd::Constant(1, 1, 1.0);
  b.loss = Loss::Cauchy;
  b.weight = 4.0;
  const ResidualBlock blocks[] = {b};
  const NormalEquations eq = build_normal_equations(blocks, 1);
  EXPECT_EQ(eq.hessian(0, 0), 2.0);  // 4 * rho'(1) = 4 / 2
  EXPECT_EQ(eq.gradient[0], 2.0);
  b.jacobian.resize(0, 0);
  const ResidualBlock bad[] = {b};
  EXPECT_THROW(build_normal_equations(bad, 1), DimensionError);
}

TEST(NormalEquationsTest, SingularSystemRejected) {
  NormalEquations eq{Eigen::Matrix2d{{1.0, 1.0}, {1.0, 1.0}}, Eigen::Vector2d(1.0, -1.0)};
  eq.hessian *= -1.0;
  Eigen::VectorXd delta;
  EXPECT_FALSE(solve_damped(eq, 1e-4, delta));
}

TEST(Convergence, Criteria) {
  const SolverOptions o;
  EXPECT_EQ(convergence_check(0.0, 1.0, 0.5, 1.0, o), Convergence::Converged);
  EXPECT_EQ(convergence_check(1e-3, 1.0, 1.0 - 1e-12, 1.0, o), Convergence::Converged);
  EXPECT_EQ(convergence_check(1e-3, 1.0, 0.5, 1e-11, o), Convergence::Converged);
  EXPECT_EQ(convergence_check(1e-3, 1.0, 0.5, 1.0, o), Convergence::Continue);
}

TEST(Options, Validation) {
  SolverOptions o;
  o.max_iterations = 0;
  EXPECT_THROW(Solver{o}, ConfigError);
  o = SolverOptions{};
  o.lambda_increase = 1.0;
  EXPECT_THROW(Solver{o}, ConfigError);
}

// --- whole solves -------------------------------------------------------------------

TEST(Solve, NearFixedPoint) {
  // Goal at the current pose and q at the joint-range centers: only the
  // barrier's O(eps^3) slope and the self pairs remain, so the command
  // barely moves.
  const Eigen::VectorXd q = s6().center_positions();
  const ArmState state = ArmState::at_rest(q, 0.0, kDt);
  CostWeights w;
  w.noise_magnitude = 0.0;
  Solver solver;
  const SolveResult r = solver.solve(free_request(state, GoalSpec::pose(end_effector_pose(s6(), q)), w));
  EXPECT_EQ(r.status, SolveStatus::Converged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_LT((r.q_cmd - q).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Solve, ReachesNearbyPositionGoal) {
  const Eigen::VectorXd q0 = testing::short_scenario("s1_hold", 1, 1.0).arms[0].initial_q;
  const Eigen::Vector3d target = end_effector_pose(s6(), q0).position + Eigen::Vector3d(0.01, 0.0, 0.0);
  // At rest the jerk bound allows microradians per tick, so the goal is
  // reached over repeated ticks as in closed loop.
  ArmState state = ArmState::at_rest(q0, 0.0, kDt);
  Solver solver(SolverOptions{}, 7);
  for (int tick = 1; tick <= 100; ++tick) {
    const SolveResult r = solver.solve(free_request(state, GoalSpec::position(target)));
    state.commit(r.q_cmd, tick * kDt);
  }
  const auto frames = testing::fk_oracle(testing::robot_path("s6"), state.q());
  EXPECT_LT((testing::oracle_frame(frames, s6().links()[static_cast<std::size_t>(s6().end_effector_link())].name).translation() - target).norm(),
            1e-3);
}

TEST(Solve, StopsShortOfObstacle) {
  const RobotModel ball = parse_robot_description(R"({
    "name": "ball",
    "joints": [{"name": "j", "kind": "revolute", "axis": [0, 0, 1], "limits": {"pos": [-1, 1], "vel": 1, "acc": 1}}],
    "links": [{"name": "base"},
              {"name": "l", "parent_joint": "j", "collision": [{"type": "sphere", "dims": [0.06]}]}],
    "end_effector": "l"})");
  const RobotModel* ext[] = {&ball};
  const AllowedCollisionMatrix acm = build_acm(s6(), ext);
  const Eigen::VectorXd q0 = testing::short_scenario("s1_hold", 1, 1.0).arms[0].initial_q;
  const Eigen::Vector3d ee = end_effector_pose(s6(), q0).position;
  const Eigen::Vector3d center = ee + Eigen::Vector3d(0.0, 0.12, 0.0);
  WorldSphere obstacle;
  obstacle.center = center;
  obstacle.radius = 0.06;
  obstacle.arm = 1;
  obstacle.link = 1;
  const WorldSpheres others{obstacle};
  ASSERT_GE(min_gap(sphere_world_positions(s6(), q0), others, acm), 0.0);

  ArmState state = ArmState::at_rest(q0, 0.0, kDt);
  Solver solver(SolverOptions{}, 9);
  for (int tick = 1; tick <= 300; ++tick) {
    SolveRequest req = free_request(state, GoalSpec::position(center));
    req.acm = &acm;
    req.external_spheres = others;
    const SolveResult r = solver.solve(req);
    ASSERT_GE(min_gap(sphere_world_positions(s6(), r.q_cmd), others, acm), 0.0) << "tick " << tick;
    state.commit(r.q_cmd, tick * kDt);
  }
  EXPECT_GT((end_effector_pose(s6(), state.q()).position - center).norm(), 0.06);
}

TEST(Solve, PenetratingStartIsReported) {
  const Eigen::VectorXd q0 = s6().center_positions();
  const WorldSpheres own = sphere_world_positions(s6(), q0);
  WorldSphere intruder = own.back();
  intruder.arm = 1;
  const RobotModel* ext[] = {&s6()};
  const AllowedCollisionMatrix acm = build_acm(s6(), ext);
  const ArmState state = ArmState::at_rest(q0, 0.0, kDt);
  SolveRequest req = free_request(state, GoalSpec::pose(end_effector_pose(s6(), q0)));
  req.acm = &acm;
  req.external_spheres = {intruder};
  Solver solver;
  const SolveResult r = solver.solve(req);
  EXPECT_EQ(r.status, SolveStatus::InfeasibleStart);
  EXPECT_LT(r.min_active_gap, 0.0);
  EXPECT_TRUE(r.q_cmd.allFinite());
}

TEST(Solve, BudgetExhaustion) {
  SolverOptions o;
  o.max_iterations = 1;
  const Eigen::VectorXd q = s6().center_positions();
  const ArmState state = ArmState::at_rest(q, 0.0, kDt);
  Solver solver(o, 1);
  const SolveResult r = solver.solve(free_request(state, GoalSpec::position(Eigen::Vector3d(0.3, 0.3, 0.2))));
  EXPECT_EQ(r.status, SolveStatus::MaxIterations);
  EXPECT_EQ(r.iterations, 1);
}

TEST(Solve, DescentBoundsAndStepLimitOnRandomProblems) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Solver solver(SolverOptions{}, 4);
  int iterations = 0;
  for (int trial = 0; iterations < 1000; ++trial) {
    ASSERT_LT(trial, 2000);
    const Eigen::VectorXd q = testing::random_configuration(s6(), rng);
    const ArmState state = testing::moving_state(q, kDt, rng, 1.0);
    const GoalSpec goal = GoalSpec::pose(Pose(Eigen::Vector3d(0.4 * u(rng), 0.4 * u(rng), 0.3 + 0.2 * u(rng)),
                                              Eigen::Quaterniond(Eigen::AngleAxisd(3.0 * u(rng), Eigen::Vector3d::UnitX()))));
    const SolveResult r = solver.solve(free_request(state, goal));
    iterations += r.iterations;
    EXPECT_TRUE(strictly_decreasing(r.accepted_costs));
    EXPECT_TRUE(within(r.q_cmd, s6().lower_limits(), s6().upper_limits()));
    const CommandBounds box = command_bounds(s6(), q, kDt);
    EXPECT_TRUE(within(r.q_cmd, box.lower, box.upper));
    const Eigen::VectorXd radius = trust_region_radius(max_step_from_jerk(state, kDt, kDefaultMaxJerk), SolverOptions{});
    EXPECT_EQ(r.step_bounds, radius);
    EXPECT_LE(r.step_bounds.maxCoeff(), SolverOptions{}.radius_cap);
    // Each accepted step moves at most the radius from the noisy start.
    const Eigen::VectorXd reach = radius * static_cast<double>(r.accepted) +
                                  Eigen::VectorXd::Constant(6, CostWeights{}.noise_magnitude);
    EXPECT_TRUE(((r.q_cmd - q).cwiseAbs().array() <= reach.array() + 1e-15).all());
  }
}

TEST(Solve, Deterministic) {
  std::mt19937_64 rng(5);
  const Eigen::VectorXd q = testing::random_configuration(s6(), rng, 0.1);
  const ArmState state = testing::moving_state(q, kDt, rng, 0.5);
  const GoalSpec goal = GoalSpec::position(Eigen::Vector3d(0.35, 0.1, 0.3));
  Solver a(SolverOptions{}, 99), b(SolverOptions{}, 99);
  for (int i = 0; i < 3; ++i) {
    const SolveResult ra = a.solve(free_request(state, goal));
    const SolveResult rb = b.solve(free_request(state, goal));
    EXPECT_EQ(ra.q_cmd, rb.q_cmd);
    EXPECT_EQ(ra.final_cost, rb.final_cost);
    EXPECT_EQ(ra.iterations, rb.iterations);
    EXPECT_EQ(ra.accepted_costs, rb.accepted_costs);
  }
}

TEST(Solve, MissingInputsRejected) {
  SolveRequest r;
  Solver solver;
  EXPECT_THROW(solver.solve(r), std::invalid_argument);
}

}  // namespace
}  // namespace dawnik
