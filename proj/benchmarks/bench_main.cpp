#include <algorithm>
#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "dawnik/costs.hpp"
#include "dawnik/kinematics.hpp"
#include "dawnik/proximity.hpp"
#include "dawnik/scenario.hpp"
#include "dawnik/simulation.hpp"
#include "dawnik/solver.hpp"

namespace {

using namespace dawnik;

const RobotModel& arm() {
  static const RobotModel m = load_robot_model(std::string(DAWNIK_BENCH_DATA_DIR) + "/robots/s6.json");
  return m;
}

const RobotModel& neighbour() {
  static const RobotModel m = load_robot_model(std::string(DAWNIK_BENCH_DATA_DIR) + "/robots/s7.json");
  return m;
}

Eigen::VectorXd configuration(const RobotModel& model, std::mt19937_64& rng) {
  const Eigen::VectorXd lo = model.lower_limits(), hi = model.upper_limits();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd q(model.dof());
  for (int i = 0; i < q.size(); ++i) q[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
  return q;
}

// A neighbour standing close enough that several pairs are active.
WorldSpheres nearby_spheres(std::mt19937_64& rng) {
  return sphere_world_positions(neighbour(), configuration(neighbour(), rng),
                                make_transform(Eigen::Vector3d(0.55, 0.1, 0.0), Eigen::Vector3d(0, 0, 2.5)), 1);
}

void BM_ForwardKinematics(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Eigen::VectorXd q = configuration(arm(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(end_effector_pose(arm(), q));
}
BENCHMARK(BM_ForwardKinematics);

void BM_SphereWorldPositions(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Eigen::VectorXd q = configuration(arm(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(sphere_world_positions(arm(), q));
}
BENCHMARK(BM_SphereWorldPositions);

void BM_FindActivePairs(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const RobotModel* ext[] = {&neighbour()};
  const AllowedCollisionMatrix acm = build_acm(arm(), ext);
  const WorldSpheres ctrl = sphere_world_positions(arm(), configuration(arm(), rng));
  const WorldSpheres others = nearby_spheres(rng);
  const ProximityOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(find_active_pairs(ctrl, others, acm, opt));
}
BENCHMARK(BM_FindActivePairs);

void BM_Solve(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const RobotModel* ext[] = {&neighbour()};
  const AllowedCollisionMatrix acm = build_acm(arm(), ext);
  const Eigen::VectorXd q = arm().center_positions();
  const ArmState rest = ArmState::at_rest(q, 0.0, 0.01);
  SolveRequest req;
  req.model = &arm();
  req.state = &rest;
  req.acm = &acm;
  req.external_spheres = nearby_spheres(rng);
  const Pose ee = end_effector_pose(arm(), q);
  req.goal = GoalSpec::pose(Pose(ee.position + Eigen::Vector3d(0.01, 0, 0), ee.orientation));
  Solver solver({}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(req));
}
BENCHMARK(BM_Solve)->Unit(benchmark::kMicrosecond);

void BM_ScenarioSecond(benchmark::State& state) {
  ScenarioSpec spec = load_scenario(std::string(DAWNIK_BENCH_DATA_DIR) + "/scenarios/s2_circle_xy.json");
  spec.duration = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(spec, 0));
}
BENCHMARK(BM_ScenarioSecond)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
