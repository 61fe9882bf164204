#include "dawnik/simulation.hpp"

#include <chrono>
#include <cmath>

#include "dawnik/kinematics.hpp"

namespace dawnik {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

WorldSpheres others_of(const std::vector<WorldSpheres>& per_arm, std::size_t skip) {
  WorldSpheres out;
  for (std::size_t a = 0; a < per_arm.size(); ++a)
    if (a != skip) out.insert(out.end(), per_arm[a].begin(), per_arm[a].end());
  return out;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t base, int trial) {
  return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(trial) + 1));
}

std::uint64_t solver_seed(std::uint64_t trial_seed, int arm) {
  return splitmix64(trial_seed + 0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(arm + 1));
}

SceneGeometry scene_geometry(const ScenarioSpec& spec, int max_per_link) {
  SceneGeometry g;
  std::vector<bool> controlled;
  for (const auto& arm : spec.arms) {
    g.models.push_back(max_per_link > 0 ? arm.model->with_sphere_resolution(max_per_link) : *arm.model);
    g.bases.push_back(arm.base);
    controlled.push_back(arm.controlled());
  }
  std::vector<const RobotModel*> ptrs;
  for (const auto& m : g.models) ptrs.push_back(&m);
  g.acm = build_scene_acm(ptrs, controlled);
  return g;
}

Eigen::VectorXd settle_configuration(const RobotModel& model, const Transform& base, const Eigen::VectorXd& q0,
                                     const GoalSpec& goal, const CostWeights& weights, const SolverOptions& options,
                                     const WorldSpheres& others, const AllowedCollisionMatrix& acm, int arm,
                                     double dt, int max_solves) {
  CostWeights w = weights;
  w.w_kino = 0.0;
  w.noise_magnitude = 0.0;
  w.j_max = 1e12;  // the radius cap governs the step
  Solver solver(options, 0);
  Eigen::VectorXd q = q0;
  for (int i = 0; i < max_solves; ++i) {
    const ArmState state = ArmState::at_rest(q, 0.0, dt);
    SolveRequest req;
    req.model = &model;
    req.base = base;
    req.state = &state;
    req.arm = arm;
    req.external_spheres = others;
    req.acm = &acm;
    req.goal = goal;
    req.weights = w;
    req.dt = dt;
    const SolveResult r = solver.solve(req);
    const double moved = (r.q_cmd - q).cwiseAbs().maxCoeff();
    q = r.q_cmd;
    if (moved < 1e-9) break;
  }
  return q;
}

RunLog run_trial(const ScenarioSpec& spec, int trial, const RunOptions& options) {
  spec.validate();
  const double dt = 1.0 / spec.tick_rate;
  const std::size_t n_arms = spec.arms.size();
  const SceneGeometry scene = scene_geometry(spec);

  RunLog log;
  log.scenario = spec.name;
  log.trial = trial;
  log.seed = trial_seed(spec.seed, trial);
  log.tick_rate = spec.tick_rate;

  std::vector<std::vector<Waypoint>> paths(n_arms);
  std::vector<Eigen::VectorXd> q(n_arms);
  for (std::size_t a = 0; a < n_arms; ++a) {
    const ArmConfig& arm = spec.arms[a];
    q[a] = arm.controlled() ? arm.initial_q : arm.trajectory.sample(0.0);
    if (arm.controlled()) paths[a] = generate_path(arm.path);
  }

  auto spheres_at = [&](const std::vector<Eigen::VectorXd>& qs) {
    std::vector<WorldSpheres> out(n_arms);
    for (std::size_t a = 0; a < n_arms; ++a)
      out[a] = sphere_world_positions(scene.models[a], qs[a], scene.bases[a], static_cast<int>(a));
    return out;
  };

  // Goal orientations and settled starting configurations.
  std::vector<Eigen::Quaterniond> orientation(n_arms, Eigen::Quaterniond::Identity());
  std::vector<GoalSpec> start_goal(n_arms);
  for (std::size_t a = 0; a < n_arms; ++a) {
    const ArmConfig& arm = spec.arms[a];
    if (!arm.controlled()) continue;
    orientation[a] = arm.goal_orientation.value_or(end_effector_pose(*arm.model, arm.initial_q, arm.base).orientation);
    start_goal[a] = GoalSpec::pose(Pose(paths[a].front().position, orientation[a]), arm.w_position, arm.w_orientation);
    start_goal[a].mode = arm.goal_mode;
  }
  if (spec.settle_start) {
    const auto initial = spheres_at(q);
    for (std::size_t a = 0; a < n_arms; ++a) {
      const ArmConfig& arm = spec.arms[a];
      if (!arm.controlled()) continue;
      q[a] = settle_configuration(*arm.model, arm.base, q[a], start_goal[a], arm.weights, spec.solver,
                                  others_of(initial, a), scene.acm, static_cast<int>(a), dt);
    }
  }

  std::vector<ArmState> states(n_arms);
  std::vector<Solver> solvers;
  for (std::size_t a = 0; a < n_arms; ++a) {
    const ArmConfig& arm = spec.arms[a];
    states[a] = ArmState::at_rest(q[a], -dt, dt);
    solvers.emplace_back(spec.solver, solver_seed(log.seed, static_cast<int>(a)));
    log.arms.push_back({arm.name, arm.controlled(), q[a], orientation[a]});
  }

  const std::size_t ticks = tick_count(spec.tick_rate, spec.duration);
  log.records.reserve(ticks * n_arms);
  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * dt;
    for (std::size_t a = 0; a < n_arms; ++a)
      q[a] = spec.arms[a].controlled() ? states[a].q() : spec.arms[a].trajectory.sample(t);
    const auto snapshot = spheres_at(q);

    std::vector<TickRecord> tick_records(n_arms);
    for (std::size_t a = 0; a < n_arms; ++a) {
      const ArmConfig& arm = spec.arms[a];
      TickRecord& rec = tick_records[a];
      rec.tick = static_cast<int>(k);
      rec.stamp = t;
      rec.arm = static_cast<int>(a);
      if (!arm.controlled()) {
        rec.q = q[a];
        continue;
      }
      rec.waypoint = waypoint_index(t, arm.path.sample_period, paths[a].size());
      rec.reference = paths[a][rec.waypoint].position;
      GoalSpec goal = start_goal[a];
      goal.target = Pose(rec.reference, orientation[a]);

      SolveRequest req;
      req.model = arm.model.get();
      req.base = arm.base;
      req.state = &states[a];
      req.arm = static_cast<int>(a);
      req.external_spheres = others_of(snapshot, a);
      req.acm = &scene.acm;
      req.goal = goal;
      req.weights = arm.weights;
      req.dt = dt;
      try {
        const SolveResult r = solvers[a].solve(req);
        rec.q = r.q_cmd;
        rec.min_gap = r.min_active_gap;
        rec.active_pairs = static_cast<int>(r.active_pairs.size());
        rec.status = r.status;
        rec.iterations = r.iterations;
        if (options.record_active_pairs)
          for (const auto& p : r.active_pairs) rec.pairs.push_back({p.id_a, p.arm_b, p.id_b, p.gap});
        log.solve_times.push_back(r.wall_time);
      } catch (const std::exception&) {
        ++log.solver_failures;
        rec.q = states[a].q();
        rec.status = SolveStatus::MaxIterations;
      }
    }
    // Commands take effect together at the end of the tick.
    for (std::size_t a = 0; a < n_arms; ++a) {
      TickRecord& rec = tick_records[a];
      if (spec.arms[a].controlled()) states[a].commit(rec.q, t);
      rec.ee = end_effector_pose(scene.models[a], rec.q, scene.bases[a]);
      log.records.push_back(std::move(rec));
    }
  }
  return log;
}

std::vector<RunLog> run_scenario(const ScenarioSpec& spec, const RunOptions& options) {
  std::vector<RunLog> logs;
  for (int trial = 0; trial < spec.trials; ++trial) logs.push_back(run_trial(spec, trial, options));
  return logs;
}

}  // namespace dawnik
