#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dawnik/errors.hpp"
#include "dawnik/kinematics.hpp"
#include "dawnik/metrics.hpp"
#include "dawnik/run_log.hpp"
#include "dawnik/scenario.hpp"
#include "dawnik/simulation.hpp"
#include "dawnik/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dawnik::cli {

namespace {

// Input errors that map to exit code 2.
struct BadInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string out_dir = "dawnik_out";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  bool quiet = false;
  bool dump_active_pairs = false;
  // solve
  std::string model;
  std::string q;
  std::string goal;
  std::string weights;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw BadInput("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Inline JSON, or the contents of a file when the argument names one.
json json_argument(const std::string& arg, const char* what) {
  const std::string text = !arg.empty() && arg.front() != '[' && arg.front() != '{' && fs::exists(arg)
                               ? read_text(arg)
                               : arg;
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw BadInput(std::string("malformed ") + what + " JSON: " + e.what());
  }
}

Eigen::VectorXd json_vector(const json& j, const char* what) {
  if (!j.is_array()) throw BadInput(std::string(what) + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw BadInput(std::string(what) + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::Vector3d json_vec3(const json& j, const char* what) {
  const Eigen::VectorXd v = json_vector(j, what);
  if (v.size() != 3) throw BadInput(std::string(what) + " needs 3 numbers");
  return v;
}

ScenarioSpec load_config(const Options& o) {
  if (o.config.empty()) throw BadInput("--config is required");
  const fs::path path = resolve_config_path(o.config);
  if (!fs::exists(path)) throw BadInput("config file not found: " + o.config);
  ScenarioSpec spec = load_scenario(path);
  if (o.seed) spec.seed = *o.seed;
  if (o.trials) spec.trials = *o.trials;
  spec.validate();
  return spec;
}

std::vector<RunLog> load_logs(const ScenarioSpec& spec, const fs::path& dir) {
  std::vector<RunLog> logs;
  for (int t = 0; t < spec.trials; ++t) {
    const fs::path p = dir / run_log_filename(t);
    if (!fs::exists(p)) throw BadInput("missing run log " + p.string());
    logs.push_back(read_run_log(p));
  }
  return logs;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

json verification_json(const VerificationReport& v) {
  json j;
  j["collisions"] = v.collisions;
  j["per_trial"] = v.per_trial;
  j["first_collision_tick"] = v.first_collision_tick;
  j["min_gap"] = std::isfinite(v.min_gap) ? json(v.min_gap) : json(nullptr);
  return j;
}

void write_metrics(const fs::path& dir, const RunMetrics& m) {
  write_file(dir / "metrics.json", metrics_json(m));
  write_file(dir / "metrics.csv", metrics_csv_header() + metrics_csv_row(m));
}

void print_summary(std::ostream& out, const RunMetrics& m) {
  out << std::fixed << std::setprecision(2) << m.scenario << ": ";
  const char* axes[] = {"x", "y", "z", "roll", "pitch", "yaw"};
  for (int i = 0; i < 6; ++i) {
    const AxisStats& s = i < 3 ? m.combined.position_mm[static_cast<std::size_t>(i)]
                               : m.combined.orientation_mrad[static_cast<std::size_t>(i - 3)];
    out << axes[i] << ' ' << s.mean << " ± " << s.std << (i < 3 ? " mm" : " mrad") << ", ";
  }
  out << "collisions " << m.collisions << '\n';
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  const ScenarioSpec spec = load_config(o);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);

  RunOptions run_options;
  run_options.record_active_pairs = o.dump_active_pairs;
  std::vector<RunLog> logs;
  std::vector<double> times;
  int failures = 0;
  for (int t = 0; t < spec.trials; ++t) {
    logs.push_back(run_trial(spec, t, run_options));
    const RunLog& log = logs.back();
    write_run_log(dir / run_log_filename(t), log);
    times.insert(times.end(), log.solve_times.begin(), log.solve_times.end());
    failures += log.solver_failures;
    if (!o.quiet) out << spec.name << ": trial " << t << " done, " << log.tick_count() << " ticks\n";
  }

  const VerificationReport v = verify_collisions_offline(logs, spec, spec.verify_substeps);
  write_file(dir / "verification.json", verification_json(v).dump(2) + "\n");
  const RunMetrics m = evaluate_run(logs, spec, v.collisions);
  write_metrics(dir, m);

  json timing;
  if (!times.empty()) {
    std::sort(times.begin(), times.end());
    auto q = [&](double f) { return times[std::min(times.size() - 1, static_cast<std::size_t>(f * times.size()))]; };
    timing = {{"solves", times.size()}, {"median_s", q(0.5)}, {"p90_s", q(0.9)}, {"p99_s", q(0.99)},
              {"max_s", times.back()}};
  }
  write_file(dir / "timing.json", timing.dump(2) + "\n");

  if (!o.quiet) print_summary(out, m);
  if (failures > 0) {
    err << "error: " << failures << " solver failures\n";
    return kExitFailure;
  }
  if (spec.expect_no_collisions && v.collisions > 0) {
    err << "error: " << v.collisions << " colliding ticks, scenario expects none\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const ScenarioSpec spec = load_config(o);
  const auto logs = load_logs(spec, o.out_dir);
  const VerificationReport v = verify_collisions_offline(logs, spec, spec.verify_substeps);
  out << verification_json(v).dump(2) << '\n';
  if (spec.expect_no_collisions && v.collisions > 0) {
    err << "error: " << v.collisions << " colliding ticks, scenario expects none\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_metrics(const Options& o, std::ostream& out, std::ostream&) {
  const ScenarioSpec spec = load_config(o);
  const fs::path dir(o.out_dir);
  const auto logs = load_logs(spec, dir);
  std::size_t collisions = 0;
  if (fs::exists(dir / "verification.json")) {
    collisions = json::parse(read_text(dir / "verification.json")).at("collisions").get<std::size_t>();
  } else {
    collisions = verify_collisions_offline(logs, spec, spec.verify_substeps).collisions;
  }
  const RunMetrics m = evaluate_run(logs, spec, collisions);
  write_metrics(dir, m);
  if (!o.quiet) print_summary(out, m);
  return kExitOk;
}

int cmd_paths(const Options& o, std::ostream& out, std::ostream&) {
  const ScenarioSpec spec = load_config(o);
  std::ostringstream csv;
  csv << std::setprecision(17) << "arm,stamp,x,y,z\n";
  for (const auto& arm : spec.arms) {
    if (!arm.controlled()) continue;
    for (const auto& w : generate_path(arm.path))
      csv << arm.name << ',' << w.stamp << ',' << w.position.x() << ',' << w.position.y() << ',' << w.position.z()
          << '\n';
  }
  if (o.quiet) {
    fs::create_directories(o.out_dir);
    write_file(fs::path(o.out_dir) / "paths.csv", csv.str());
  } else {
    out << csv.str();
  }
  return kExitOk;
}

GoalSpec parse_goal(const json& g) {
  if (!g.is_object()) throw BadInput("goal must be a JSON object");
  std::string mode = g.value("mode", "");
  const bool has_p = g.contains("position");
  const bool has_o = g.contains("orientation") || g.contains("rpy");
  if (mode.empty()) mode = has_p && has_o ? "pose" : has_p ? "position" : "orientation";
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  if (g.contains("orientation")) {
    const Eigen::VectorXd c = json_vector(g["orientation"], "goal orientation");
    if (c.size() != 4) throw BadInput("goal orientation needs [w, x, y, z]");
    orientation = Eigen::Quaterniond(c[0], c[1], c[2], c[3]);
  } else if (g.contains("rpy")) {
    const Eigen::Vector3d rpy = json_vec3(g["rpy"], "goal rpy");
    orientation = Eigen::Quaterniond(rpy_to_rotation(rpy.x(), rpy.y(), rpy.z()));
  }
  const Eigen::Vector3d position = has_p ? json_vec3(g["position"], "goal position") : Eigen::Vector3d::Zero();
  const double wp = g.value("w_position", 1.0);
  const double wo = g.value("w_orientation", 1.0);
  GoalSpec goal;
  if (mode == "position") {
    if (!has_p) throw BadInput("position goal needs 'position'");
    goal = GoalSpec::position(position, wp);
  } else if (mode == "orientation") {
    if (!has_o) throw BadInput("orientation goal needs 'orientation' or 'rpy'");
    goal = GoalSpec::orientation(orientation, wo);
  } else if (mode == "pose") {
    if (!has_p || !has_o) throw BadInput("pose goal needs a position and an orientation");
    goal = GoalSpec::pose(Pose(position, orientation), wp, wo);
  } else {
    throw BadInput("goal mode must be position, orientation or pose");
  }
  goal.validate();
  return goal;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream&) {
  if (o.model.empty() || o.q.empty() || o.goal.empty()) throw BadInput("solve needs --model, --q and --goal");
  if (!fs::exists(o.model)) throw BadInput("model file not found: " + o.model);
  const RobotModel model = load_robot_model(o.model);
  const Eigen::VectorXd q = json_vector(json_argument(o.q, "joint vector"), "joint vector");
  if (q.size() != model.dof())
    throw BadInput("joint vector has " + std::to_string(q.size()) + " entries, model has " +
                   std::to_string(model.dof()));
  const GoalSpec goal = parse_goal(json_argument(o.goal, "goal"));
  CostWeights weights;
  if (!o.weights.empty()) {
    const json w = json_argument(o.weights, "weights");
    if (!w.is_object()) throw BadInput("weights must be a JSON object");
    for (const auto& [key, value] : w.items()) {
      if (key == "q_pref") {
        weights.q_pref = json_vector(value, "q_pref");
        continue;
      }
      if (!value.is_number()) throw BadInput("weight '" + key + "' must be a number");
      const double v = value.get<double>();
      if (key == "w_ee") weights.w_ee = v;
      else if (key == "w_coll") weights.w_coll = v;
      else if (key == "w_pref") weights.w_pref = v;
      else if (key == "w_poslim") weights.w_poslim = v;
      else if (key == "w_kino") weights.w_kino = v;
      else if (key == "eps_coll") weights.eps_coll = v;
      else if (key == "eps_limit") weights.eps_limit = v;
      else if (key == "j_max") weights.j_max = v;
      else if (key == "noise_magnitude") weights.noise_magnitude = v;
      else if (key == "tukey_scale") weights.tukey_scale = v;
      else if (key == "gap_floor") weights.gap_floor = v;
      else throw BadInput("unknown weight '" + key + "'");
    }
  }
  weights.validate();

  const double dt = 0.01;
  const ArmState state = ArmState::at_rest(q, 0.0, dt);
  std::vector<const RobotModel*> arms{&model};
  const AllowedCollisionMatrix acm = build_scene_acm(arms, {true});
  SolveRequest req;
  req.model = &model;
  req.state = &state;
  req.acm = &acm;
  req.goal = goal;
  req.weights = weights;
  req.dt = dt;
  Solver solver({}, o.seed.value_or(0));
  const SolveResult r = solver.solve(req);
  const Pose ee = end_effector_pose(model, r.q_cmd);

  json j;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["q_cmd"] = std::vector<double>(r.q_cmd.data(), r.q_cmd.data() + r.q_cmd.size());
  j["ee_position"] = {ee.position.x(), ee.position.y(), ee.position.z()};
  j["ee_orientation"] = {ee.orientation.w(), ee.orientation.x(), ee.orientation.y(), ee.orientation.z()};
  for (CostFamily f : kCostFamilies) j["cost_breakdown"][to_string(f)] = r.cost_breakdown[f];
  j["cost"] = r.final_cost;
  j["active_pairs"] = r.active_pairs.size();
  out << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Collision-aware IK solver and multi-arm scenario runner", "dawnik"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Scenario config file (or name under DAWNIK_DEFAULT_CONFIG_DIR)");
    sub->add_option("--out", o.out_dir, "Output directory");
    sub->add_option("--seed", o.seed, "Override the scenario seed");
    sub->add_option("--trials", o.trials, "Override the trial count")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", o.quiet, "Suppress progress output");
  };
  CLI::App* run = app.add_subcommand("run", "Run all trials, then verify and compute metrics");
  add_common(run);
  run->add_flag("--dump-active-pairs", o.dump_active_pairs, "Record active collision pairs in the run logs");
  CLI::App* verify = app.add_subcommand("verify", "Re-verify logged runs for collisions");
  add_common(verify);
  CLI::App* metrics = app.add_subcommand("metrics", "Recompute metrics from logged runs");
  add_common(metrics);
  CLI::App* paths = app.add_subcommand("paths", "Print the reference waypoints of a scenario");
  add_common(paths);
  CLI::App* solve = app.add_subcommand("solve", "Solve one IK step and print the result as JSON");
  solve->add_option("--model", o.model, "Robot description file")->required();
  solve->add_option("--q", o.q, "Current joint vector, JSON array or file")->required();
  solve->add_option("--goal", o.goal, "Goal, JSON object or file")->required();
  solve->add_option("--weights", o.weights, "Cost weight overrides, JSON object or file");
  solve->add_option("--seed", o.seed, "Noise seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }

  try {
    if (run->parsed()) return cmd_run(o, out, err);
    if (verify->parsed()) return cmd_verify(o, out, err);
    if (metrics->parsed()) return cmd_metrics(o, out, err);
    if (paths->parsed()) return cmd_paths(o, out, err);
    if (solve->parsed()) return cmd_solve(o, out, err);
  } catch (const BadInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitBadInput;
}

}  // namespace dawnik::cli
