#include "dawnik/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dawnik/errors.hpp"
#include "json_util.hpp"

namespace dawnik {

using namespace detail;

ScenarioId parse_scenario_id(std::string_view s) {
  if (s == "S1") return ScenarioId::S1;
  if (s == "S2") return ScenarioId::S2;
  if (s == "S3") return ScenarioId::S3;
  if (s == "S4") return ScenarioId::S4;
  throw ConfigError("unknown scenario id '" + std::string(s) + "'");
}

const char* to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::S1:
      return "S1";
    case ScenarioId::S2:
      return "S2";
    case ScenarioId::S3:
      return "S3";
    case ScenarioId::S4:
      return "S4";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

JointTrajectory::JointTrajectory(std::vector<double> stamps, std::vector<Eigen::VectorXd> samples)
    : stamps_(std::move(stamps)), samples_(std::move(samples)) {
  if (stamps_.size() != samples_.size()) throw ConfigError("trajectory stamps and samples differ in count");
  if (stamps_.size() < 2) throw ConfigError("trajectory needs at least two samples");
  if (stamps_.front() != 0.0) throw ConfigError("trajectory must start at stamp 0");
  for (std::size_t i = 1; i < stamps_.size(); ++i) {
    if (!(stamps_[i] > stamps_[i - 1])) throw ConfigError("trajectory stamps must be strictly increasing");
    if (samples_[i].size() != samples_[0].size()) throw ConfigError("trajectory rows differ in length");
  }
}

JointTrajectory JointTrajectory::load_csv(const std::filesystem::path& path, int dof) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory file '" + path.string() + "'");
  std::vector<double> stamps;
  std::vector<Eigen::VectorXd> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (stamps.empty() && samples.empty() && line_no == 1) continue;  // header
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": non-numeric trajectory row");
    }
    if (values.size() != static_cast<std::size_t>(dof) + 1)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(dof + 1) +
                        " columns, found " + std::to_string(values.size()));
    stamps.push_back(values[0]);
    samples.push_back(Eigen::Map<const Eigen::VectorXd>(values.data() + 1, dof));
  }
  try {
    return JointTrajectory(std::move(stamps), std::move(samples));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Eigen::VectorXd JointTrajectory::sample(double t) const {
  if (stamps_.empty()) throw std::logic_error("sampling an empty trajectory");
  const double period = stamps_.back();
  double tm = std::fmod(t, period);
  if (tm < 0.0) tm += period;
  const auto it = std::upper_bound(stamps_.begin(), stamps_.end(), tm);
  const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - stamps_.begin()), stamps_.size() - 1);
  const std::size_t lo = hi - 1;
  const double f = (tm - stamps_[lo]) / (stamps_[hi] - stamps_[lo]);
  return (1.0 - f) * samples_[lo] + f * samples_[hi];
}

// ---------------------------------------------------------------------------

int ScenarioSpec::controlled_count() const {
  return static_cast<int>(std::count_if(arms.begin(), arms.end(), [](const ArmConfig& a) { return a.controlled(); }));
}

int ScenarioSpec::external_count() const { return static_cast<int>(arms.size()) - controlled_count(); }

void ScenarioSpec::validate() const {
  if (!(tick_rate > 0.0)) throw ConfigError("tick_rate must be > 0");
  if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (verify_substeps < 1) throw ConfigError("verify substeps must be >= 1");
  solver.validate();
  static constexpr int expected[4][2] = {{1, 0}, {1, 1}, {1, 2}, {2, 0}};
  const auto [nc, ne] = expected[static_cast<int>(id)];
  if (controlled_count() != nc || external_count() != ne)
    throw ConfigError(std::string("scenario ") + to_string(id) + " needs " + std::to_string(nc) + " controlled and " +
                      std::to_string(ne) + " external arms, found " + std::to_string(controlled_count()) + " and " +
                      std::to_string(external_count()));
  for (const auto& arm : arms) {
    if (!arm.model) throw ConfigError("arm '" + arm.name + "' has no model");
    if (arm.initial_q.size() != arm.model->dof())
      throw ConfigError("arm '" + arm.name + "': initial_q has " + std::to_string(arm.initial_q.size()) +
                        " entries, model has " + std::to_string(arm.model->dof()));
    if (arm.controlled()) {
      arm.path.validate();
      arm.weights.validate();
      if (arm.weights.q_pref.size() > 0 && arm.weights.q_pref.size() != arm.model->dof())
        throw ConfigError("arm '" + arm.name + "': q_pref length differs from the model");
      if (arm.model->dof() > kMaxDof) throw ConfigError("arm '" + arm.name + "' has too many joints");
    } else {
      if (arm.trajectory.empty()) throw ConfigError("external arm '" + arm.name + "' has no trajectory");
      if (arm.trajectory.samples()[0].size() != arm.model->dof())
        throw ConfigError("external arm '" + arm.name + "': trajectory width differs from the model");
    }
  }
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& name) {
  const std::filesystem::path p(name);
  return p.is_absolute() ? p : base / p;
}

void read_number(const json& obj, const char* key, const std::string& path, double& out) {
  if (obj.contains(key)) out = as_number(obj[key], path + "." + key);
}

CostWeights parse_weights(const json& obj, const std::string& path) {
  CostWeights w;
  if (!obj.is_object()) schema_error("expected an object", path);
  static const std::vector<std::string> known = {"w_ee",     "w_coll",          "w_pref",      "w_poslim",
                                                 "w_kino",   "eps_coll",        "eps_limit",   "q_pref",
                                                 "j_max",    "noise_magnitude", "tukey_scale", "gap_floor"};
  for (const auto& [key, value] : obj.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) schema_error("unknown weight '" + key + "'", path);
  read_number(obj, "w_ee", path, w.w_ee);
  read_number(obj, "w_coll", path, w.w_coll);
  read_number(obj, "w_pref", path, w.w_pref);
  read_number(obj, "w_poslim", path, w.w_poslim);
  read_number(obj, "w_kino", path, w.w_kino);
  read_number(obj, "eps_coll", path, w.eps_coll);
  read_number(obj, "eps_limit", path, w.eps_limit);
  read_number(obj, "j_max", path, w.j_max);
  read_number(obj, "noise_magnitude", path, w.noise_magnitude);
  read_number(obj, "tukey_scale", path, w.tukey_scale);
  read_number(obj, "gap_floor", path, w.gap_floor);
  if (obj.contains("q_pref")) w.q_pref = as_vector(obj["q_pref"], path + ".q_pref");
  return w;
}

PathSpec parse_path(const json& obj, const std::string& path, double default_duration) {
  PathSpec p;
  p.shape = parse_path_shape(as_string(require(obj, "shape", path), path + ".shape"));
  if (obj.contains("plane")) p.plane = parse_path_plane(as_string(obj["plane"], path + ".plane"));
  p.center = as_vec3(require(obj, "center", path), path + ".center");
  p.duration = default_duration;
  read_number(obj, "size", path, p.size);
  read_number(obj, "duration", path, p.duration);
  read_number(obj, "sample_period", path, p.sample_period);
  read_number(obj, "phase", path, p.phase);
  return p;
}

SolverOptions parse_solver(const json& obj, const std::string& path) {
  SolverOptions o;
  if (!obj.is_object()) schema_error("expected an object", path);
  if (obj.contains("max_iterations")) o.max_iterations = static_cast<int>(as_number(obj["max_iterations"], path));
  read_number(obj, "initial_lambda", path, o.initial_lambda);
  read_number(obj, "radius_cap", path, o.radius_cap);
  read_number(obj, "step_tolerance", path, o.step_tolerance);
  read_number(obj, "cost_change_tolerance", path, o.cost_change_tolerance);
  read_number(obj, "gradient_tolerance", path, o.gradient_tolerance);
  read_number(obj, "activation_distance", path, o.proximity.activation_distance);
  read_number(obj, "inflation", path, o.proximity.inflation);
  if (obj.contains("max_pairs")) o.proximity.max_pairs = static_cast<int>(as_number(obj["max_pairs"], path));
  if (obj.contains("step_limit")) {
    const std::string s = as_string(obj["step_limit"], path + ".step_limit");
    if (s == "per_joint") {
      o.step_limit = StepLimit::PerJoint;
    } else if (s == "uniform") {
      o.step_limit = StepLimit::Uniform;
    } else {
      schema_error("step_limit must be 'per_joint' or 'uniform'", path + ".step_limit");
    }
  }
  return o;
}

GoalMode parse_goal_mode(const std::string& s, const std::string& path) {
  if (s == "position") return GoalMode::Position;
  if (s == "orientation") return GoalMode::Orientation;
  if (s == "pose") return GoalMode::Pose;
  schema_error("goal mode must be position, orientation or pose", path);
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  const json doc = parse_json_text(text);
  if (!doc.is_object()) schema_error("top level must be an object", "$");

  ScenarioSpec spec;
  spec.id = parse_scenario_id(as_string(require(doc, "scenario", "$"), "$.scenario"));
  spec.name = doc.contains("name") ? as_string(doc["name"], "$.name") : std::string(to_string(spec.id));
  read_number(doc, "tick_rate", "$", spec.tick_rate);
  read_number(doc, "duration", "$", spec.duration);
  if (doc.contains("trials")) spec.trials = static_cast<int>(as_number(doc["trials"], "$.trials"));
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) schema_error("seed must be a non-negative integer", "$.seed");
    spec.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("expect_no_collisions")) {
    if (!doc["expect_no_collisions"].is_boolean()) schema_error("expected a boolean", "$.expect_no_collisions");
    spec.expect_no_collisions = doc["expect_no_collisions"].get<bool>();
  }
  if (doc.contains("settle_start")) {
    if (!doc["settle_start"].is_boolean()) schema_error("expected a boolean", "$.settle_start");
    spec.settle_start = doc["settle_start"].get<bool>();
  }
  if (doc.contains("solver")) spec.solver = parse_solver(doc["solver"], "$.solver");
  if (doc.contains("verify_substeps"))
    spec.verify_substeps = static_cast<int>(as_number(doc["verify_substeps"], "$.verify_substeps"));

  const json& arms = require(doc, "arms", "$");
  if (!arms.is_array() || arms.empty()) schema_error("expected a non-empty array", "$.arms");
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const std::string path = "$.arms[" + std::to_string(i) + "]";
    const json& a = arms[i];
    ArmConfig arm;
    arm.name = a.contains("name") ? as_string(a["name"], path + ".name") : "arm" + std::to_string(i);
    arm.model_path = resolve(base_dir, as_string(require(a, "model", path), path + ".model"));
    if (!std::filesystem::exists(arm.model_path))
      throw ConfigError("model file not found: " + arm.model_path.string());
    arm.model = std::make_shared<const RobotModel>(load_robot_model(arm.model_path.string()));
    if (a.contains("base")) arm.base = parse_pose(a["base"], path + ".base");
    const std::string role = as_string(require(a, "role", path), path + ".role");
    if (role == "controlled") {
      arm.role = ArmRole::Controlled;
    } else if (role == "external") {
      arm.role = ArmRole::External;
    } else {
      schema_error("role must be 'controlled' or 'external'", path + ".role");
    }
    arm.initial_q = a.contains("initial_q") ? as_vector(a["initial_q"], path + ".initial_q")
                                            : arm.model->center_positions();
    if (arm.controlled()) {
      arm.path = parse_path(require(a, "path", path), path + ".path", spec.duration);
      if (a.contains("goal")) {
        const json& g = a["goal"];
        const std::string gp = path + ".goal";
        if (g.contains("mode")) arm.goal_mode = parse_goal_mode(as_string(g["mode"], gp + ".mode"), gp + ".mode");
        read_number(g, "w_position", gp, arm.w_position);
        read_number(g, "w_orientation", gp, arm.w_orientation);
        if (g.contains("orientation_rpy")) {
          const Eigen::Vector3d rpy = as_vec3(g["orientation_rpy"], gp + ".orientation_rpy");
          arm.goal_orientation = Eigen::Quaterniond(rpy_to_rotation(rpy.x(), rpy.y(), rpy.z()));
        }
      }
      if (arm.goal_mode == GoalMode::Position) arm.w_orientation = 0.0;
      if (arm.goal_mode == GoalMode::Orientation) arm.w_position = 0.0;
      if (a.contains("weights")) arm.weights = parse_weights(a["weights"], path + ".weights");
    } else {
      const auto traj = resolve(base_dir, as_string(require(a, "trajectory", path), path + ".trajectory"));
      if (!std::filesystem::exists(traj)) throw ConfigError("trajectory file not found: " + traj.string());
      arm.trajectory = JointTrajectory::load_csv(traj, arm.model->dof());
    }
    spec.arms.push_back(std::move(arm));
  }
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

std::filesystem::path resolve_config_path(const std::filesystem::path& name) {
  if (std::filesystem::exists(name)) return name;
  if (const char* dir = std::getenv("DAWNIK_DEFAULT_CONFIG_DIR"); dir != nullptr && *dir != '\0') {
    const std::filesystem::path candidate = std::filesystem::path(dir) / name;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return name;
}

}  // namespace dawnik
