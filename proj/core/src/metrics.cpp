#include "dawnik/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dawnik/kinematics.hpp"
#include "json_util.hpp"

namespace dawnik {

using namespace detail;

namespace {

struct CheckedPair {
  std::size_t a;
  std::size_t b;
};

// Sphere pairs of the scene that the ACM does not skip, as indices into the
// concatenation of all arms' spheres.
std::vector<CheckedPair> checked_pairs(const SceneGeometry& scene, const std::vector<WorldSpheres>& spheres) {
  std::vector<const WorldSphere*> all;
  for (const auto& arm : spheres)
    for (const auto& s : arm) all.push_back(&s);
  std::vector<CheckedPair> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (!scene.acm.allowed(all[i]->arm, all[i]->link, all[j]->arm, all[j]->link)) out.push_back({i, j});
  return out;
}

std::vector<WorldSpheres> scene_spheres(const SceneGeometry& scene, std::span<const Eigen::VectorXd> q) {
  if (q.size() != scene.models.size()) throw std::invalid_argument("one joint vector per arm expected");
  std::vector<WorldSpheres> out;
  for (std::size_t a = 0; a < q.size(); ++a)
    out.push_back(sphere_world_positions(scene.models[a], q[a], scene.bases[a], static_cast<int>(a)));
  return out;
}

double min_gap_over(const std::vector<WorldSpheres>& spheres, const std::vector<CheckedPair>& pairs) {
  std::vector<const WorldSphere*> all;
  for (const auto& arm : spheres)
    for (const auto& s : arm) all.push_back(&s);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) {
    const WorldSphere& x = *all[p.a];
    const WorldSphere& y = *all[p.b];
    best = std::min(best, sphere_gap(x.center, x.radius, y.center, y.radius));
  }
  return best;
}

}  // namespace

double scene_min_gap(const SceneGeometry& scene, std::span<const Eigen::VectorXd> q) {
  const auto spheres = scene_spheres(scene, q);
  return min_gap_over(spheres, checked_pairs(scene, spheres));
}

VerificationReport verify_collisions_offline(std::span<const RunLog> logs, const SceneGeometry& refined,
                                             int substeps) {
  if (substeps < 1) throw std::invalid_argument("verification needs at least one substep");
  VerificationReport report;
  for (const auto& log : logs) {
    const std::size_t n_arms = log.arms.size();
    if (n_arms != refined.models.size()) throw std::invalid_argument("run log and scene differ in arm count");
    std::vector<Eigen::VectorXd> prev(n_arms), cur(n_arms), q(n_arms);
    for (std::size_t a = 0; a < n_arms; ++a) prev[a] = log.arms[a].q;
    const auto pairs = checked_pairs(refined, scene_spheres(refined, prev));

    std::size_t colliding = 0;
    int first = -1;
    for (std::size_t k = 0; k < log.tick_count(); ++k) {
      for (std::size_t a = 0; a < n_arms; ++a) cur[a] = log.at(k, a).q;
      double tick_min = std::numeric_limits<double>::infinity();
      for (int s = 1; s <= substeps; ++s) {
        const double f = static_cast<double>(s) / substeps;
        for (std::size_t a = 0; a < n_arms; ++a) q[a] = prev[a] + f * (cur[a] - prev[a]);
        tick_min = std::min(tick_min, min_gap_over(scene_spheres(refined, q), pairs));
      }
      report.min_gap = std::min(report.min_gap, tick_min);
      if (tick_min < 0.0) {
        ++colliding;
        if (first < 0) first = static_cast<int>(k);
      }
      prev = cur;
    }
    report.per_trial.push_back(colliding);
    report.first_collision_tick.push_back(first);
    report.collisions += colliding;
  }
  return report;
}

VerificationReport verify_collisions_offline(std::span<const RunLog> logs, const ScenarioSpec& spec, int substeps) {
  int max_per_link = 1;
  for (const auto& arm : spec.arms) max_per_link = std::max(max_per_link, arm.model->spheres_per_link_limit());
  return verify_collisions_offline(logs, scene_geometry(spec, 2 * max_per_link), substeps);
}

// ---------------------------------------------------------------------------

std::vector<ReferenceSchedule> reference_schedules(const ScenarioSpec& spec, const RunLog& log) {
  if (log.arms.size() != spec.arms.size()) throw std::invalid_argument("run log and scenario differ in arm count");
  std::vector<ReferenceSchedule> out;
  for (std::size_t a = 0; a < spec.arms.size(); ++a) {
    if (!spec.arms[a].controlled()) continue;
    out.push_back({static_cast<int>(a), generate_path(spec.arms[a].path), spec.arms[a].path.sample_period,
                   log.arms[a].goal_orientation});
  }
  return out;
}

ErrorStats error_stats(std::span<const Eigen::Vector3d> position_errors_m,
                       std::span<const Eigen::Vector3d> orientation_errors_rad) {
  auto stats = [](std::span<const Eigen::Vector3d> e, double scale, std::array<AxisStats, 3>& out) {
    if (e.empty()) return;
    for (int ax = 0; ax < 3; ++ax) {
      double sum = 0.0;
      for (const auto& v : e) sum += std::abs(v[ax]) * scale;
      const double mean = sum / static_cast<double>(e.size());
      double var = 0.0;
      for (const auto& v : e) {
        const double d = std::abs(v[ax]) * scale - mean;
        var += d * d;
      }
      out[static_cast<std::size_t>(ax)] = {mean, std::sqrt(var / static_cast<double>(e.size()))};
    }
  };
  ErrorStats s;
  stats(position_errors_m, 1e3, s.position_mm);
  stats(orientation_errors_rad, 1e3, s.orientation_mrad);
  s.samples = position_errors_m.size();
  return s;
}

RunMetrics compute_metrics(std::span<const RunLog> logs, std::span<const std::vector<ReferenceSchedule>> references) {
  if (logs.size() != references.size()) throw std::invalid_argument("one reference set per run log expected");
  RunMetrics m;
  m.trials = static_cast<int>(logs.size());
  std::vector<Eigen::Vector3d> all_p, all_o;
  std::vector<std::string> names;
  std::vector<std::vector<Eigen::Vector3d>> arm_p, arm_o;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const RunLog& log = logs[i];
    if (m.scenario.empty()) m.scenario = log.scenario;
    const double dt = 1.0 / log.tick_rate;
    for (std::size_t r = 0; r < references[i].size(); ++r) {
      const ReferenceSchedule& ref = references[i][r];
      if (arm_p.size() <= r) {
        arm_p.emplace_back();
        arm_o.emplace_back();
        names.push_back(log.arms[static_cast<std::size_t>(ref.arm)].name);
      }
      for (std::size_t k = 0; k < log.tick_count(); ++k) {
        const TickRecord& rec = log.at(k, static_cast<std::size_t>(ref.arm));
        if (std::abs(rec.stamp - static_cast<double>(k) * dt) > 1e-9 || rec.tick != static_cast<int>(k))
          throw std::invalid_argument("run log stamp off the tick grid at tick " + std::to_string(k));
        const std::size_t w = waypoint_index(rec.stamp, ref.period, ref.waypoints.size());
        if (w != rec.waypoint)
          throw std::invalid_argument("run log waypoint " + std::to_string(rec.waypoint) + " at tick " +
                                      std::to_string(k) + " differs from the schedule (" + std::to_string(w) + ")");
        const Eigen::Vector3d ep = rec.ee.position - ref.waypoints[w].position;
        const Eigen::Vector3d eo = orientation_error(ref.orientation, rec.ee.orientation);
        arm_p[r].push_back(ep);
        arm_o[r].push_back(eo);
        all_p.push_back(ep);
        all_o.push_back(eo);
      }
    }
  }
  m.combined = error_stats(all_p, all_o);
  for (std::size_t r = 0; r < arm_p.size(); ++r) m.arms.emplace_back(names[r], error_stats(arm_p[r], arm_o[r]));
  return m;
}

RunMetrics evaluate_run(std::span<const RunLog> logs, const ScenarioSpec& spec, std::size_t collisions) {
  std::vector<std::vector<ReferenceSchedule>> refs;
  for (const auto& log : logs) refs.push_back(reference_schedules(spec, log));
  RunMetrics m = compute_metrics(logs, refs);
  m.scenario = spec.name;
  m.collisions = collisions;
  return m;
}

// ---------------------------------------------------------------------------

namespace {

const std::array<const char*, 3> kPositionAxes{"x", "y", "z"};
const std::array<const char*, 3> kOrientationAxes{"roll", "pitch", "yaw"};

json stats_json(const ErrorStats& s) {
  json j;
  j["samples"] = s.samples;
  for (std::size_t i = 0; i < 3; ++i) {
    j["position_mm"][kPositionAxes[i]] = {{"mean", s.position_mm[i].mean}, {"std", s.position_mm[i].std}};
    j["orientation_mrad"][kOrientationAxes[i]] = {{"mean", s.orientation_mrad[i].mean},
                                                   {"std", s.orientation_mrad[i].std}};
  }
  return j;
}

ErrorStats stats_from_json(const json& j, const std::string& path) {
  ErrorStats s;
  s.samples = require(j, "samples", path).get<std::size_t>();
  const json& p = require(j, "position_mm", path);
  const json& o = require(j, "orientation_mrad", path);
  for (std::size_t i = 0; i < 3; ++i) {
    const json& pa = require(p, kPositionAxes[i], path + ".position_mm");
    const json& oa = require(o, kOrientationAxes[i], path + ".orientation_mrad");
    s.position_mm[i] = {as_number(require(pa, "mean", path), path), as_number(require(pa, "std", path), path)};
    s.orientation_mrad[i] = {as_number(require(oa, "mean", path), path), as_number(require(oa, "std", path), path)};
  }
  return s;
}

}  // namespace

std::string metrics_json(const RunMetrics& m) {
  json j;
  j["scenario"] = m.scenario;
  j["trials"] = m.trials;
  j["collisions"] = m.collisions;
  j["combined"] = stats_json(m.combined);
  j["arms"] = json::array();
  for (const auto& [name, s] : m.arms) {
    json a = stats_json(s);
    a["name"] = name;
    j["arms"].push_back(a);
  }
  return j.dump(2) + "\n";
}

RunMetrics parse_metrics_json(const std::string& text) {
  const json j = parse_json_text(text);
  RunMetrics m;
  m.scenario = as_string(require(j, "scenario", "$"), "$.scenario");
  m.trials = static_cast<int>(as_number(require(j, "trials", "$"), "$.trials"));
  m.collisions = require(j, "collisions", "$").get<std::size_t>();
  m.combined = stats_from_json(require(j, "combined", "$"), "$.combined");
  for (const auto& a : require(j, "arms", "$"))
    m.arms.emplace_back(as_string(require(a, "name", "$.arms"), "$.arms"), stats_from_json(a, "$.arms"));
  return m;
}

std::string metrics_csv_header() {
  return "scenario,x_mean,x_std,y_mean,y_std,z_mean,z_std,roll_mean,roll_std,pitch_mean,pitch_std,yaw_mean,"
         "yaw_std,collisions\n";
}

std::string metrics_csv_row(const RunMetrics& m) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed << m.scenario;
  for (const auto& a : m.combined.position_mm) out << ',' << a.mean << ',' << a.std;
  for (const auto& a : m.combined.orientation_mrad) out << ',' << a.mean << ',' << a.std;
  out << ',' << m.collisions << '\n';
  return out.str();
}

}  // namespace dawnik
