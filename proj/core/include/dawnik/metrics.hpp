#pragma once

// Offline collision verification and tracking-error statistics over run logs.

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dawnik/paths.hpp"
#include "dawnik/scenario.hpp"
#include "dawnik/simulation.hpp"

namespace dawnik {

struct VerificationReport {
  std::size_t collisions = 0;                 // colliding ticks over all trials
  std::vector<std::size_t> per_trial;         // colliding ticks per trial
  std::vector<int> first_collision_tick;      // -1 when the trial is clean
  double min_gap = std::numeric_limits<double>::infinity();  // smallest checked gap, m
};

// Collision check of one configuration set. `q` holds one joint vector per
// arm of `scene`. Returns the smallest gap over all checked sphere pairs.
double scene_min_gap(const SceneGeometry& scene, std::span<const Eigen::VectorXd> q);

// Rebuilds every arm with twice the solver's spheres per link and counts the
// ticks where some checked pair has a negative gap, testing `substeps`
// configurations interpolated between consecutive ticks.
VerificationReport verify_collisions_offline(std::span<const RunLog> logs, const ScenarioSpec& spec, int substeps);
VerificationReport verify_collisions_offline(std::span<const RunLog> logs, const SceneGeometry& refined,
                                             int substeps);

struct AxisStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct ErrorStats {
  std::array<AxisStats, 3> position_mm;      // x, y, z
  std::array<AxisStats, 3> orientation_mrad;  // roll, pitch, yaw (rotation-vector components)
  std::size_t samples = 0;

  double mean_position_mm() const {
    return (position_mm[0].mean + position_mm[1].mean + position_mm[2].mean) / 3.0;
  }
  double mean_orientation_mrad() const {
    return (orientation_mrad[0].mean + orientation_mrad[1].mean + orientation_mrad[2].mean) / 3.0;
  }
};

// Reference schedule of one controlled arm.
struct ReferenceSchedule {
  int arm = 0;
  std::vector<Waypoint> waypoints;
  double period = kDefaultSamplePeriod;
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

std::vector<ReferenceSchedule> reference_schedules(const ScenarioSpec& spec, const RunLog& log);

struct RunMetrics {
  std::string scenario;
  int trials = 0;
  std::size_t collisions = 0;
  ErrorStats combined;  // all controlled arms
  std::vector<std::pair<std::string, ErrorStats>> arms;
};

// Absolute per-axis errors of every controlled-arm tick against the reference
// in force at its stamp. `references[i]` belongs to `logs[i]`. Throws
// std::invalid_argument when a record's stamp is off the tick grid or names a
// different waypoint than the schedule.
RunMetrics compute_metrics(std::span<const RunLog> logs, std::span<const std::vector<ReferenceSchedule>> references);

// Convenience: schedules from `spec`, metrics and collision count.
RunMetrics evaluate_run(std::span<const RunLog> logs, const ScenarioSpec& spec, std::size_t collisions);

ErrorStats error_stats(std::span<const Eigen::Vector3d> position_errors_m,
                       std::span<const Eigen::Vector3d> orientation_errors_rad);

std::string metrics_json(const RunMetrics& m);
std::string metrics_csv_header();
std::string metrics_csv_row(const RunMetrics& m);
// Parses metrics_json output.
RunMetrics parse_metrics_json(const std::string& text);

}  // namespace dawnik
