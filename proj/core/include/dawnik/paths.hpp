#pragma once

// Reference end-effector paths sampled on a fixed schedule.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace dawnik {

enum class PathShape { Square, Circle, Eight, Hold };
enum class PathPlane { XY, YZ };

PathShape parse_path_shape(std::string_view s);
PathPlane parse_path_plane(std::string_view s);
const char* to_string(PathShape s);
const char* to_string(PathPlane p);

inline constexpr double kDefaultSamplePeriod = 0.03;  // s

struct PathSpec {
  PathShape shape = PathShape::Hold;
  PathPlane plane = PathPlane::XY;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double size = 0.1;  // square width, circle radius or eight loop radius, m
  double duration = 12.0;
  double sample_period = kDefaultSamplePeriod;
  double phase = 0.0;  // fraction of a lap to start at, [0, 1)

  // Throws ConfigError.
  void validate() const;
};

struct Waypoint {
  double stamp = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

// Point at lap fraction u (wrapped into [0, 1)).
//   square: corner (-w/2, -w/2) first, edges counter-clockwise, unit speed
//   circle: angle 2 pi u from the first plane axis
//   eight:  first half loops around center + (size, 0), second half around
//           center - (size, 0), both tangent at the center
Eigen::Vector3d path_point(const PathSpec& spec, double u);

// round(duration / sample_period) waypoints at u = k / N + phase, so the lap
// closes: the successor of the last waypoint is the first.
std::vector<Waypoint> generate_path(const PathSpec& spec);

// Waypoint in force at time t: floor(t / period), clamped to count - 1.
std::size_t waypoint_index(double t, double period, std::size_t count);

// ceil(tick_rate * duration), tolerant of rounding in the product.
std::size_t tick_count(double tick_rate, double duration);

}  // namespace dawnik
