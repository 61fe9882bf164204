#include "dawnik/paths.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dawnik/errors.hpp"

namespace dawnik {

PathShape parse_path_shape(std::string_view s) {
  if (s == "square") return PathShape::Square;
  if (s == "circle") return PathShape::Circle;
  if (s == "eight") return PathShape::Eight;
  if (s == "hold") return PathShape::Hold;
  throw ConfigError("unknown path shape '" + std::string(s) + "'");
}

PathPlane parse_path_plane(std::string_view s) {
  if (s == "XY" || s == "xy") return PathPlane::XY;
  if (s == "YZ" || s == "yz") return PathPlane::YZ;
  throw ConfigError("unknown path plane '" + std::string(s) + "'");
}

const char* to_string(PathShape s) {
  switch (s) {
    case PathShape::Square:
      return "square";
    case PathShape::Circle:
      return "circle";
    case PathShape::Eight:
      return "eight";
    case PathShape::Hold:
      return "hold";
  }
  return "unknown";
}

const char* to_string(PathPlane p) { return p == PathPlane::XY ? "XY" : "YZ"; }

void PathSpec::validate() const {
  if (!(sample_period > 0.0)) throw ConfigError("path sample_period must be > 0");
  if (!(size > 0.0)) throw ConfigError("path size must be > 0");
  if (!(duration >= sample_period)) throw ConfigError("path duration must cover at least one sample");
  if (!center.allFinite()) throw ConfigError("path center must be finite");
  if (!(phase >= 0.0 && phase < 1.0)) throw ConfigError("path phase must lie in [0, 1)");
}

namespace {

Eigen::Vector3d embed(const PathSpec& spec, double a, double b) {
  Eigen::Vector3d p = spec.center;
  if (spec.plane == PathPlane::XY) {
    p.x() += a;
    p.y() += b;
  } else {
    p.y() += a;
    p.z() += b;
  }
  return p;
}

}  // namespace

Eigen::Vector3d path_point(const PathSpec& spec, double u) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  u -= std::floor(u);
  const double s = spec.size;
  switch (spec.shape) {
    case PathShape::Hold:
      return spec.center;
    case PathShape::Circle:
      return embed(spec, s * std::cos(two_pi * u), s * std::sin(two_pi * u));
    case PathShape::Square: {
      const double h = s / 2.0;
      const double along = 4.0 * u;
      const int edge = std::min(3, static_cast<int>(along));
      const double f = (along - edge) * s;
      switch (edge) {
        case 0:
          return embed(spec, -h + f, -h);
        case 1:
          return embed(spec, h, -h + f);
        case 2:
          return embed(spec, h - f, h);
        default:
          return embed(spec, -h, h - f);
      }
    }
    case PathShape::Eight: {
      if (u < 0.5) {
        const double th = two_pi * (2.0 * u);
        return embed(spec, s - s * std::cos(th), -s * std::sin(th));
      }
      const double th = two_pi * (2.0 * u - 1.0);
      return embed(spec, -s + s * std::cos(th), -s * std::sin(th));
    }
  }
  return spec.center;
}

std::vector<Waypoint> generate_path(const PathSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(std::llround(spec.duration / spec.sample_period));
  std::vector<Waypoint> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(n) + spec.phase;
    out.push_back({static_cast<double>(k) * spec.sample_period, path_point(spec, u)});
  }
  return out;
}

std::size_t waypoint_index(double t, double period, std::size_t count) {
  if (count == 0) throw std::invalid_argument("waypoint_index on an empty path");
  const double k = std::floor(t / period + 1e-9);
  if (k <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(k), count - 1);
}

std::size_t tick_count(double tick_rate, double duration) {
  return static_cast<std::size_t>(std::ceil(tick_rate * duration - 1e-9));
}

}  // namespace dawnik
