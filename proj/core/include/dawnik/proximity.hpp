#pragma once

// Proximity monitoring between the controlled arm's spheres and everything
// else: AABB sweep-and-prune broad phase, closed-form sphere gaps, and
// selection of the pairs that feed the collision cost.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "dawnik/kinematics.hpp"
#include "dawnik/robot_model.hpp"

namespace dawnik {

struct Aabb {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  bool overlaps(const Aabb& o) const {
    return min.x() <= o.max.x() && o.min.x() <= max.x() && min.y() <= o.max.y() && o.min.y() <= max.y() &&
           min.z() <= o.max.z() && o.min.z() <= max.z();
  }
  bool contains(const Eigen::Vector3d& p, double tol = 0.0) const {
    return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
  }
};

// Box of each sphere: center +- (radius + inflation). Throws
// std::invalid_argument for negative inflation.
std::vector<Aabb> compute_aabbs(const WorldSpheres& spheres, double inflation);

// Indices of a candidate pair. `a` indexes the controlled spheres; `b`
// indexes the combined list [controlled..., others...].
struct CandidatePair {
  int a = 0;
  int b = 0;
  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
  friend auto operator<=>(const CandidatePair&, const CandidatePair&) = default;
};

// Pairs whose boxes overlap on all axes and that the ACM does not skip.
// Self pairs (both on the controlled arm) are reported once with a < b.
// Sort-and-sweep along x, then interval tests on y and z. Output is sorted.
std::vector<CandidatePair> broad_phase(const WorldSpheres& controlled, std::span<const Aabb> controlled_boxes,
                                       const WorldSpheres& others, std::span<const Aabb> other_boxes,
                                       const AllowedCollisionMatrix& acm);

struct ActivePair {
  int index_a = 0;  // into the controlled spheres
  int index_b = 0;  // into [controlled..., others...]
  int id_a = 0;
  int id_b = 0;
  int arm_b = 0;
  bool b_on_controlled = false;
  int link_a = 0;
  int link_b = 0;
  Eigen::Vector3d local_a = Eigen::Vector3d::Zero();  // link frame of a
  Eigen::Vector3d local_b = Eigen::Vector3d::Zero();  // link frame of b
  Eigen::Vector3d center_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d center_b = Eigen::Vector3d::Zero();
  double r_a = 0.0;
  double r_b = 0.0;
  double d_ab = 0.0;  // center distance, m
  double gap = 0.0;   // d_ab - r_a - r_b, negative when penetrating
};

inline double sphere_gap(const Eigen::Vector3d& ca, double ra, const Eigen::Vector3d& cb, double rb) {
  return (ca - cb).norm() - (ra + rb);
}

// Exact gaps for the candidates, sorted by ascending gap.
std::vector<ActivePair> narrow_phase(std::span<const CandidatePair> pairs, const WorldSpheres& controlled,
                                     const WorldSpheres& others);

inline constexpr double kDefaultActivationDistance = 0.15;
inline constexpr double kDefaultBroadPhaseInflation = 0.15;
inline constexpr int kDefaultMaxActivePairs = 32;

struct ProximityOptions {
  double activation_distance = kDefaultActivationDistance;  // m
  double inflation = kDefaultBroadPhaseInflation;           // m
  int max_pairs = kDefaultMaxActivePairs;

  // Throws ConfigError when activation exceeds inflation (the broad phase
  // could then miss active pairs) or values are out of range.
  void validate() const;
};

// Pairs with gap <= activation_distance, keeping the max_pairs smallest gaps.
// `inflation` is the broad-phase inflation the pairs came from.
std::vector<ActivePair> select_active_pairs(std::vector<ActivePair> pairs, double activation_distance, int max_pairs,
                                            double inflation = kDefaultBroadPhaseInflation);

// The whole pipeline for one tick.
std::vector<ActivePair> find_active_pairs(const WorldSpheres& controlled, const WorldSpheres& others,
                                          const AllowedCollisionMatrix& acm, const ProximityOptions& options);

}  // namespace dawnik
