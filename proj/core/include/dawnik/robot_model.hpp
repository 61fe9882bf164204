#pragma once

// Robot description parsing, sphere decomposition and the allowed-collision
// matrix.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dawnik/geometry.hpp"

namespace dawnik {

enum class JointKind { Revolute, Fixed };

struct JointLimits {
  double lower = 0.0;         // rad
  double upper = 0.0;         // rad
  double velocity = 0.0;      // rad/s
  double acceleration = 0.0;  // rad/s^2
};

struct JointSpec {
  std::string name;
  JointKind kind = JointKind::Fixed;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  Transform origin;    // from the parent link frame
  JointLimits limits;  // all zero for fixed joints
  int parent_link = -1;
  int child_link = -1;
};

enum class PrimitiveType { Sphere, Capsule, Box };

// Capsule dims: {radius, cylinder length} with the axis along local z.
// Box dims: {x, y, z} full extents. Sphere dims: {radius}.
struct CollisionPrimitive {
  PrimitiveType type = PrimitiveType::Sphere;
  std::vector<double> dims;
  Transform pose;  // in the link frame
};

struct LinkSpec {
  std::string name;
  std::optional<std::string> parent_joint;
  std::vector<CollisionPrimitive> collision;
};

struct CollisionSphere {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // link frame, m
  double radius = 0.0;                               // m
  int id = 0;                                        // unique within the model
};

// Spheres per link, indexed like RobotModel::links().
struct SphereDecomposition {
  std::vector<std::vector<CollisionSphere>> per_link;

  std::size_t total() const;
};

inline constexpr int kDefaultSpheresPerLink = 3;

// Spheres for one primitive, with ids left at zero. Capsules and boxes are
// spanned by evenly spaced centers along their long axis.
std::vector<CollisionSphere> decompose_primitive(const CollisionPrimitive& primitive, int max_per_link);

SphereDecomposition decompose_link_spheres(std::span<const LinkSpec> links, int max_per_link);

class RobotModel {
 public:
  const std::string& name() const { return name_; }
  std::span<const JointSpec> joints() const { return joints_; }
  std::span<const LinkSpec> links() const { return links_; }
  const SphereDecomposition& spheres() const { return spheres_; }
  int spheres_per_link_limit() const { return max_per_link_; }

  // Number of actuated (revolute) joints.
  int dof() const { return static_cast<int>(actuated_.size()); }
  // Joint indices of the actuated joints, in chain order.
  std::span<const int> actuated_joints() const { return actuated_; }
  const JointSpec& actuated_joint(int i) const { return joints_[static_cast<std::size_t>(actuated_[static_cast<std::size_t>(i)])]; }

  int end_effector_link() const { return end_effector_; }
  int link_index(std::string_view name) const;  // -1 when absent
  int parent_link(int link) const;              // -1 for the root

  // Joints in root-to-tip order.
  std::span<const int> chain() const { return chain_; }
  // Actuated variable index of a joint, or -1 for fixed joints.
  int variable_of_joint(int joint) const { return variable_of_joint_[static_cast<std::size_t>(joint)]; }

  bool never_collide(int link_a, int link_b) const;

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;
  // (lower + upper) / 2 per actuated joint.
  Eigen::VectorXd center_positions() const;

  // Same kinematics with a different sphere budget per link.
  RobotModel with_sphere_resolution(int max_per_link) const;

 private:
  friend RobotModel parse_robot_description(std::string_view text, int max_per_link);

  void finalize(int max_per_link);

  std::string name_;
  std::vector<JointSpec> joints_;
  std::vector<LinkSpec> links_;
  std::vector<std::pair<int, int>> never_collide_;
  SphereDecomposition spheres_;
  int max_per_link_ = kDefaultSpheresPerLink;
  int end_effector_ = -1;
  std::vector<int> actuated_;
  std::vector<int> chain_;
  std::vector<int> variable_of_joint_;
  std::vector<int> parent_of_link_;
};

// Parses the JSON robot description. Throws ParseError for syntax or schema
// problems and ModelError for semantic violations.
RobotModel parse_robot_description(std::string_view text, int max_per_link = kDefaultSpheresPerLink);

RobotModel load_robot_model(const std::string& path, int max_per_link = kDefaultSpheresPerLink);

// Symmetric "skip this pair" relation over collision objects. A collision
// object is a link that carries at least one sphere; arm 0 is the
// controlled arm and arms 1.. are external.
class AllowedCollisionMatrix {
 public:
  int object_count() const { return static_cast<int>(objects_.size()); }
  // -1 when the link has no spheres.
  int object_of(int arm, int link) const;
  int arm_of(int object) const { return objects_[static_cast<std::size_t>(object)].arm; }
  int link_of(int object) const { return objects_[static_cast<std::size_t>(object)].link; }

  bool allowed(int object_a, int object_b) const {
    return skip_[static_cast<std::size_t>(object_a) * objects_.size() + static_cast<std::size_t>(object_b)] != 0;
  }
  bool allowed(int arm_a, int link_a, int arm_b, int link_b) const;

  // Number of sphere pairs that are not skipped.
  std::size_t checked_sphere_pairs() const;

 private:
  friend AllowedCollisionMatrix build_acm(const RobotModel& controlled,
                                          std::span<const RobotModel* const> externals);
  friend AllowedCollisionMatrix build_scene_acm(std::span<const RobotModel* const> arms,
                                                const std::vector<bool>& controlled);

  struct Object {
    int arm;
    int link;
    std::size_t spheres;
  };
  void set(int a, int b, bool skip);

  std::vector<Object> objects_;
  std::vector<std::vector<int>> object_index_;  // [arm][link]
  std::vector<unsigned char> skip_;
};

AllowedCollisionMatrix build_acm(const RobotModel& controlled, std::span<const RobotModel* const> externals);

// General form: a pair is checked iff at least one member is on a controlled
// arm and the pair is not an adjacent, never-colliding or same-link pair of a
// single arm. build_acm() is this with only arm 0 controlled.
AllowedCollisionMatrix build_scene_acm(std::span<const RobotModel* const> arms, const std::vector<bool>& controlled);

}  // namespace dawnik
