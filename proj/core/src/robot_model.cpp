#include "dawnik/robot_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dawnik/errors.hpp"
#include "json_util.hpp"

namespace dawnik {

namespace {

using namespace detail;

CollisionPrimitive parse_primitive(const json& obj, const std::string& path) {
  CollisionPrimitive p;
  const std::string type = as_string(require(obj, "type", path), path + ".type");
  std::size_t expected = 0;
  if (type == "sphere") {
    p.type = PrimitiveType::Sphere;
    expected = 1;
  } else if (type == "capsule") {
    p.type = PrimitiveType::Capsule;
    expected = 2;
  } else if (type == "box") {
    p.type = PrimitiveType::Box;
    expected = 3;
  } else {
    schema_error("unknown collision type '" + type + "'", path + ".type");
  }
  const json& dims = require(obj, "dims", path);
  if (!dims.is_array() || dims.size() != expected)
    schema_error(type + " needs " + std::to_string(expected) + " dims", path + ".dims");
  for (std::size_t i = 0; i < expected; ++i) {
    const double d = as_number(dims[i], path + ".dims[" + std::to_string(i) + "]");
    // A capsule may have zero cylinder length (it is then a sphere).
    const bool may_be_zero = p.type == PrimitiveType::Capsule && i == 1;
    if (!(d > 0.0) && !(may_be_zero && d == 0.0))
      throw ModelError("non-positive collision dimension at " + path + ".dims[" + std::to_string(i) + "]");
    p.dims.push_back(d);
  }
  if (obj.contains("pose")) p.pose = parse_pose(obj["pose"], path + ".pose");
  return p;
}

// Evenly spaced centers at offsets in [-h, h] along `axis`, where the smallest
// count keeping adjacent spacing within `target_spacing` is used, capped at
// max_count.
std::vector<double> even_offsets(double half_length, double target_spacing, int max_count, double* spacing) {
  int count = 1;
  if (half_length > 0.0) count = static_cast<int>(std::ceil(2.0 * half_length / target_spacing - 1e-12)) + 1;
  count = std::clamp(count, 1, max_count);
  std::vector<double> out;
  if (count == 1) {
    out.push_back(0.0);
    *spacing = 2.0 * half_length;
    return out;
  }
  *spacing = 2.0 * half_length / (count - 1);
  for (int i = 0; i < count; ++i) out.push_back(-half_length + i * *spacing);
  return out;
}

}  // namespace

std::size_t SphereDecomposition::total() const {
  std::size_t n = 0;
  for (const auto& link : per_link) n += link.size();
  return n;
}

std::vector<CollisionSphere> decompose_primitive(const CollisionPrimitive& primitive, int max_per_link) {
  max_per_link = std::max(max_per_link, 1);
  std::vector<CollisionSphere> out;
  switch (primitive.type) {
    case PrimitiveType::Sphere:
      out.push_back({primitive.pose.translation, primitive.dims[0], 0});
      break;
    case PrimitiveType::Capsule: {
      const double r = primitive.dims[0];
      const double h = 0.5 * primitive.dims[1];
      double spacing = 0.0;
      const auto offsets = even_offsets(h, r, max_per_link, &spacing);
      // Too few spheres for spacing <= r: inflate so the axis stays covered.
      const double radius = std::max(r, 0.5 * spacing);
      for (double z : offsets)
        out.push_back({primitive.pose.apply(Eigen::Vector3d(0.0, 0.0, z)), radius, 0});
      break;
    }
    case PrimitiveType::Box: {
      std::array<int, 3> order{0, 1, 2};
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return primitive.dims[static_cast<std::size_t>(a)] > primitive.dims[static_cast<std::size_t>(b)];
      });
      const double longest = primitive.dims[static_cast<std::size_t>(order[0])];
      const double second = primitive.dims[static_cast<std::size_t>(order[1])];
      // Circumscribes the square built on the second-longest side.
      const double radius = 0.5 * second * std::sqrt(2.0);
      double spacing = 0.0;
      const auto offsets = even_offsets(0.5 * longest, radius, max_per_link, &spacing);
      for (double s : offsets) {
        Eigen::Vector3d local = Eigen::Vector3d::Zero();
        local[order[0]] = s;
        out.push_back({primitive.pose.apply(local), radius, 0});
      }
      break;
    }
  }
  return out;
}

SphereDecomposition decompose_link_spheres(std::span<const LinkSpec> links, int max_per_link) {
  SphereDecomposition dec;
  dec.per_link.resize(links.size());
  int next_id = 0;
  for (std::size_t l = 0; l < links.size(); ++l) {
    // The budget is per link, shared between its primitives.
    const int primitives = static_cast<int>(links[l].collision.size());
    for (int p = 0; p < primitives; ++p) {
      const int budget = std::max(1, (max_per_link - p + primitives - 1) / primitives);
      for (auto s : decompose_primitive(links[l].collision[static_cast<std::size_t>(p)], budget)) {
        s.id = next_id++;
        dec.per_link[l].push_back(s);
      }
    }
  }
  return dec;
}

int RobotModel::link_index(std::string_view name) const {
  for (std::size_t i = 0; i < links_.size(); ++i)
    if (links_[i].name == name) return static_cast<int>(i);
  return -1;
}

int RobotModel::parent_link(int link) const { return parent_of_link_[static_cast<std::size_t>(link)]; }

bool RobotModel::never_collide(int a, int b) const {
  for (const auto& [x, y] : never_collide_)
    if ((x == a && y == b) || (x == b && y == a)) return true;
  return false;
}

Eigen::VectorXd RobotModel::lower_limits() const {
  Eigen::VectorXd v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = actuated_joint(i).limits.lower;
  return v;
}

Eigen::VectorXd RobotModel::upper_limits() const {
  Eigen::VectorXd v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = actuated_joint(i).limits.upper;
  return v;
}

Eigen::VectorXd RobotModel::center_positions() const { return 0.5 * (lower_limits() + upper_limits()); }

RobotModel RobotModel::with_sphere_resolution(int max_per_link) const {
  RobotModel copy = *this;
  copy.max_per_link_ = max_per_link;
  copy.spheres_ = decompose_link_spheres(copy.links_, max_per_link);
  return copy;
}

void RobotModel::finalize(int max_per_link) {
  max_per_link_ = max_per_link;
  spheres_ = decompose_link_spheres(links_, max_per_link);
  variable_of_joint_.assign(joints_.size(), -1);
  actuated_.clear();
  for (int j : chain_) {
    if (joints_[static_cast<std::size_t>(j)].kind == JointKind::Revolute) {
      variable_of_joint_[static_cast<std::size_t>(j)] = static_cast<int>(actuated_.size());
      actuated_.push_back(j);
    }
  }
}

RobotModel parse_robot_description(std::string_view text, int max_per_link) {
  if (max_per_link < 1) throw ModelError("max spheres per link must be >= 1");
  const json doc = parse_json_text(text);
  if (!doc.is_object()) schema_error("top level must be an object", "$");

  RobotModel model;
  model.name_ = as_string(require(doc, "name", "$"), "$.name");

  const json& joints = require(doc, "joints", "$");
  if (!joints.is_array()) schema_error("expected an array", "$.joints");
  std::map<std::string, int> joint_by_name;
  std::vector<std::optional<std::string>> declared_parent;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string path = "$.joints[" + std::to_string(i) + "]";
    const json& j = joints[i];
    JointSpec spec;
    spec.name = as_string(require(j, "name", path), path + ".name");
    const std::string kind = as_string(require(j, "kind", path), path + ".kind");
    if (kind == "revolute") {
      spec.kind = JointKind::Revolute;
    } else if (kind == "fixed") {
      spec.kind = JointKind::Fixed;
    } else {
      schema_error("joint kind must be 'revolute' or 'fixed'", path + ".kind");
    }
    if (j.contains("origin")) spec.origin = parse_pose(j["origin"], path + ".origin");
    if (spec.kind == JointKind::Revolute) {
      const Eigen::Vector3d axis = as_vec3(require(j, "axis", path), path + ".axis");
      if (axis.norm() < 1e-12) throw ModelError("zero-norm axis on joint '" + spec.name + "'");
      spec.axis = axis.normalized();
      const json& limits = require(j, "limits", path);
      const json& pos = require(limits, "pos", path + ".limits");
      if (!pos.is_array() || pos.size() != 2) schema_error("expected [lower, upper]", path + ".limits.pos");
      spec.limits.lower = as_number(pos[0], path + ".limits.pos[0]");
      spec.limits.upper = as_number(pos[1], path + ".limits.pos[1]");
      spec.limits.velocity = as_number(require(limits, "vel", path + ".limits"), path + ".limits.vel");
      spec.limits.acceleration = as_number(require(limits, "acc", path + ".limits"), path + ".limits.acc");
      if (!(spec.limits.lower < spec.limits.upper))
        throw ModelError("degenerate limits on joint '" + spec.name + "': lower must be < upper");
      if (!(spec.limits.velocity > 0.0) || !(spec.limits.acceleration > 0.0))
        throw ModelError("velocity and acceleration limits must be positive on joint '" + spec.name + "'");
    } else {
      if (j.contains("limits")) throw ModelError("fixed joint '" + spec.name + "' must not carry limits");
      if (j.contains("axis")) spec.axis = as_vec3(j["axis"], path + ".axis");
    }
    if (j.contains("parent")) {
      declared_parent.emplace_back(as_string(j["parent"], path + ".parent"));
    } else {
      declared_parent.emplace_back(std::nullopt);
    }
    if (!joint_by_name.emplace(spec.name, static_cast<int>(i)).second)
      throw ModelError("duplicate joint name '" + spec.name + "'");
    model.joints_.push_back(std::move(spec));
  }

  const json& links = require(doc, "links", "$");
  if (!links.is_array() || links.empty()) schema_error("expected a non-empty array", "$.links");
  std::map<std::string, int> link_by_name;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string path = "$.links[" + std::to_string(i) + "]";
    const json& l = links[i];
    LinkSpec spec;
    spec.name = as_string(require(l, "name", path), path + ".name");
    if (l.contains("parent_joint") && !l["parent_joint"].is_null())
      spec.parent_joint = as_string(l["parent_joint"], path + ".parent_joint");
    if (l.contains("collision")) {
      const json& col = l["collision"];
      if (!col.is_array()) schema_error("expected an array", path + ".collision");
      for (std::size_t c = 0; c < col.size(); ++c)
        spec.collision.push_back(parse_primitive(col[c], path + ".collision[" + std::to_string(c) + "]"));
    }
    if (!link_by_name.emplace(spec.name, static_cast<int>(i)).second)
      throw ModelError("duplicate link name '" + spec.name + "'");
    model.links_.push_back(std::move(spec));
  }

  // Child links from parent_joint.
  int root = -1;
  for (std::size_t i = 0; i < model.links_.size(); ++i) {
    const auto& link = model.links_[i];
    if (!link.parent_joint) {
      if (root >= 0) throw ModelError("more than one root link ('" + model.links_[static_cast<std::size_t>(root)].name + "', '" + link.name + "')");
      root = static_cast<int>(i);
      continue;
    }
    auto it = joint_by_name.find(*link.parent_joint);
    if (it == joint_by_name.end())
      throw ModelError("link '" + link.name + "' names unknown parent joint '" + *link.parent_joint + "'");
    auto& joint = model.joints_[static_cast<std::size_t>(it->second)];
    if (joint.child_link >= 0) throw ModelError("joint '" + joint.name + "' has more than one child link");
    joint.child_link = static_cast<int>(i);
  }
  if (root < 0) throw ModelError("cycle in link graph: no root link");
  for (const auto& joint : model.joints_)
    if (joint.child_link < 0) throw ModelError("joint '" + joint.name + "' has no child link");

  // Parent links: explicit, or implied by declaration order along the chain.
  int previous_child = root;
  for (std::size_t i = 0; i < model.joints_.size(); ++i) {
    auto& joint = model.joints_[i];
    if (declared_parent[i]) {
      auto it = link_by_name.find(*declared_parent[i]);
      if (it == link_by_name.end())
        throw ModelError("joint '" + joint.name + "' names unknown parent link '" + *declared_parent[i] + "'");
      joint.parent_link = it->second;
    } else {
      joint.parent_link = previous_child;
    }
    if (joint.parent_link == joint.child_link) throw ModelError("cycle in link graph at joint '" + joint.name + "'");
    previous_child = joint.child_link;
  }

  model.parent_of_link_.assign(model.links_.size(), -1);
  std::vector<int> child_joint_of_link(model.links_.size(), -1);
  for (std::size_t j = 0; j < model.joints_.size(); ++j) {
    const auto& joint = model.joints_[j];
    model.parent_of_link_[static_cast<std::size_t>(joint.child_link)] = joint.parent_link;
    int& slot = child_joint_of_link[static_cast<std::size_t>(joint.parent_link)];
    if (slot >= 0) throw ModelError("link '" + model.links_[static_cast<std::size_t>(joint.parent_link)].name + "' branches; only serial chains are supported");
    slot = static_cast<int>(j);
  }

  // Walk root to tip; anything not reached sits on a cycle.
  std::vector<bool> visited(model.links_.size(), false);
  int link = root;
  visited[static_cast<std::size_t>(root)] = true;
  while (child_joint_of_link[static_cast<std::size_t>(link)] >= 0) {
    const int j = child_joint_of_link[static_cast<std::size_t>(link)];
    model.chain_.push_back(j);
    link = model.joints_[static_cast<std::size_t>(j)].child_link;
    if (visited[static_cast<std::size_t>(link)]) throw ModelError("cycle in link graph");
    visited[static_cast<std::size_t>(link)] = true;
  }
  for (std::size_t i = 0; i < visited.size(); ++i)
    if (!visited[i]) throw ModelError("cycle in link graph: link '" + model.links_[i].name + "' is unreachable from the root");

  const std::string ee = as_string(require(doc, "end_effector", "$"), "$.end_effector");
  auto ee_it = link_by_name.find(ee);
  if (ee_it == link_by_name.end()) throw ModelError("end effector names unknown link '" + ee + "'");
  model.end_effector_ = ee_it->second;

  if (doc.contains("never_collide")) {
    const json& pairs = doc["never_collide"];
    if (!pairs.is_array()) schema_error("expected an array of link-name pairs", "$.never_collide");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string path = "$.never_collide[" + std::to_string(i) + "]";
      if (!pairs[i].is_array() || pairs[i].size() != 2) schema_error("expected a pair of link names", path);
      const std::string a = as_string(pairs[i][0], path + "[0]");
      const std::string b = as_string(pairs[i][1], path + "[1]");
      auto ia = link_by_name.find(a);
      auto ib = link_by_name.find(b);
      if (ia == link_by_name.end() || ib == link_by_name.end())
        throw ModelError("never_collide names an unknown link at " + path);
      model.never_collide_.emplace_back(ia->second, ib->second);
    }
  }

  model.finalize(max_per_link);
  return model;
}

RobotModel load_robot_model(const std::string& path, int max_per_link) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open robot description '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_robot_description(buf.str(), max_per_link);
}

// ---------------------------------------------------------------------------
// Allowed-collision matrix

int AllowedCollisionMatrix::object_of(int arm, int link) const {
  if (arm < 0 || static_cast<std::size_t>(arm) >= object_index_.size()) return -1;
  const auto& links = object_index_[static_cast<std::size_t>(arm)];
  if (link < 0 || static_cast<std::size_t>(link) >= links.size()) return -1;
  return links[static_cast<std::size_t>(link)];
}

bool AllowedCollisionMatrix::allowed(int arm_a, int link_a, int arm_b, int link_b) const {
  const int a = object_of(arm_a, link_a);
  const int b = object_of(arm_b, link_b);
  if (a < 0 || b < 0) return true;  // no geometry, nothing to check
  return allowed(a, b);
}

void AllowedCollisionMatrix::set(int a, int b, bool skip) {
  const std::size_t n = objects_.size();
  skip_[static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)] = skip ? 1 : 0;
  skip_[static_cast<std::size_t>(b) * n + static_cast<std::size_t>(a)] = skip ? 1 : 0;
}

std::size_t AllowedCollisionMatrix::checked_sphere_pairs() const {
  std::size_t count = 0;
  for (std::size_t a = 0; a < objects_.size(); ++a)
    for (std::size_t b = a + 1; b < objects_.size(); ++b)
      if (!allowed(static_cast<int>(a), static_cast<int>(b))) count += objects_[a].spheres * objects_[b].spheres;
  return count;
}

AllowedCollisionMatrix build_scene_acm(std::span<const RobotModel* const> arms, const std::vector<bool>& controlled) {
  AllowedCollisionMatrix acm;
  acm.object_index_.resize(arms.size());
  for (std::size_t arm = 0; arm < arms.size(); ++arm) {
    const auto& model = *arms[arm];
    acm.object_index_[arm].assign(model.links().size(), -1);
    for (std::size_t l = 0; l < model.links().size(); ++l) {
      const std::size_t count = model.spheres().per_link[l].size();
      if (count == 0) continue;
      acm.object_index_[arm][l] = static_cast<int>(acm.objects_.size());
      acm.objects_.push_back({static_cast<int>(arm), static_cast<int>(l), count});
    }
  }
  const std::size_t n = acm.objects_.size();
  acm.skip_.assign(n * n, 0);

  // Nearest ancestor with geometry: links without spheres do not separate
  // their neighbours.
  auto geometric_parent = [&](int arm, int link) {
    const auto& model = *arms[static_cast<std::size_t>(arm)];
    int p = model.parent_link(link);
    while (p >= 0 && acm.object_of(arm, p) < 0) p = model.parent_link(p);
    return p;
  };

  for (std::size_t a = 0; a < n; ++a) {
    acm.set(static_cast<int>(a), static_cast<int>(a), true);
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto& oa = acm.objects_[a];
      const auto& ob = acm.objects_[b];
      const bool ca = controlled[static_cast<std::size_t>(oa.arm)];
      const bool cb = controlled[static_cast<std::size_t>(ob.arm)];
      bool skip = false;
      if (!ca && !cb) {
        skip = true;
      } else if (oa.arm == ob.arm) {
        const auto& model = *arms[static_cast<std::size_t>(oa.arm)];
        const bool adjacent = geometric_parent(oa.arm, oa.link) == ob.link || geometric_parent(ob.arm, ob.link) == oa.link;
        skip = adjacent || model.never_collide(oa.link, ob.link);
      }
      acm.set(static_cast<int>(a), static_cast<int>(b), skip);
    }
  }
  return acm;
}

AllowedCollisionMatrix build_acm(const RobotModel& controlled, std::span<const RobotModel* const> externals) {
  std::vector<const RobotModel*> arms{&controlled};
  arms.insert(arms.end(), externals.begin(), externals.end());
  std::vector<bool> flags(arms.size(), false);
  flags[0] = true;
  return build_scene_acm(arms, flags);
}

}  // namespace dawnik
