#include "dawnik/proximity.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace dawnik {

std::vector<Aabb> compute_aabbs(const WorldSpheres& spheres, double inflation) {
  if (!(inflation >= 0.0)) throw std::invalid_argument("AABB inflation must be >= 0");
  std::vector<Aabb> boxes;
  boxes.reserve(spheres.size());
  for (const auto& s : spheres) {
    const Eigen::Vector3d half = Eigen::Vector3d::Constant(s.radius + inflation);
    boxes.push_back({s.center - half, s.center + half});
  }
  return boxes;
}

std::vector<CandidatePair> broad_phase(const WorldSpheres& controlled, std::span<const Aabb> controlled_boxes,
                                       const WorldSpheres& others, std::span<const Aabb> other_boxes,
                                       const AllowedCollisionMatrix& acm) {
  if (controlled.size() != controlled_boxes.size() || others.size() != other_boxes.size())
    throw std::invalid_argument("broad_phase: sphere and box counts differ");
  const int nc = static_cast<int>(controlled.size());
  const int total = nc + static_cast<int>(others.size());
  auto box = [&](int i) -> const Aabb& {
    return i < nc ? controlled_boxes[static_cast<std::size_t>(i)] : other_boxes[static_cast<std::size_t>(i - nc)];
  };
  auto sphere = [&](int i) -> const WorldSphere& {
    return i < nc ? controlled[static_cast<std::size_t>(i)] : others[static_cast<std::size_t>(i - nc)];
  };

  std::vector<int> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const double bx = box(x).min.x();
    const double by = box(y).min.x();
    return bx < by || (bx == by && x < y);
  });

  std::vector<CandidatePair> out;
  std::vector<int> open;  // indices whose x-interval may still overlap
  for (int idx : order) {
    const Aabb& cur = box(idx);
    std::erase_if(open, [&](int o) { return box(o).max.x() < cur.min.x(); });
    for (int o : open) {
      const bool cur_ctrl = idx < nc;
      const bool o_ctrl = o < nc;
      if (!cur_ctrl && !o_ctrl) continue;
      if (!box(o).overlaps(cur)) continue;
      const WorldSphere& s1 = sphere(idx);
      const WorldSphere& s2 = sphere(o);
      if (acm.allowed(s1.arm, s1.link, s2.arm, s2.link)) continue;
      CandidatePair p;
      if (cur_ctrl && o_ctrl) {
        p = {std::min(idx, o), std::max(idx, o)};
      } else if (cur_ctrl) {
        p = {idx, o};
      } else {
        p = {o, idx};
      }
      out.push_back(p);
    }
    open.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ActivePair> narrow_phase(std::span<const CandidatePair> pairs, const WorldSpheres& controlled,
                                     const WorldSpheres& others) {
  const int nc = static_cast<int>(controlled.size());
  std::vector<ActivePair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const WorldSphere& a = controlled[static_cast<std::size_t>(p.a)];
    const bool b_ctrl = p.b < nc;
    const WorldSphere& b =
        b_ctrl ? controlled[static_cast<std::size_t>(p.b)] : others[static_cast<std::size_t>(p.b - nc)];
    ActivePair ap;
    ap.index_a = p.a;
    ap.index_b = p.b;
    ap.id_a = a.id;
    ap.id_b = b.id;
    ap.arm_b = b.arm;
    ap.b_on_controlled = b_ctrl;
    ap.link_a = a.link;
    ap.link_b = b.link;
    ap.local_a = a.local;
    ap.local_b = b.local;
    ap.center_a = a.center;
    ap.center_b = b.center;
    ap.r_a = a.radius;
    ap.r_b = b.radius;
    ap.d_ab = (a.center - b.center).norm();
    ap.gap = ap.d_ab - (a.radius + b.radius);
    out.push_back(ap);
  }
  std::stable_sort(out.begin(), out.end(), [](const ActivePair& x, const ActivePair& y) { return x.gap < y.gap; });
  return out;
}

void ProximityOptions::validate() const {
  if (!(activation_distance >= 0.0)) throw ConfigError("activation distance must be >= 0");
  if (!(inflation >= 0.0)) throw ConfigError("broad-phase inflation must be >= 0");
  if (activation_distance > inflation)
    throw ConfigError("activation distance exceeds broad-phase inflation; active pairs could be missed");
  if (max_pairs < 1) throw ConfigError("max active pairs must be >= 1");
}

std::vector<ActivePair> select_active_pairs(std::vector<ActivePair> pairs, double activation_distance, int max_pairs,
                                            double inflation) {
  ProximityOptions{activation_distance, inflation, max_pairs}.validate();
  std::erase_if(pairs, [&](const ActivePair& p) { return p.gap > activation_distance; });
  std::stable_sort(pairs.begin(), pairs.end(), [](const ActivePair& x, const ActivePair& y) { return x.gap < y.gap; });
  if (pairs.size() > static_cast<std::size_t>(max_pairs)) pairs.resize(static_cast<std::size_t>(max_pairs));
  return pairs;
}

std::vector<ActivePair> find_active_pairs(const WorldSpheres& controlled, const WorldSpheres& others,
                                          const AllowedCollisionMatrix& acm, const ProximityOptions& options) {
  const auto cboxes = compute_aabbs(controlled, options.inflation);
  const auto oboxes = compute_aabbs(others, options.inflation);
  const auto candidates = broad_phase(controlled, cboxes, others, oboxes, acm);
  return select_active_pairs(narrow_phase(candidates, controlled, others), options.activation_distance,
                             options.max_pairs, options.inflation);
}

}  // namespace dawnik
