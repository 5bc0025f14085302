#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "graspgen/errors.hpp"
#include "graspgen/geometry.hpp"
#include "graspgen/spatial_grid.hpp"

namespace graspgen {

/// Parallel-jaw geometry, SI units throughout.
///
/// In the grasp frame (approach a, closing c, minor m) centred on the grasp
/// point, the hand is three boxes open at max_width:
///   closing region  |a| <= L/2,  |c| <= W/2,           |m| <= H/2
///   left finger     |a| <= L/2,  -W/2-T <= c < -W/2,   |m| <= H/2
///   right finger    |a| <= L/2,  W/2 < c <= W/2+T,     |m| <= H/2
///   palm            -L/2-T <= a < -L/2, |c| <= W/2+T,  |m| <= H/2
/// with L = finger_length, W = max_width, T = finger_thickness and
/// H = finger_height. The gripper advances along +a, so the palm sits
/// finger_length/2 behind the grasp point.
struct GripperConfig {
  double max_width = 0.08;
  double finger_length = 0.06;
  double finger_thickness = 0.01;
  double finger_height = 0.02;
  double max_contact_force = 25.0;  // N
  double friction_mu = 0.5;
  double close_speed = 0.05;  // m/s, ordering only

  void validate() const {
    if (!(max_width > 0 && finger_length > 0 && finger_thickness > 0 && finger_height > 0))
      throw ConfigError("gripper lengths must be positive");
    if (!(max_contact_force > 0)) throw ConfigError("max_contact_force must be positive");
    if (!(friction_mu > 0 && friction_mu < 2)) throw ConfigError("friction_mu must be in (0, 2)");
    if (!(close_speed > 0)) throw ConfigError("close_speed must be positive");
  }
};

enum class Provenance : std::uint8_t { orientation_sampled = 0, antipodal_baseline = 1 };

inline const char* to_string(Provenance p) {
  return p == Provenance::orientation_sampled ? "orientation_sampled" : "antipodal_baseline";
}

/// Grasp G = [p, r]: rotation columns are (approach, closing, minor).
struct GraspPose {
  Vec3 point = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Provenance provenance = Provenance::orientation_sampled;

  Vec3 approach() const { return rotation.col(0); }
  Vec3 closing() const { return rotation.col(1); }
  Vec3 minor() const { return rotation.col(2); }

  bool is_valid(double tol = 1e-9) const {
    return Pose{rotation, point}.is_valid(tol);
  }
};

/// Coordinates of x along the columns of r. Written out by hand so every
/// caller (including the generator's batched path) rounds identically.
inline Vec3 project(const Mat3& r, const Vec3& x) {
  return {r(0, 0) * x.x() + r(1, 0) * x.y() + r(2, 0) * x.z(),
          r(0, 1) * x.x() + r(1, 1) * x.y() + r(2, 1) * x.z(),
          r(0, 2) * x.x() + r(1, 2) * x.y() + r(2, 2) * x.z()};
}

/// Grasp-frame coordinates (a, c, m) of a world point.
inline Vec3 to_grasp_frame(const GraspPose& pose, const Vec3& x) {
  return project(pose.rotation, x) - project(pose.rotation, pose.point);
}

enum class Zone : std::uint8_t { outside, closing, left_finger, right_finger, palm };

/// Which part of the open hand a grasp-frame point falls in.
inline Zone classify(const Vec3& local, const GripperConfig& g) {
  const double a = local.x(), c = local.y(), m = local.z();
  const double hl = g.finger_length / 2, hw = g.max_width / 2, hh = g.finger_height / 2;
  const double t = g.finger_thickness;
  if (m < -hh || m > hh) return Zone::outside;
  if (a >= -hl && a <= hl) {
    if (c >= -hw && c <= hw) return Zone::closing;
    if (c >= -hw - t && c < -hw) return Zone::left_finger;
    if (c > hw && c <= hw + t) return Zone::right_finger;
    return Zone::outside;
  }
  if (a >= -hl - t && a < -hl && c >= -hw - t && c <= hw + t) return Zone::palm;
  return Zone::outside;
}

inline bool is_collision_zone(Zone z) {
  return z == Zone::left_finger || z == Zone::right_finger || z == Zone::palm;
}

/// World-space box enclosing the whole open hand.
inline Aabb hand_bounds(const GraspPose& pose, const GripperConfig& g) {
  const double hl = g.finger_length / 2, hw = g.max_width / 2, hh = g.finger_height / 2;
  const double t = g.finger_thickness;
  Aabb box;
  for (double a : {-hl - t, hl})
    for (double c : {-hw - t, hw + t})
      for (double m : {-hh, hh})
        box.extend(pose.point + pose.rotation * Vec3(a, c, m));
  return box;
}

namespace detail {

template <class F>
void for_each_near_hand(const GraspPose& pose, const PointCloud& cloud, const GripperConfig& g,
                        const PointGrid* grid, F&& f) {
  if (grid == nullptr) {
    for (std::uint32_t i = 0; i < cloud.size(); ++i)
      if (!f(i)) return;
    return;
  }
  const Aabb box = hand_bounds(pose, g);
  constexpr double pad = 1e-9;
  grid->for_each_in_box(box.lo - Vec3::Constant(pad), box.hi + Vec3::Constant(pad), f);
}

}  // namespace detail

/// True iff some cloud point lies inside a finger or the palm. Passing a
/// grid built over cloud.points restricts the scan to nearby cells.
inline bool check_collision(const GraspPose& pose, const PointCloud& cloud,
                            const GripperConfig& g, const PointGrid* grid = nullptr) {
  bool hit = false;
  detail::for_each_near_hand(pose, cloud, g, grid, [&](std::uint32_t i) {
    hit = is_collision_zone(classify(to_grasp_frame(pose, cloud.points[i]), g));
    return !hit;
  });
  return hit;
}

/// Cloud points between the jaws, split by the sign of their closing-axis
/// coordinate: left is c < 0, right is c >= 0.
struct ClosingRegion {
  std::vector<std::uint32_t> indices;  // ascending
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;
  GraspPose frame;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

/// Throws EmptyRegion when no point lies between the jaws. Collision is the
/// caller's concern.
inline ClosingRegion extract_closing_region(const GraspPose& pose, const PointCloud& cloud,
                                            const GripperConfig& g,
                                            const PointGrid* grid = nullptr) {
  ClosingRegion region;
  region.frame = pose;
  detail::for_each_near_hand(pose, cloud, g, grid, [&](std::uint32_t i) {
    if (classify(to_grasp_frame(pose, cloud.points[i]), g) == Zone::closing)
      region.indices.push_back(i);
    return true;
  });
  if (region.indices.empty()) throw EmptyRegion("no points between the jaws");
  std::sort(region.indices.begin(), region.indices.end());
  for (auto i : region.indices)
    (to_grasp_frame(pose, cloud.points[i]).y() < 0.0 ? region.left : region.right).push_back(i);
  return region;
}

struct Contact {
  std::uint32_t index = 0;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
};

/// First points met by each jaw while closing, with their gaps to the jaws.
struct ContactPair {
  Contact left;
  Contact right;
  double d1 = 0.0;  // left jaw inner face to left contact, along closing axis
  double d2 = 0.0;  // right jaw inner face to right contact
};

inline ContactPair contact_points(const GraspPose& pose, const ClosingRegion& region,
                                  const PointCloud& cloud, const GripperConfig& g) {
  if (region.left.empty() || region.right.empty())
    throw OneSidedContact(region.left.empty() ? "nothing left of the grasp point"
                                              : "nothing right of the grasp point");
  const double hw = g.max_width / 2;
  ContactPair out;
  double best_left = std::numeric_limits<double>::infinity();
  for (auto i : region.left) {
    const double c = to_grasp_frame(pose, cloud.points[i]).y();
    if (c < best_left) {  // indices ascend, so ties keep the lowest
      best_left = c;
      out.left.index = i;
    }
  }
  double best_right = -std::numeric_limits<double>::infinity();
  for (auto i : region.right) {
    const double c = to_grasp_frame(pose, cloud.points[i]).y();
    if (c > best_right) {
      best_right = c;
      out.right.index = i;
    }
  }
  out.left.point = cloud.points[out.left.index];
  out.left.normal = cloud.normals[out.left.index];
  out.right.point = cloud.points[out.right.index];
  out.right.normal = cloud.normals[out.right.index];
  out.d1 = best_left + hw;
  out.d2 = hw - best_right;
  return out;
}

}  // namespace graspgen
