#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "graspgen/errors.hpp"
#include "graspgen/gripper.hpp"
#include "graspgen/histogram.hpp"
#include "graspgen/record.hpp"
#include "graspgen/spatial_grid.hpp"

namespace graspgen {

/// Householder reflection I - 2 u u^T.
struct MirrorOperator {
  Vec3 u = Vec3::UnitZ();
  Mat3 matrix = Mat3::Identity();

  static MirrorOperator make(const Vec3& unit) {
    MirrorOperator m;
    m.u = unit;
    m.matrix = Mat3::Identity() - 2.0 * unit * unit.transpose();
    return m;
  }

  Vec3 apply(const Vec3& v) const { return matrix * v; }
};

/// Grasp-frame (a, c, m) to mirror-frame (a, m, c): the closing axis becomes z.
inline Vec3 to_mirror_frame(const Vec3& local) { return {local.x(), local.z(), local.y()}; }

struct StabilityOptions {
  double displacement_threshold = 0.0;  // m; 0 selects max_width / 8
  double symmetry_tol = 0.0;            // m; 0 selects max_width / 20
  double patch_radius = 0.0;            // m; 0 selects finger_height / 4
  double gravity = 9.81;                // m/s^2

  /// Two-sided contacts keep |d1 - d2| below max_width / 2, so the
  /// displacement never reaches max_width / 4. The default max_width / 8
  /// removes grasps whose gaps differ by more than a quarter of the width.
  double threshold(const GripperConfig& g) const {
    return displacement_threshold > 0.0 ? displacement_threshold : g.max_width / 8.0;
  }
  double tolerance(const GripperConfig& g) const {
    return symmetry_tol > 0.0 ? symmetry_tol : g.max_width / 20.0;
  }
  double patch(const GripperConfig& g) const {
    return patch_radius > 0.0 ? patch_radius : g.finger_height / 4.0;
  }
};

/// Mean distance from each reflected left-half point to its nearest
/// right-half point (one-directional Chamfer), in metres.
inline double mirror_chamfer(const std::vector<Vec3>& left, const std::vector<Vec3>& right) {
  if (left.empty() || right.empty()) throw OneSidedContact("mirror test needs both halves");
  const auto mirror = MirrorOperator::make(Vec3::UnitZ());
  Aabb box;
  for (const auto& p : right) box.extend(p);
  const Vec3 ext = box.hi - box.lo;
  const double area = ext.x() * ext.y() + ext.y() * ext.z() + ext.z() * ext.x();
  const DenseGrid grid(right, 2.0 * std::sqrt(area / static_cast<double>(right.size())));
  double sum = 0.0;
  for (const auto& p : left) sum += grid.nearest_distance(mirror.apply(p));
  return sum / static_cast<double>(left.size());
}

inline bool symmetry_test(const ClosingRegion& region, const PointCloud& cloud, double tol) {
  std::vector<Vec3> left, right;
  for (auto i : region.left) left.push_back(to_mirror_frame(to_grasp_frame(region.frame, cloud.points[i])));
  for (auto i : region.right) right.push_back(to_mirror_frame(to_grasp_frame(region.frame, cloud.points[i])));
  return mirror_chamfer(left, right) <= tol;
}

struct StabilityVerdict {
  bool symmetric = false;
  double d1 = 0.0;
  double d2 = 0.0;
  double displacement = 0.0;
  double weight = 0.0;
  bool torque_ok = true;
  bool escaped = false;
  double final_score = 0.0;
  bool removed = false;
};

namespace detail {

inline StabilityVerdict close_on_region(const GraspPose& pose, const ClosingRegion& region,
                                        double d1, double d2, const PointCloud& cloud,
                                        const GripperConfig& g, const StabilityOptions& opts,
                                        double original_score, const PointGrid* grid) {
  if (region.left.empty() || region.right.empty())
    throw OneSidedContact("closing region has a single side");
  StabilityVerdict v;
  v.symmetric = symmetry_test(region, cloud, opts.tolerance(g));
  v.d1 = d1;
  v.d2 = d2;
  v.displacement = std::abs(d1 - d2) / 2.0;
  v.weight = asymmetry_weight(d1, d2, g.max_width);

  GraspPose shifted = pose;
  shifted.point = pose.point + ((d1 - d2) / 2.0) * pose.closing();
  try {
    const auto after = extract_closing_region(shifted, cloud, g, grid);
    v.escaped = after.left.empty() || after.right.empty();
  } catch (const EmptyRegion&) {
    v.escaped = true;
  }
  v.removed = v.displacement > opts.threshold(g) || v.escaped;
  v.final_score = v.removed ? 0.0 : original_score * 2.0 * v.weight;
  return v;
}

}  // namespace detail

/// Quasi-static closing. The jaw with the smaller gap touches first and
/// carries the object until the other jaw meets it, a rigid shift of
/// |d1 - d2| / 2 along the closing axis. The grasp is removed when that shift
/// exceeds the threshold or when the shifted hand no longer holds points on
/// both sides. torque_ok is left for torque_filter.
inline StabilityVerdict simulate_close(const GraspPose& pose, double d1, double d2,
                                       const PointCloud& cloud, const GripperConfig& g,
                                       const StabilityOptions& opts, double original_score,
                                       const PointGrid* grid = nullptr) {
  return detail::close_on_region(pose, extract_closing_region(pose, cloud, g, grid), d1, d2,
                                 cloud, g, opts, original_score, grid);
}

/// Largest friction torque two jaws can resist: 2 mu F r_patch.
inline double friction_torque_capacity(const GripperConfig& g, double patch_radius) {
  return 2.0 * g.friction_mu * g.max_contact_force * patch_radius;
}

/// Distance from `point` to the line through a and b.
inline double distance_to_line(const Vec3& point, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len = d.norm();
  if (!(len > 1e-12)) return (point - a).norm();
  return (point - a).cross(d / len).norm();
}

/// Gravity torque about the contact line in the worst orientation
/// (gravity perpendicular to the lever), so the test is frame independent.
inline bool torque_filter(const ContactPair& contacts, const PointCloud& cloud,
                          const GripperConfig& g, const StabilityOptions& opts = {}) {
  const double lever = distance_to_line(cloud.com, contacts.left.point, contacts.right.point);
  return friction_torque_capacity(g, opts.patch(g)) >= cloud.mass_kg * opts.gravity * lever;
}

/// simulate_close followed by torque_filter on the contacts re-derived from
/// the pose.
inline StabilityVerdict evaluate_stability(const GraspPose& pose, double d1, double d2,
                                           const PointCloud& cloud, const GripperConfig& g,
                                           const StabilityOptions& opts, double original_score,
                                           const PointGrid* grid = nullptr) {
  const auto region = extract_closing_region(pose, cloud, g, grid);
  auto v = detail::close_on_region(pose, region, d1, d2, cloud, g, opts, original_score, grid);
  if (v.removed) return v;
  v.torque_ok = torque_filter(contact_points(pose, region, cloud, g), cloud, g, opts);
  if (!v.torque_ok) {
    v.removed = true;
    v.final_score = 0.0;
  }
  return v;
}

inline StabilityVerdict simulate_close(const CandidateGrasp& grasp, const PointCloud& cloud,
                                       const GripperConfig& g, const StabilityOptions& opts,
                                       double original_score) {
  return simulate_close(grasp.pose, grasp.contacts.d1, grasp.contacts.d2, cloud, g, opts,
                        original_score);
}

inline bool torque_filter(const CandidateGrasp& grasp, const PointCloud& cloud,
                          const GripperConfig& g, const StabilityOptions& opts = {}) {
  return torque_filter(grasp.contacts, cloud, g, opts);
}

struct RescoreStats {
  ScoreHistogram before;
  ScoreHistogram after;
  std::size_t total = 0;
  std::size_t removed = 0;

  double removed_fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(removed) / static_cast<double>(total);
  }
};

struct RescoreResult {
  std::vector<GraspRecord> records;  // survivors
  std::vector<std::uint32_t> kept;   // input index of each survivor
  RescoreStats stats;
};

/// Re-evaluates every record with its stored d1, d2 and drops the removed
/// ones. Running it again on its own output changes nothing.
inline RescoreResult rescore_dataset(const std::vector<GraspRecord>& records,
                                     const PointCloud& cloud, const GripperConfig& g,
                                     const StabilityOptions& opts = {}) {
  RescoreResult out;
  const PointGrid grid(cloud.points, g.max_width / 4.0);
  out.stats.total = records.size();
  for (std::uint32_t k = 0; k < records.size(); ++k) {
    const auto& rec = records[k];
    out.stats.before.add(rec.score);
    StabilityVerdict v;
    try {
      v = evaluate_stability(rec.pose(), rec.d1, rec.d2, cloud, g, opts, rec.score, &grid);
    } catch (const EmptyRegion&) {
      v.removed = true;
    } catch (const OneSidedContact&) {
      v.removed = true;
    }
    if (v.removed) {
      ++out.stats.removed;
      continue;
    }
    GraspRecord r = rec;
    r.weight = v.weight;
    r.final_score = v.final_score;
    r.set(kSymmetric, v.symmetric);
    r.set(kTorqueOk, v.torque_ok);
    out.stats.after.add(r.final_score);
    out.records.push_back(std::move(r));
    out.kept.push_back(k);
  }
  return out;
}

}  // namespace graspgen
