#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "graspgen/generator.hpp"
#include "graspgen/gripper.hpp"
#include "graspgen/scoring.hpp"

namespace graspgen {

enum RecordFlag : std::uint8_t {
  kDedupSurvivor = 1u << 0,
  kSymmetric = 1u << 1,
  kTorqueOk = 1u << 2,
  kRemoved = 1u << 3,
};

inline constexpr std::pair<RecordFlag, const char*> kFlagNames[] = {
    {kDedupSurvivor, "dedup_survivor"},
    {kSymmetric, "symmetric"},
    {kTorqueOk, "torque_ok"},
    {kRemoved, "removed"},
};

/// Jaw-asymmetry weight (1 - |d1 - d2| / width) / 2, clamped to [0, 0.5].
inline double asymmetry_weight(double d1, double d2, double width) {
  return std::clamp((1.0 - std::abs(d1 - d2) / width) / 2.0, 0.0, 0.5);
}

struct GraspRecord {
  std::string object_id;
  Vec3 translation = Vec3::Zero();
  Eigen::Vector4d quaternion{1.0, 0.0, 0.0, 0.0};  // w, x, y, z
  double score = 0.0;
  double fc_mu_star = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double weight = 0.0;
  double final_score = 0.0;
  std::uint8_t flags = 0;
  Provenance provenance = Provenance::orientation_sampled;

  bool has(RecordFlag f) const { return (flags & f) != 0; }
  void set(RecordFlag f, bool on) {
    flags = static_cast<std::uint8_t>(on ? (flags | f) : (flags & ~f));
  }

  GraspPose pose() const {
    GraspPose p;
    p.point = translation;
    p.rotation = Eigen::Quaterniond(quaternion[0], quaternion[1], quaternion[2], quaternion[3])
                     .toRotationMatrix();
    p.provenance = provenance;
    return p;
  }

  bool operator==(const GraspRecord&) const = default;
};

/// Unit quaternion (w, x, y, z) with w >= 0.
inline Eigen::Vector4d quaternion_of(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  Eigen::Vector4d v(q.w(), q.x(), q.y(), q.z());
  if (v[0] < 0.0) v = -v;
  return v;
}

/// Record for a freshly scored candidate; final_score starts at the score.
inline GraspRecord make_record(const std::string& object_id, const CandidateGrasp& cand,
                               const QualityScore& q, const GripperConfig& g,
                               bool dedup_survivor) {
  GraspRecord r;
  r.object_id = object_id;
  r.translation = cand.pose.point;
  r.quaternion = quaternion_of(cand.pose.rotation);
  r.score = q.score;
  r.fc_mu_star = q.fc_mu_star;
  r.d1 = cand.contacts.d1;
  r.d2 = cand.contacts.d2;
  r.weight = asymmetry_weight(r.d1, r.d2, g.max_width);
  r.final_score = q.score;
  r.set(kDedupSurvivor, dedup_survivor);
  r.provenance = cand.pose.provenance;
  return r;
}

/// Closing-region points of one record, in its grasp frame (a, c, m).
struct ClosingRegionExtract {
  std::uint32_t record_ref = 0;
  std::vector<Eigen::Vector3f> points;
  std::vector<std::uint8_t> sides;  // 0 left, 1 right

  bool operator==(const ClosingRegionExtract&) const = default;
};

inline ClosingRegionExtract make_extract(std::uint32_t record_ref, const GraspPose& pose,
                                         const ClosingRegion& region, const PointCloud& cloud) {
  ClosingRegionExtract ex;
  ex.record_ref = record_ref;
  ex.points.reserve(region.size());
  ex.sides.reserve(region.size());
  for (auto i : region.indices) {
    const Vec3 local = to_grasp_frame(pose, cloud.points[i]);
    ex.points.push_back(local.cast<float>());
    ex.sides.push_back(local.y() < 0.0 ? 0 : 1);
  }
  return ex;
}

/// Every extract point, mapped back through the record pose, lies inside the
/// inter-jaw box within `tol`.
inline bool reprojects_inside(const ClosingRegionExtract& ex, const GraspRecord& rec,
                              const GripperConfig& g, double tol = 1e-6) {
  const GraspPose pose = rec.pose();
  const double hl = g.finger_length / 2, hw = g.max_width / 2, hh = g.finger_height / 2;
  for (const auto& p : ex.points) {
    const Vec3 world = pose.point + pose.rotation * p.cast<double>();
    const Vec3 back = to_grasp_frame(pose, world);
    if (std::abs(back.x()) > hl + tol || std::abs(back.y()) > hw + tol ||
        std::abs(back.z()) > hh + tol)
      return false;
  }
  return true;
}

}  // namespace graspgen
