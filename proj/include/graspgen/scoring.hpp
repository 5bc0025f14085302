#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "graspgen/errors.hpp"
#include "graspgen/generator.hpp"
#include "graspgen/geometry.hpp"
#include "graspgen/gripper.hpp"
#include "graspgen/spatial_grid.hpp"

namespace graspgen {

struct QualityScore {
  double score = 0.0;
  double fc_mu_star = std::numeric_limits<double>::infinity();
};

/// Friction ladder mu_k = k / 20 for k = 1..20.
inline constexpr int kLadderRungs = 20;

inline double ladder_mu(int k) { return static_cast<double>(k) / kLadderRungs; }

/// Two-contact force closure: the segment between the contacts must lie
/// inside both friction cones (half-angle atan(mu) about the inward normal).
inline bool force_closure_at(const Contact& a, const Contact& b, double mu) {
  const Vec3 d = b.point - a.point;
  const double len = d.norm();
  if (!(len > 1e-9)) throw DegenerateContacts("contact points coincide");
  const Vec3 u = d / len;
  const double cos_cone = 1.0 / std::sqrt(1.0 + mu * mu);
  return -a.normal.dot(u) >= cos_cone && b.normal.dot(u) >= cos_cone;
}

inline bool force_closure_at(const ContactPair& c, double mu) {
  return force_closure_at(c.left, c.right, mu);
}

/// Smallest ladder rung at which the grasp is force closure, found by
/// bisection (closure is monotone in mu). score = (20 - k) / 19, i.e.
/// (1.00 - mu*) / 0.95, and 0 when no rung closes.
inline QualityScore score(const ContactPair& contacts) {
  int lo = 1, hi = kLadderRungs + 1;  // answer in [lo, hi); hi means none
  if (!force_closure_at(contacts, ladder_mu(kLadderRungs))) return {};
  hi = kLadderRungs;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (force_closure_at(contacts, ladder_mu(mid)))
      hi = mid;
    else
      lo = mid + 1;
  }
  QualityScore q;
  q.fc_mu_star = ladder_mu(lo);
  q.score = static_cast<double>(kLadderRungs - lo) / (kLadderRungs - 1);
  return q;
}

// ---------------------------------------------------------------------------
// Antipodal baseline
// ---------------------------------------------------------------------------

/// Pose at the midpoint of two contacts, closing along x2 - x1 and rolled by
/// `roll` about that axis. Swapping x1 and x2 yields the half-turn twin.
inline GraspPose antipodal_pose(const Vec3& x1, const Vec3& x2, double roll) {
  const Vec3 c = (x2 - x1).normalized();
  Vec3 key = c;
  for (int k = 0; k < 3; ++k)
    if (key[k] != 0.0) {
      if (key[k] < 0.0) key = -key;
      break;
    }
  const Vec3 u = reference_perpendicular(key);
  const Vec3 v = key.cross(u);
  GraspPose pose;
  pose.point = (x1 + x2) * 0.5;
  pose.rotation.col(0) = std::cos(roll) * u + std::sin(roll) * v;
  pose.rotation.col(1) = c;
  pose.rotation.col(2) = pose.rotation.col(0).cross(c);
  pose.provenance = Provenance::antipodal_baseline;
  return pose;
}

/// Point-pair sampler: each step draws a random point, scans the whole cloud
/// for partners within max_width that close at friction_mu, and emits every
/// collision-free pair with a random roll. Duplicates are kept.
class AntipodalSampler {
 public:
  AntipodalSampler(const PointCloud& cloud, const GripperConfig& g, std::uint64_t seed)
      : cloud_(cloud), g_(g), rng_(seed), grid_(cloud.points, g.max_width / 4.0) {}

  /// Draws a new first contact and collects its force-closure partners.
  void draw() {
    partners_.clear();
    cursor_ = 0;
    const std::size_t n = cloud_.size();
    if (n == 0) return;
    first_ = static_cast<std::uint32_t>(detail::uniform_index(rng_, n));
    const Contact first{first_, cloud_.points[first_], cloud_.normals[first_]};
    const double w2 = g_.max_width * g_.max_width;
    for (std::uint32_t j = 0; j < n; ++j) {
      const double d2 = (cloud_.points[j] - first.point).squaredNorm();
      if (d2 <= 1e-18 || d2 > w2) continue;
      if (force_closure_at(first, Contact{j, cloud_.points[j], cloud_.normals[j]}, g_.friction_mu))
        partners_.push_back(j);
    }
  }

  /// Next collision-free grasp of the current draw; false once exhausted.
  bool next(CandidateGrasp& out) {
    while (cursor_ < partners_.size()) {
      const auto j = partners_[cursor_++];
      const double roll = 2.0 * std::numbers::pi * detail::unit_double(rng_);
      const GraspPose pose = antipodal_pose(cloud_.points[first_], cloud_.points[j], roll);
      if (check_collision(pose, cloud_, g_, &grid_)) continue;
      try {
        const auto region = extract_closing_region(pose, cloud_, g_, &grid_);
        out.pose = pose;
        out.contacts = contact_points(pose, region, cloud_, g_);
        out.point_index = first_;
        out.orientation_index = j;
        out.canon_key = 0;
        return true;
      } catch (const EmptyRegion&) {
      } catch (const OneSidedContact&) {
      }
    }
    return false;
  }

  /// One full draw.
  void step(std::vector<CandidateGrasp>& out) {
    draw();
    CandidateGrasp c;
    while (next(c)) out.push_back(c);
  }

  const PointGrid& grid() const { return grid_; }

 private:
  const PointCloud& cloud_;
  const GripperConfig& g_;
  std::mt19937_64 rng_;
  PointGrid grid_;
  std::vector<std::uint32_t> partners_;
  std::size_t cursor_ = 0;
  std::uint32_t first_ = 0;
};

inline std::vector<CandidateGrasp> antipodal_generate(const PointCloud& cloud,
                                                      const GripperConfig& g,
                                                      std::size_t n_samples, std::uint64_t seed) {
  std::vector<CandidateGrasp> out;
  if (n_samples == 0 || cloud.empty()) return out;
  AntipodalSampler sampler(cloud, g, seed);
  for (std::size_t s = 0; s < n_samples; ++s) sampler.step(out);
  return out;
}

}  // namespace graspgen
