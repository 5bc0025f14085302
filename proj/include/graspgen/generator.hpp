#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <tuple>
#include <numbers>
#include <span>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <vector>

#include <Eigen/Geometry>

#include "graspgen/errors.hpp"
#include "graspgen/geometry.hpp"
#include "graspgen/gripper.hpp"

namespace graspgen {

// ---------------------------------------------------------------------------
// Orientation set
// ---------------------------------------------------------------------------

/// Approach directions times in-plane rolls; rotation k belongs to direction
/// k / n_rolls and roll k % n_rolls.
struct OrientationSet {
  std::vector<Mat3> rotations;
  std::size_t n_dirs = 0;
  std::size_t n_rolls = 0;

  std::size_t size() const { return rotations.size(); }
  bool empty() const { return rotations.empty(); }
};

/// Unit vector perpendicular to `axis`, identical for axis and -axis.
inline Vec3 reference_perpendicular(const Vec3& axis) {
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (std::abs(axis[k]) < std::abs(axis[best])) best = k;
  const Vec3 e = Vec3::Unit(best);
  return (e - e.dot(axis) * axis).normalized();
}

/// Fibonacci lattice directions z_i = 1 - (2i+1)/N, azimuth i * golden angle.
inline std::vector<Vec3> fibonacci_directions(std::size_t n) {
  std::vector<Vec3> dirs;
  dirs.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return dirs;
}

/// Rotation with columns (approach, closing, minor) where the closing axis is
/// the reference perpendicular rolled by `roll` about the approach.
inline Mat3 frame_from_approach(const Vec3& approach, double roll) {
  const Vec3 a = approach.normalized();
  const Vec3 u = reference_perpendicular(a);
  const Vec3 v = a.cross(u);
  const Vec3 c = std::cos(roll) * u + std::sin(roll) * v;
  Mat3 r;
  r.col(0) = a;
  r.col(1) = c;
  r.col(2) = a.cross(c);
  return r;
}

/// Rolls cover [0, pi): a parallel jaw is unchanged by a half turn.
inline OrientationSet sample_orientations(std::size_t n_dirs, std::size_t n_rolls) {
  if (n_dirs == 0 || n_rolls == 0)
    throw std::invalid_argument("sample_orientations needs n_dirs >= 1 and n_rolls >= 1");
  OrientationSet set;
  set.n_dirs = n_dirs;
  set.n_rolls = n_rolls;
  set.rotations.reserve(n_dirs * n_rolls);
  for (const auto& dir : fibonacci_directions(n_dirs))
    for (std::size_t j = 0; j < n_rolls; ++j)
      set.rotations.push_back(frame_from_approach(
          dir, std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_rolls)));
  return set;
}

/// r * Rot(approach, pi): same physical grasp with the jaws swapped.
inline Mat3 roll_half_turn(const Mat3& r) {
  Mat3 out = r;
  out.col(1) = -r.col(1);
  out.col(2) = -r.col(2);
  return out;
}

// ---------------------------------------------------------------------------
// Options and candidates
// ---------------------------------------------------------------------------

struct GenOptions {
  std::size_t n_dirs = 64;
  std::size_t n_rolls = 8;
  double eps_p = 0.0;  // m; 0 selects max_width / 10
  double eps_r = 10.0 * std::numbers::pi / 180.0;  // rad
  double normal_slack_deg = 5.0;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  double position_bin(const GripperConfig& g) const {
    return eps_p > 0.0 ? eps_p : g.max_width / 10.0;
  }
};

struct CandidateGrasp {
  GraspPose pose;
  ContactPair contacts;
  std::uint32_t point_index = 0;        // generator: grasp point; baseline: first contact
  std::uint32_t orientation_index = 0;  // generator: rotation; baseline: partner point
  std::uint64_t canon_key = 0;
};

/// Friction-cone necessary condition on both contacts: the jaw push (+c on
/// the left, -c on the right) must be within atan(mu) + slack of the inward
/// surface normal.
inline bool normal_filter(const GraspPose& pose, const ContactPair& contacts, double mu,
                          double slack_deg = 5.0) {
  const double limit = std::atan(mu) + slack_deg * std::numbers::pi / 180.0;
  if (limit >= std::numbers::pi) return true;
  const double cos_limit = std::cos(limit);
  const Vec3 c = pose.closing();
  return -contacts.left.normal.dot(c) >= cos_limit && contacts.right.normal.dot(c) >= cos_limit;
}

// ---------------------------------------------------------------------------
// Canonical keys and deduplication
// ---------------------------------------------------------------------------

/// Unit quaternion (w, x, y, z) of r with its first non-zero component
/// positive, so q and -q map to one representative.
inline Eigen::Vector4d canonical_quaternion(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  Eigen::Vector4d v(q.w(), q.x(), q.y(), q.z());
  for (int k = 0; k < 4; ++k)
    if (v[k] != 0.0) {
      if (v[k] < 0.0) v = -v;
      break;
    }
  return v;
}

/// Of r and its half-turn twin, the one with the lexicographically smaller
/// canonical quaternion.
inline Mat3 canonical_rotation(const Mat3& r) {
  const Mat3 twin = roll_half_turn(r);
  const auto q = canonical_quaternion(r);
  const auto qt = canonical_quaternion(twin);
  return std::lexicographical_compare(qt.data(), qt.data() + 4, q.data(), q.data() + 4) ? twin
                                                                                        : r;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::int64_t v) {
  return splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(v)));
}

}  // namespace detail

/// 64-bit key of the pose after removing jaw symmetry and snapping the grasp
/// point to an eps_p voxel and the quaternion to eps_r / 2 bins (a rotation
/// by eps_r moves the quaternion by about eps_r / 2).
inline std::uint64_t canonical_key(const GraspPose& pose, double eps_p, double eps_r) {
  const auto q = canonical_quaternion(canonical_rotation(pose.rotation));
  std::uint64_t h = 0x5eed;
  for (int k = 0; k < 3; ++k)
    h = detail::hash_combine(h, static_cast<std::int64_t>(std::floor(pose.point[k] / eps_p)));
  const double qbin = eps_r / 2.0;
  for (int k = 0; k < 4; ++k)
    h = detail::hash_combine(h, static_cast<std::int64_t>(std::floor(q[k] / qbin)));
  return h;
}

/// Collapses candidates sharing a canonical key, keeping the lowest
/// (point_index, orientation_index) representative. Output is sorted by that
/// pair.
inline std::vector<CandidateGrasp> dedup(std::vector<CandidateGrasp> candidates, double eps_p,
                                         double eps_r) {
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
    return std::tie(x.point_index, x.orientation_index) <
           std::tie(y.point_index, y.orientation_index);
  });
  std::unordered_set<std::uint64_t> seen;
  std::vector<CandidateGrasp> out;
  for (auto& c : candidates) {
    c.canon_key = canonical_key(c.pose, eps_p, eps_r);
    if (seen.insert(c.canon_key).second) out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

namespace detail {

/// Points of one orientation in grasp-axis coordinates (a, c, m), bucketed
/// into square columns over two axes and sorted along the third. Box queries
/// then cost a binary search per column instead of a scan over every point.
class ColumnIndex {
 public:
  ColumnIndex(int u_axis, int v_axis, int s_axis)
      : u_(u_axis), v_(v_axis), s_(s_axis) {}

  void build(std::span<const Vec3> proj, double cell_u, double cell_v) {
    cell_u_ = cell_u;
    cell_v_ = cell_v;
    double u_lo = std::numeric_limits<double>::infinity(), u_hi = -u_lo;
    double v_lo = u_lo, v_hi = -u_lo;
    for (const auto& p : proj) {
      u_lo = std::min(u_lo, p[u_]);
      u_hi = std::max(u_hi, p[u_]);
      v_lo = std::min(v_lo, p[v_]);
      v_hi = std::max(v_hi, p[v_]);
    }
    u0_ = u_lo;
    v0_ = v_lo;
    nu_ = static_cast<int>(std::floor((u_hi - u0_) / cell_u_)) + 1;
    nv_ = static_cast<int>(std::floor((v_hi - v0_) / cell_v_)) + 1;
    col_.resize(proj.size());
    start_.assign(static_cast<std::size_t>(nu_) * nv_ + 1, 0);
    for (std::size_t i = 0; i < proj.size(); ++i) {
      col_[i] = column_of(proj[i]);
      ++start_[col_[i] + 1];
    }
    for (std::size_t k = 1; k < start_.size(); ++k) start_[k] += start_[k - 1];
    order_.resize(proj.size());
    fill_ = start_;
    for (std::uint32_t i = 0; i < proj.size(); ++i) order_[fill_[col_[i]]++] = i;
    for (std::size_t k = 0; k + 1 < start_.size(); ++k)
      std::sort(order_.begin() + start_[k], order_.begin() + start_[k + 1],
                [&](std::uint32_t a, std::uint32_t b) {
                  return proj[a][s_] < proj[b][s_] || (proj[a][s_] == proj[b][s_] && a < b);
                });
    sorted_.resize(proj.size());
    for (std::size_t k = 0; k < order_.size(); ++k) sorted_[k] = proj[order_[k]][s_];
  }

  int iu(double u) const { return static_cast<int>(std::floor((u - u0_) / cell_u_)); }
  int iv(double v) const { return static_cast<int>(std::floor((v - v0_) / cell_v_)); }
  int nu() const { return nu_; }
  int nv() const { return nv_; }
  double u_lo(int iu) const { return u0_ + iu * cell_u_; }
  double v_lo(int iv) const { return v0_ + iv * cell_v_; }
  double cell_u() const { return cell_u_; }
  double cell_v() const { return cell_v_; }

  std::size_t begin(int iu, int iv) const { return start_[static_cast<std::size_t>(iu) * nv_ + iv]; }
  std::size_t end(int iu, int iv) const { return start_[static_cast<std::size_t>(iu) * nv_ + iv + 1]; }
  double sorted(std::size_t k) const { return sorted_[k]; }
  std::uint32_t index(std::size_t k) const { return order_[k]; }

  /// First position in [b, e) whose sort value x has pred(x) false; pred
  /// must be monotone (true then false).
  template <class Pred>
  std::size_t partition(std::size_t b, std::size_t e, Pred pred) const {
    return static_cast<std::size_t>(
        std::partition_point(sorted_.begin() + b, sorted_.begin() + e, pred) - sorted_.begin());
  }

 private:
  std::size_t column_of(const Vec3& p) const {
    return static_cast<std::size_t>(iu(p[u_])) * nv_ + iv(p[v_]);
  }

  int u_, v_, s_;
  double cell_u_ = 1.0, cell_v_ = 1.0, u0_ = 0.0, v0_ = 0.0;
  int nu_ = 1, nv_ = 1;
  std::vector<std::size_t> col_;
  std::vector<std::size_t> start_, fill_;
  std::vector<std::uint32_t> order_;
  std::vector<double> sorted_;
};

// Slack on column walls: far above the rounding error of the projected
// coordinates, far below any gripper dimension.
inline constexpr double kColumnSlack = 1e-12;

/// Evaluates every grasp point of one orientation.
class OrientationSweep {
 public:
  OrientationSweep(const PointCloud& cloud, const GripperConfig& g, const GenOptions& opts)
      : cloud_(cloud),
        g_(g),
        opts_(opts),
        fingers_(0, 2, 1),  // columns over (a, m), sorted by c
        palm_(1, 2, 0) {    // columns over (c, m), sorted by a
    // Wide cells along a and c, thin slabs along m: measured fastest on
    // the reference sphere.
    finger_cell_a_ = g.finger_length;
    palm_cell_c_ = g.max_width + 2.0 * g.finger_thickness;
    cell_m_ = g.finger_height / 4.0;
  }

  void run(const Mat3& rotation, std::uint32_t orientation_index,
           std::vector<CandidateGrasp>& out) {
    const std::size_t n = cloud_.size();
    proj_.resize(n);
    for (std::size_t i = 0; i < n; ++i) proj_[i] = project(rotation, cloud_.points[i]);
    fingers_.build(proj_, finger_cell_a_, cell_m_);
    palm_.build(proj_, palm_cell_c_, cell_m_);
    GraspPose pose;
    pose.rotation = rotation;
    pose.provenance = Provenance::orientation_sampled;
    for (std::uint32_t k = 0; k < n; ++k) {
      ContactPair contacts;
      if (!evaluate(k, contacts)) continue;
      pose.point = cloud_.points[k];
      contacts.left.point = cloud_.points[contacts.left.index];
      contacts.left.normal = cloud_.normals[contacts.left.index];
      contacts.right.point = cloud_.points[contacts.right.index];
      contacts.right.normal = cloud_.normals[contacts.right.index];
      if (!normal_filter(pose, contacts, g_.friction_mu, opts_.normal_slack_deg)) continue;
      CandidateGrasp cand;
      cand.pose = pose;
      cand.contacts = contacts;
      cand.point_index = k;
      cand.orientation_index = orientation_index;
      cand.canon_key = canonical_key(pose, opts_.position_bin(g_), opts_.eps_r);
      out.push_back(cand);
    }
  }

 private:
  Vec3 local(std::uint32_t i, const Vec3& q) const { return proj_[i] - q; }

  // Collision test, then both contacts. Returns false for colliding or
  // one-sided poses.
  bool evaluate(std::uint32_t k, ContactPair& contacts) const {
    const Vec3& q = proj_[k];
    const double hl = g_.finger_length / 2, hw = g_.max_width / 2, hh = g_.finger_height / 2;
    const double t = g_.finger_thickness;
    const double a_k = q[0], c_k = q[1], m_k = q[2];

    // Palm: columns over (c, m), thin slab in a.
    {
      const int c0 = std::max(0, palm_.iu(c_k + (-hw - t) - kColumnSlack)), c1 = std::min(palm_.nu() - 1, palm_.iu(c_k + (hw + t) + kColumnSlack));
      const int m0 = std::max(0, palm_.iv(m_k - hh - kColumnSlack)), m1 = std::min(palm_.nv() - 1, palm_.iv(m_k + hh + kColumnSlack));
      for (int ic = c0; ic <= c1; ++ic) {
        const double lo_c = palm_.u_lo(ic) - c_k, hi_c = lo_c + palm_.cell_u();
        const bool in_c = lo_c - kColumnSlack >= -hw - t && hi_c + kColumnSlack <= hw + t;
        for (int im = m0; im <= m1; ++im) {
          const double lo_m = palm_.v_lo(im) - m_k, hi_m = lo_m + palm_.cell_v();
          const bool inside = in_c && lo_m - kColumnSlack >= -hh && hi_m + kColumnSlack <= hh;
          const std::size_t b = palm_.begin(ic, im), e = palm_.end(ic, im);
          for (std::size_t p = palm_.partition(b, e, [&](double a) { return a - a_k < -hl - t; });
               p < e && palm_.sorted(p) - a_k < -hl; ++p) {
            if (inside || classify(local(palm_.index(p), q), g_) == Zone::palm) return false;
          }
        }
      }
    }

    // Fingers and contacts: columns over (a, m), sorted along c.
    const int a0 = std::max(0, fingers_.iu(a_k - hl - kColumnSlack)), a1 = std::min(fingers_.nu() - 1, fingers_.iu(a_k + hl + kColumnSlack));
    const int m0 = std::max(0, fingers_.iv(m_k - hh - kColumnSlack)), m1 = std::min(fingers_.nv() - 1, fingers_.iv(m_k + hh + kColumnSlack));
    for (int ia = a0; ia <= a1; ++ia) {
      const double lo_a = fingers_.u_lo(ia) - a_k, hi_a = lo_a + fingers_.cell_u();
      const bool in_a = lo_a - kColumnSlack >= -hl && hi_a + kColumnSlack <= hl;
      for (int im = m0; im <= m1; ++im) {
        const double lo_m = fingers_.v_lo(im) - m_k, hi_m = lo_m + fingers_.cell_v();
        const bool inside = in_a && lo_m - kColumnSlack >= -hh && hi_m + kColumnSlack <= hh;
        const std::size_t b = fingers_.begin(ia, im), e = fingers_.end(ia, im);
        for (std::size_t p = fingers_.partition(b, e, [&](double c) { return c - c_k < -hw - t; });
             p < e && fingers_.sorted(p) - c_k < -hw; ++p)
          if (inside || classify(local(fingers_.index(p), q), g_) == Zone::left_finger) return false;
        for (std::size_t p = fingers_.partition(b, e, [&](double c) { return c - c_k <= hw; });
             p < e && fingers_.sorted(p) - c_k <= hw + t; ++p)
          if (inside || classify(local(fingers_.index(p), q), g_) == Zone::right_finger) return false;
      }
    }

    // Contacts: smallest c >= -W/2 on the left, largest c <= W/2 on the
    // right, ties to the lowest point index.
    bool has_left = false, has_right = false;
    double best_left = 0.0, best_right = 0.0;
    std::uint32_t left_idx = 0, right_idx = 0;
    auto offer_left = [&](double c, std::uint32_t idx) {
      if (!has_left || c < best_left || (c == best_left && idx < left_idx)) {
        has_left = true;
        best_left = c;
        left_idx = idx;
      }
    };
    auto offer_right = [&](double c, std::uint32_t idx) {
      if (!has_right || c > best_right || (c == best_right && idx < right_idx)) {
        has_right = true;
        best_right = c;
        right_idx = idx;
      }
    };
    for (int ia = a0; ia <= a1; ++ia) {
      const double lo_a = fingers_.u_lo(ia) - a_k, hi_a = lo_a + fingers_.cell_u();
      const bool in_a = lo_a - kColumnSlack >= -hl && hi_a + kColumnSlack <= hl;
      for (int im = m0; im <= m1; ++im) {
        const double lo_m = fingers_.v_lo(im) - m_k, hi_m = lo_m + fingers_.cell_v();
        const bool inside = in_a && lo_m - kColumnSlack >= -hh && hi_m + kColumnSlack <= hh;
        const std::size_t b = fingers_.begin(ia, im), e = fingers_.end(ia, im);
        if (b == e) continue;
        auto in_region = [&](std::size_t p) {
          return inside || classify(local(fingers_.index(p), q), g_) == Zone::closing;
        };
        // Left: walk up from the left jaw face.
        std::size_t p = fingers_.partition(b, e, [&](double c) { return c - c_k < -hw; });
        for (; p < e; ++p) {
          const double c = fingers_.sorted(p) - c_k;
          if (c >= 0.0) break;
          if (has_left && c > best_left) break;
          if (!in_region(p)) continue;
          offer_left(c, fingers_.index(p));
          for (++p; p < e && fingers_.sorted(p) - c_k == c; ++p)
            if (in_region(p)) offer_left(c, fingers_.index(p));
          break;
        }
        // Right: walk down from the right jaw face.
        std::size_t r = fingers_.partition(b, e, [&](double c) { return c - c_k <= hw; });
        while (r > b) {
          --r;
          const double c = fingers_.sorted(r) - c_k;
          if (c < 0.0) break;
          if (has_right && c < best_right) break;
          if (!in_region(r)) continue;
          offer_right(c, fingers_.index(r));
          while (r > b && fingers_.sorted(r - 1) - c_k == c) {
            --r;
            if (in_region(r)) offer_right(c, fingers_.index(r));
          }
          break;
        }
      }
    }
    if (!has_left || !has_right) return false;
    contacts.left.index = left_idx;
    contacts.right.index = right_idx;
    contacts.d1 = best_left + hw;
    contacts.d2 = hw - best_right;
    return true;
  }

  const PointCloud& cloud_;
  const GripperConfig& g_;
  const GenOptions& opts_;
  double finger_cell_a_, palm_cell_c_, cell_m_;
  std::vector<Vec3> proj_;
  ColumnIndex fingers_;
  ColumnIndex palm_;
};

}  // namespace detail

/// Candidates for orientations [first, last) of `orients`, sorted by
/// (point_index, orientation_index). Never throws for lack of grasps.
inline std::vector<CandidateGrasp> generate_range(const PointCloud& cloud, const GripperConfig& g,
                                                  const OrientationSet& orients,
                                                  const GenOptions& opts, std::size_t first,
                                                  std::size_t last) {
  last = std::min(last, orients.size());
  std::vector<CandidateGrasp> out;
  if (cloud.empty() || first >= last) return out;
  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(last - first)));
  if (jobs == 1) {
    detail::OrientationSweep sweep(cloud, g, opts);
    for (std::size_t o = first; o < last; ++o)
      sweep.run(orients.rotations[o], static_cast<std::uint32_t>(o), out);
  } else {
    std::vector<std::vector<CandidateGrasp>> parts(jobs);
    std::vector<std::thread> workers;
    const std::size_t span = last - first;
    for (unsigned j = 0; j < jobs; ++j) {
      workers.emplace_back([&, j] {
        detail::OrientationSweep sweep(cloud, g, opts);
        const std::size_t b = first + span * j / jobs, e = first + span * (j + 1) / jobs;
        for (std::size_t o = b; o < e; ++o)
          sweep.run(orients.rotations[o], static_cast<std::uint32_t>(o), parts[j]);
      });
    }
    for (auto& w : workers) w.join();
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.point_index, x.orientation_index) <
           std::tie(y.point_index, y.orientation_index);
  });
  return out;
}

/// Sweeps every orientation over every surface point. Each pose centres the
/// closing region on the point, so the palm stands finger_length / 2 behind
/// it along the approach. Poses survive collision, two-sided contact and the
/// normal filter, in that order.
inline std::vector<CandidateGrasp> generate(const PointCloud& cloud, const GripperConfig& g,
                                            const OrientationSet& orients,
                                            const GenOptions& opts) {
  if (orients.empty()) throw std::invalid_argument("generate needs at least one orientation");
  auto out = generate_range(cloud, g, orients, opts, 0, orients.size());
  if (out.empty()) throw NoGraspsFound("every pose was rejected");
  return out;
}

}  // namespace graspgen
