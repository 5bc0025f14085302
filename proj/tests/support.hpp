#pragma once

// Shared fixtures, random generators and brute-force oracles for the tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "graspgen/graspgen.hpp"

namespace gg_test {

using graspgen::Mat3;
using graspgen::Vec3;

inline graspgen::PointCloud sphere_cloud(double radius, std::size_t n, std::uint64_t seed = 0,
                                         int subdivisions = 4) {
  return graspgen::reorient_normals(
      graspgen::sample_surface(graspgen::shapes::icosphere(radius, subdivisions), n, seed));
}

inline graspgen::PointCloud mesh_cloud(const graspgen::TriangleMesh& mesh, std::size_t n,
                                       std::uint64_t seed = 0) {
  return graspgen::reorient_normals(graspgen::sample_surface(mesh, n, seed));
}

/// Hand-rolled generators on top of a seeded engine.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
  Vec3 unit() {
    std::normal_distribution<double> nd;
    Vec3 v;
    do v = Vec3(nd(rng), nd(rng), nd(rng));
    while (v.norm() < 1e-6);
    return v.normalized();
  }
  Vec3 in_box(double h) { return {uniform(-h, h), uniform(-h, h), uniform(-h, h)}; }
  Mat3 rotation() {
    Eigen::Quaterniond q(Eigen::Vector4d(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1),
                                         uniform(-1, 1)));
    if (q.norm() < 1e-3) q = Eigen::Quaterniond::Identity();
    return q.normalized().toRotationMatrix();
  }
};

/// Angle in degrees between two vectors, via atan2 for accuracy near 0 and 180.
inline double angle_deg(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / std::numbers::pi;
}

/// Reference force-closure rung by linear scan with angle arithmetic:
/// smallest k with both cone angles <= atan(k / 20); 0 when none.
inline int brute_force_rung(const Vec3& xl, const Vec3& nl, const Vec3& xr, const Vec3& nr) {
  const Vec3 line = xr - xl;
  const double al = angle_deg(line, -nl);
  const double ar = angle_deg(-line, -nr);
  for (int k = 1; k <= 20; ++k) {
    const double cone = std::atan(k / 20.0) * 180.0 / std::numbers::pi;
    if (al <= cone && ar <= cone) return k;
  }
  return 0;
}

/// Independent containment check: world-to-hand via R^T (x - p) and
/// open boxes shrunk by `tol`, so only clear penetrations count.
inline bool penetrates_hand(const graspgen::GraspPose& pose, const Vec3& x,
                            const graspgen::GripperConfig& g, double tol = 1e-9) {
  const Vec3 l = pose.rotation.transpose() * (x - pose.point);
  const double L = g.finger_length, W = g.max_width, T = g.finger_thickness, H = g.finger_height;
  auto inside = [&](double v, double lo, double hi) { return v > lo + tol && v < hi - tol; };
  if (!inside(l.z(), -H / 2, H / 2)) return false;
  const bool finger_a = inside(l.x(), -L / 2, L / 2);
  if (finger_a && (inside(l.y(), -W / 2 - T, -W / 2) || inside(l.y(), W / 2, W / 2 + T)))
    return true;
  return inside(l.x(), -L / 2 - T, -L / 2) && inside(l.y(), -W / 2 - T, W / 2 + T);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("graspgen_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gg_test
