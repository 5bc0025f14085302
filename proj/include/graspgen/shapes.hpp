#pragma once

// Closed, outward-wound reference solids used by tests, the benchmark and the
// mesh helper tool.

#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "graspgen/geometry.hpp"

namespace graspgen::shapes {

/// Icosahedron refined `subdivisions` times: 20 * 4^subdivisions faces.
inline TriangleMesh icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero()) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<std::int64_t, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> mid;
    auto midpoint = [&](std::int64_t a, std::int64_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto idx = static_cast<std::int64_t>(v.size() - 1);
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<std::int64_t, 3>> g;
    g.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const auto a = midpoint(tri[0], tri[1]);
      const auto b = midpoint(tri[1], tri[2]);
      const auto c = midpoint(tri[2], tri[0]);
      g.push_back({tri[0], a, c});
      g.push_back({tri[1], b, a});
      g.push_back({tri[2], c, b});
      g.push_back({a, b, c});
    }
    f = std::move(g);
  }
  for (auto& p : v) p = center + radius * p;
  return make_mesh(v, f);
}

/// Prism over a counter-clockwise polygon in the xy-plane spanning
/// z in [0, depth]. Caps are fanned from `fan_vertex`, which must see the
/// whole polygon (any vertex of a convex polygon, the reflex corner of an L).
inline TriangleMesh extrude_polygon(std::span<const Eigen::Vector2d> poly, double depth,
                                    std::size_t fan_vertex = 0) {
  const auto n = static_cast<std::int64_t>(poly.size());
  std::vector<Vec3> v;
  for (const auto& p : poly) v.emplace_back(p.x(), p.y(), 0.0);
  for (const auto& p : poly) v.emplace_back(p.x(), p.y(), depth);
  std::vector<std::array<std::int64_t, 3>> f;
  const auto c = static_cast<std::int64_t>(fan_vertex);
  for (std::int64_t k = 1; k + 1 < n; ++k) {
    const auto a = (c + k) % n, b = (c + k + 1) % n;
    f.push_back({c, b, a});              // bottom, facing -z
    f.push_back({n + c, n + a, n + b});  // top, facing +z
  }
  for (std::int64_t i = 0; i < n; ++i) {
    const auto j = (i + 1) % n;
    f.push_back({i, j, n + j});
    f.push_back({i, n + j, n + i});
  }
  return make_mesh(v, f);
}

inline TriangleMesh translated(TriangleMesh mesh, const Vec3& offset) {
  for (auto& p : mesh.vertices) p += offset;
  return mesh;
}

/// Axis-aligned box centred at the origin.
inline TriangleMesh box(double sx, double sy, double sz) {
  const std::vector<Eigen::Vector2d> rect = {
      {-sx / 2, -sy / 2}, {sx / 2, -sy / 2}, {sx / 2, sy / 2}, {-sx / 2, sy / 2}};
  return translated(extrude_polygon(rect, sz), Vec3(0, 0, -sz / 2));
}

inline TriangleMesh cube(double side) { return box(side, side, side); }

/// Cylinder about the z axis, centred at the origin.
inline TriangleMesh cylinder(double radius, double height, int segments = 64) {
  std::vector<Eigen::Vector2d> ring;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / segments;
    ring.emplace_back(radius * std::cos(a), radius * std::sin(a));
  }
  return translated(extrude_polygon(ring, height), Vec3(0, 0, -height / 2));
}

/// L-shaped bracket: a `length` x `thickness` foot and a `thickness` x
/// `height` upright sharing the corner at the origin, extruded by `depth`.
inline TriangleMesh l_bracket(double length, double height, double thickness, double depth) {
  const std::vector<Eigen::Vector2d> poly = {{0, 0},
                                             {length, 0},
                                             {length, thickness},
                                             {thickness, thickness},
                                             {thickness, height},
                                             {0, height}};
  return translated(extrude_polygon(poly, depth, 3), Vec3(0, 0, -depth / 2));
}

}  // namespace graspgen::shapes
