#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "graspgen/errors.hpp"
#include "graspgen/spatial_grid.hpp"

namespace graspgen {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kDefaultDensity = 500.0;  // kg/m^3
inline constexpr double kMinTriangleArea = 1e-12;  // m^2
inline constexpr double kVertexMergeTol = 1e-9;    // m

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double diagonal() const { return (hi - lo).norm(); }
  bool contains(const Vec3& p, double tol = 0.0) const {
    return (p.array() >= lo.array() - tol).all() &&
           (p.array() <= hi.array() + tol).all();
  }
};

/// Rigid transform x -> rotation * x + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  Pose inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
  Pose operator*(const Pose& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  bool is_valid(double tol = 1e-9) const {
    return std::abs(rotation.determinant() - 1.0) <= tol &&
           (rotation.transpose() * rotation - Mat3::Identity())
                   .cwiseAbs()
                   .maxCoeff() <= tol;
  }
};

// ---------------------------------------------------------------------------
// Triangle meshes
// ---------------------------------------------------------------------------

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<double> areas;  // per triangle, cached

  std::size_t size() const { return triangles.size(); }

  Vec3 corner(std::size_t t, int k) const { return vertices[triangles[t][k]]; }

  Vec3 triangle_normal(std::size_t t) const {
    return (corner(t, 1) - corner(t, 0))
        .cross(corner(t, 2) - corner(t, 0))
        .normalized();
  }

  double surface_area() const {
    double s = 0.0;
    for (double a : areas) s += a;
    return s;
  }

  Aabb bounds() const {
    Aabb box;
    for (const auto& v : vertices) box.extend(v);
    return box;
  }
};

namespace detail {

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace detail

/// Builds a cleaned mesh: vertices closer than 1e-9 m are merged, triangles
/// with repeated corners or area <= 1e-12 m^2 are dropped and unreferenced
/// vertices are removed. Output order follows input order.
inline TriangleMesh make_mesh(const std::vector<Vec3>& vertices,
                              const std::vector<std::array<std::int64_t, 3>>& tris) {
  // Merge near-duplicate vertices through a 1e-9 quantisation lattice,
  // probing neighbouring lattice cells so pairs straddling a cell wall merge.
  struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& k) const {
      std::uint64_t h = 1469598103934665603ULL;
      for (auto v : k) {
        h ^= static_cast<std::uint64_t>(v);
        h *= 1099511628211ULL;
      }
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<std::array<std::int64_t, 3>, std::vector<std::uint32_t>, KeyHash>
      lattice;
  std::vector<Vec3> merged;
  std::vector<std::uint32_t> remap(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec3& v = vertices[i];
    if (!v.allFinite()) throw ParseError("non-finite vertex coordinate");
    const std::array<std::int64_t, 3> k{
        static_cast<std::int64_t>(std::floor(v.x() / kVertexMergeTol)),
        static_cast<std::int64_t>(std::floor(v.y() / kVertexMergeTol)),
        static_cast<std::int64_t>(std::floor(v.z() / kVertexMergeTol))};
    std::uint32_t found = std::numeric_limits<std::uint32_t>::max();
    for (int dx = -1; dx <= 1 && found == std::numeric_limits<std::uint32_t>::max(); ++dx)
      for (int dy = -1; dy <= 1 && found == std::numeric_limits<std::uint32_t>::max(); ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = lattice.find({k[0] + dx, k[1] + dy, k[2] + dz});
          if (it == lattice.end()) continue;
          for (std::uint32_t m : it->second)
            if ((merged[m] - v).norm() <= kVertexMergeTol) {
              found = m;
              break;
            }
          if (found != std::numeric_limits<std::uint32_t>::max()) break;
        }
    if (found == std::numeric_limits<std::uint32_t>::max()) {
      found = static_cast<std::uint32_t>(merged.size());
      merged.push_back(v);
      lattice[k].push_back(found);
    }
    remap[i] = found;
  }

  std::vector<std::array<std::uint32_t, 3>> kept;
  for (const auto& t : tris) {
    for (auto idx : t)
      if (idx < 0 || static_cast<std::size_t>(idx) >= vertices.size())
        throw ParseError("triangle index out of range");
    const std::array<std::uint32_t, 3> r{remap[t[0]], remap[t[1]], remap[t[2]]};
    if (r[0] == r[1] || r[1] == r[2] || r[0] == r[2]) continue;
    if (detail::triangle_area(merged[r[0]], merged[r[1]], merged[r[2]]) <= kMinTriangleArea)
      continue;
    kept.push_back(r);
  }
  if (kept.empty()) throw EmptyMesh("no non-degenerate triangles");

  TriangleMesh mesh;
  std::vector<std::uint32_t> compact(merged.size(), std::numeric_limits<std::uint32_t>::max());
  for (auto& t : kept)
    for (auto& idx : t) {
      if (compact[idx] == std::numeric_limits<std::uint32_t>::max()) {
        compact[idx] = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.push_back(merged[idx]);
      }
      idx = compact[idx];
    }
  mesh.triangles = std::move(kept);
  mesh.areas.reserve(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    mesh.areas.push_back(
        detail::triangle_area(mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2)));
  return mesh;
}

enum class MeshFormat { obj, ply_ascii };

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" +
                     std::string(s) + "'");
  }
}

inline std::int64_t parse_int(std::string_view s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const long long v = std::stoll(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad integer '" +
                     std::string(s) + "'");
  }
}

template <class F>
void for_each_line(const std::string& text, F&& f) {
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (!f(line, line_no)) return;
    if (end == text.size()) break;
    pos = end + 1;
  }
}

inline TriangleMesh parse_obj(const std::string& text) {
  std::vector<Vec3> verts;
  std::vector<std::array<std::int64_t, 3>> tris;
  for_each_line(text, [&](std::string_view line, std::size_t n) {
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') return true;
    if (tok[0] == "v") {
      if (tok.size() < 4) throw ParseError("line " + std::to_string(n) + ": short vertex");
      verts.emplace_back(parse_double(tok[1], n), parse_double(tok[2], n),
                         parse_double(tok[3], n));
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw ParseError("line " + std::to_string(n) + ": short face");
      std::vector<std::int64_t> poly;
      for (std::size_t k = 1; k < tok.size(); ++k) {
        auto v = tok[k].substr(0, tok[k].find('/'));
        std::int64_t idx = parse_int(v, n);
        if (idx < 0) idx = static_cast<std::int64_t>(verts.size()) + idx;
        else if (idx > 0) idx -= 1;
        else throw ParseError("line " + std::to_string(n) + ": zero face index");
        poly.push_back(idx);
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        tris.push_back({poly[0], poly[k], poly[k + 1]});
    }
    return true;
  });
  if (tris.empty()) throw EmptyMesh("OBJ has no faces");
  return make_mesh(verts, tris);
}

inline TriangleMesh parse_ply_ascii(const std::string& text) {
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;  // scalar names; list props are named "list:<name>"
  };
  std::vector<Element> elements;
  std::size_t body_start_line = 0;
  bool saw_magic = false, saw_format = false;
  for_each_line(text, [&](std::string_view line, std::size_t n) {
    const auto tok = split_ws(line);
    if (n == 1) {
      if (tok.empty() || tok[0] != "ply") throw ParseError("missing 'ply' magic");
      saw_magic = true;
      return true;
    }
    if (tok.empty()) return true;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii")
        throw ParseError("only ASCII PLY is supported");
      saw_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() < 3) throw ParseError("line " + std::to_string(n) + ": bad element");
      elements.push_back({std::string(tok[1]),
                          static_cast<std::size_t>(parse_int(tok[2], n)), {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError("property before element");
      if (tok.size() >= 5 && tok[1] == "list")
        elements.back().props.push_back("list:" + std::string(tok[4]));
      else if (tok.size() >= 3)
        elements.back().props.emplace_back(tok[2]);
      else
        throw ParseError("line " + std::to_string(n) + ": bad property");
    } else if (tok[0] == "end_header") {
      body_start_line = n + 1;
      return false;
    }
    return true;
  });
  if (!saw_magic || !saw_format || body_start_line == 0)
    throw ParseError("incomplete PLY header");

  std::vector<Vec3> verts;
  std::vector<std::array<std::int64_t, 3>> tris;
  std::size_t elem = 0, row = 0;
  for_each_line(text, [&](std::string_view line, std::size_t n) {
    if (n < body_start_line) return true;
    while (elem < elements.size() && row >= elements[elem].count) {
      ++elem;
      row = 0;
    }
    const auto tok = split_ws(line);
    if (elem >= elements.size()) {
      if (!tok.empty()) throw ParseError("line " + std::to_string(n) + ": trailing data");
      return true;
    }
    if (tok.empty()) throw ParseError("line " + std::to_string(n) + ": empty element row");
    const Element& e = elements[elem];
    if (e.name == "vertex") {
      double xyz[3] = {0, 0, 0};
      int found = 0;
      std::size_t t = 0;
      for (const auto& p : e.props) {
        if (t >= tok.size()) throw ParseError("line " + std::to_string(n) + ": short vertex row");
        if (p.rfind("list:", 0) == 0) {
          t += 1 + static_cast<std::size_t>(parse_int(tok[t], n));
          continue;
        }
        if (p == "x" || p == "y" || p == "z") {
          xyz[p[0] - 'x'] = parse_double(tok[t], n);
          ++found;
        }
        ++t;
      }
      if (found != 3) throw ParseError("vertex element lacks x/y/z");
      verts.emplace_back(xyz[0], xyz[1], xyz[2]);
    } else if (e.name == "face") {
      std::size_t t = 0;
      bool got = false;
      for (const auto& p : e.props) {
        if (t >= tok.size()) throw ParseError("line " + std::to_string(n) + ": short face row");
        if (p == "list:vertex_indices" || p == "list:vertex_index") {
          const auto cnt = static_cast<std::size_t>(parse_int(tok[t], n));
          if (cnt < 3 || t + cnt >= tok.size())
            throw ParseError("line " + std::to_string(n) + ": bad face list");
          std::vector<std::int64_t> poly;
          for (std::size_t k = 0; k < cnt; ++k) poly.push_back(parse_int(tok[t + 1 + k], n));
          for (std::size_t k = 1; k + 1 < poly.size(); ++k)
            tris.push_back({poly[0], poly[k], poly[k + 1]});
          t += 1 + cnt;
          got = true;
        } else if (p.rfind("list:", 0) == 0) {
          t += 1 + static_cast<std::size_t>(parse_int(tok[t], n));
        } else {
          ++t;
        }
      }
      if (!got) throw ParseError("face element lacks vertex_indices");
    }
    ++row;
    return true;
  });
  while (elem < elements.size() && row >= elements[elem].count) {
    ++elem;
    row = 0;
  }
  if (elem < elements.size()) throw ParseError("PLY body ended early");
  if (tris.empty()) throw EmptyMesh("PLY has no faces");
  return make_mesh(verts, tris);
}

}  // namespace detail

inline TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  const std::string text = detail::read_file(path);
  return format == MeshFormat::obj ? detail::parse_obj(text)
                                   : detail::parse_ply_ascii(text);
}

/// Format picked from the file extension (.obj / .ply).
inline TriangleMesh load_mesh(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".obj") return load_mesh(path, MeshFormat::obj);
  if (ext == ".ply") return load_mesh(path, MeshFormat::ply_ascii);
  throw ParseError("unknown mesh extension '" + ext + "'");
}

inline void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

inline void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nelement face "
      << mesh.triangles.size() << "\nproperty list uchar int vertex_indices\nend_header\n";
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

struct MassProperties {
  double volume = 0.0;  // m^3, zero for open meshes
  double mass = 0.0;    // kg
  Vec3 com = Vec3::Zero();
};

/// Mass and centre of mass of a uniform-density solid. Open or flat meshes
/// fall back to a 1 mm shell so the result always has positive mass.
inline MassProperties mass_properties(const TriangleMesh& mesh,
                                      double density = kDefaultDensity) {
  double vol6 = 0.0;
  Vec3 moment = Vec3::Zero();
  for (std::size_t t = 0; t < mesh.size(); ++t) {
    const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
    const double v = a.dot(b.cross(c));
    vol6 += v;
    moment += v * (a + b + c);
  }
  MassProperties mp;
  const double area = mesh.surface_area();
  if (std::abs(vol6) / 6.0 > 1e-15) {
    mp.volume = std::abs(vol6) / 6.0;
    mp.com = moment / (4.0 * vol6);
    mp.mass = density * mp.volume;
  } else {
    constexpr double shell = 1e-3;
    Vec3 c = Vec3::Zero();
    for (std::size_t t = 0; t < mesh.size(); ++t)
      c += mesh.areas[t] * (mesh.corner(t, 0) + mesh.corner(t, 1) + mesh.corner(t, 2)) / 3.0;
    mp.com = c / area;
    mp.mass = density * area * shell;
  }
  return mp;
}

// ---------------------------------------------------------------------------
// Point clouds
// ---------------------------------------------------------------------------

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  Vec3 centroid = Vec3::Zero();
  double mass_kg = 1.0;
  Vec3 com = Vec3::Zero();

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  Aabb bounds() const {
    Aabb box;
    for (const auto& p : points) box.extend(p);
    return box;
  }
};

/// Assembles a cloud, normalising the normals and caching the centroid.
inline PointCloud make_cloud(std::vector<Vec3> points, std::vector<Vec3> normals,
                             double mass_kg, const Vec3& com) {
  if (points.size() != normals.size())
    throw ValidationError("points and normals differ in length");
  if (!(mass_kg > 0.0)) throw ValidationError("mass must be positive");
  PointCloud cloud;
  for (auto& n : normals) {
    const double len = n.norm();
    if (!(len > 0.0)) throw ValidationError("zero-length normal");
    n /= len;
  }
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  if (!points.empty()) c /= static_cast<double>(points.size());
  cloud.points = std::move(points);
  cloud.normals = std::move(normals);
  cloud.centroid = c;
  cloud.mass_kg = mass_kg;
  cloud.com = com;
  return cloud;
}

inline PointCloud transform(const PointCloud& cloud, const Pose& pose) {
  PointCloud out = cloud;
  for (auto& p : out.points) p = pose.apply(p);
  for (auto& n : out.normals) n = pose.rotation * n;
  out.centroid = pose.apply(cloud.centroid);
  out.com = pose.apply(cloud.com);
  return out;
}

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(unit_double(rng) * static_cast<double>(n)) % n;
}

}  // namespace detail

/// Area-weighted surface sampling. Each point carries its triangle's normal;
/// mass and centre of mass come from the mesh volume at `density`.
inline PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed,
                                 double density = kDefaultDensity) {
  if (mesh.triangles.empty()) throw EmptyMesh("cannot sample an empty mesh");
  if (n < 100) throw std::invalid_argument("sample_surface needs n >= 100");
  std::vector<double> cdf(mesh.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < mesh.size(); ++t) cdf[t] = (acc += mesh.areas[t]);

  std::mt19937_64 rng(seed);
  std::vector<Vec3> pts, nrm;
  pts.reserve(n);
  nrm.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = detail::unit_double(rng) * acc;
    auto t = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    t = std::min(t, mesh.size() - 1);
    const double r1 = std::sqrt(detail::unit_double(rng));
    const double r2 = detail::unit_double(rng);
    const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
    pts.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
    nrm.push_back(mesh.triangle_normal(t));
  }
  const auto mp = mass_properties(mesh, density);
  return make_cloud(std::move(pts), std::move(nrm), mp.mass, mp.com);
}

inline constexpr std::size_t kOrientNeighbors = 10;
inline constexpr int kOrientPasses = 2;

namespace detail {

/// True when some point other than the origin's neighbourhood lies within
/// `rho` of the ray o + t d for t in (rho, t_max].
inline bool ray_hits_cloud(const PointGrid& grid, const Vec3& o, const Vec3& d, double rho,
                           double t_max) {
  const double step = grid.cell_size();
  for (double t0 = 0.0; t0 < t_max; t0 += step) {
    const Vec3 a = o + t0 * d, b = o + std::min(t0 + step, t_max) * d;
    const Vec3 lo = a.cwiseMin(b).array() - rho, hi = a.cwiseMax(b).array() + rho;
    bool hit = false;
    grid.for_each_in_box(lo, hi, [&](std::uint32_t j) {
      const Vec3 v = grid.point(j) - o;
      const double t = v.dot(d);
      if (t > rho && t <= t_max + rho && (v - t * d).squaredNorm() <= rho * rho) hit = true;
      return !hit;
    });
    if (hit) return true;
  }
  return false;
}

}  // namespace detail

/// Consistent outward normals.
///
/// Each normal is first signed by a visibility test: when exactly one of the
/// rays p + t n and p - t n escapes the cloud, that side is outward. When both
/// or neither escape, the convex test dot(n, p - com) >= 0 decides (ties
/// broken towards the lexicographically positive direction). Two Jacobi
/// passes of majority voting over the 10-nearest-neighbour graph then flip
/// normals that disagree with most of their neighbours. The result depends
/// only on the normal lines, not on their incoming signs, so the operation is
/// idempotent.
inline PointCloud reorient_normals(const PointCloud& cloud) {
  PointCloud out = cloud;
  const std::size_t n = cloud.size();
  if (n == 0) return out;

  const Aabb box = cloud.bounds();
  const Vec3 ext = (box.hi - box.lo).cwiseMax(1e-9);
  const double area = 2.0 * (ext.x() * ext.y() + ext.y() * ext.z() + ext.z() * ext.x());
  const double spacing = std::sqrt(area / static_cast<double>(n));
  const double cell = std::max(2.0 * spacing, 1e-9);
  const PointGrid grid(cloud.points, cell);
  const double reach = ext.norm();

  for (std::size_t i = 0; i < n; ++i) {
    Vec3& nr = out.normals[i];
    const bool hit_pos = detail::ray_hits_cloud(grid, cloud.points[i], nr, spacing, reach);
    const bool hit_neg = detail::ray_hits_cloud(grid, cloud.points[i], -nr, spacing, reach);
    if (hit_pos != hit_neg) {
      if (hit_pos) nr = -nr;
      continue;
    }
    const double d = nr.dot(cloud.points[i] - cloud.com);
    bool flip = d < 0.0;
    if (d == 0.0) {
      for (int k = 0; k < 3; ++k)
        if (nr[k] != 0.0) {
          flip = nr[k] < 0.0;
          break;
        }
    }
    if (flip) nr = -nr;
  }
  if (n <= 1) return out;

  std::vector<std::vector<std::uint32_t>> nbrs(n);
  for (std::uint32_t i = 0; i < n; ++i)
    nbrs[i] = grid.knn(cloud.points[i], kOrientNeighbors, i);

  for (int pass = 0; pass < kOrientPasses; ++pass) {
    const std::vector<Vec3> prev = out.normals;
    for (std::size_t i = 0; i < n; ++i) {
      int agree = 0, disagree = 0;
      for (auto j : nbrs[i]) {
        const double d = prev[i].dot(prev[j]);
        agree += d > 0.0;
        disagree += d < 0.0;
      }
      if (disagree > agree) out.normals[i] = -prev[i];
    }
  }
  return out;
}

}  // namespace graspgen
