#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace graspgen {

/// Uniform hash grid over a static point set.
///
/// Points are bucketed by integer cell coordinates; each bucket keeps its
/// indices in ascending order so every traversal is deterministic. The grid
/// only narrows candidates: callers apply their own exact predicate.
class PointGrid {
 public:
  PointGrid(std::span<const Eigen::Vector3d> points, double cell_size)
      : points_(points.begin(), points.end()), cell_(cell_size) {
    if (!(cell_ > 0.0)) cell_ = 1.0;
    lo_cell_ = {std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
                std::numeric_limits<int>::max()};
    hi_cell_ = {std::numeric_limits<int>::min(), std::numeric_limits<int>::min(),
                std::numeric_limits<int>::min()};
    for (std::uint32_t i = 0; i < points_.size(); ++i) {
      const auto c = cell_of(points_[i]);
      cells_[key(c)].push_back(i);
      for (int d = 0; d < 3; ++d) {
        lo_cell_[d] = std::min(lo_cell_[d], c[d]);
        hi_cell_[d] = std::max(hi_cell_[d], c[d]);
      }
    }
  }

  double cell_size() const { return cell_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Eigen::Vector3d& point(std::uint32_t i) const { return points_[i]; }

  /// Calls f(index) for every point whose cell overlaps [lo, hi]. Returns
  /// early when f returns false.
  template <class F>
  bool for_each_in_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                       F&& f) const {
    if (points_.empty()) return true;
    auto a = cell_of(lo);
    auto b = cell_of(hi);
    for (int d = 0; d < 3; ++d) {
      a[d] = std::max(a[d], lo_cell_[d]);
      b[d] = std::min(b[d], hi_cell_[d]);
      if (a[d] > b[d]) return true;
    }
    for (int x = a[0]; x <= b[0]; ++x)
      for (int y = a[1]; y <= b[1]; ++y)
        for (int z = a[2]; z <= b[2]; ++z) {
          auto it = cells_.find(key({x, y, z}));
          if (it == cells_.end()) continue;
          for (std::uint32_t idx : it->second)
            if (!f(idx)) return false;
        }
    return true;
  }

  /// k nearest neighbours of q ordered by (distance, index). `exclude` is
  /// skipped (pass the query's own index for neighbourhood graphs).
  std::vector<std::uint32_t> knn(
      const Eigen::Vector3d& q, std::size_t k,
      std::uint32_t exclude = std::numeric_limits<std::uint32_t>::max()) const {
    using Entry = std::pair<double, std::uint32_t>;
    std::vector<Entry> best;  // max-heap on (dist, index)
    if (k == 0 || points_.empty()) return {};
    const auto qc = cell_of(q);
    int max_ring = 0;
    for (int d = 0; d < 3; ++d)
      max_ring = std::max({max_ring, std::abs(qc[d] - lo_cell_[d]),
                           std::abs(hi_cell_[d] - qc[d])});
    auto visit = [&](std::uint32_t idx) {
      if (idx == exclude) return;
      const Entry e{(points_[idx] - q).squaredNorm(), idx};
      if (best.size() < k) {
        best.push_back(e);
        std::push_heap(best.begin(), best.end());
      } else if (e < best.front()) {
        std::pop_heap(best.begin(), best.end());
        best.back() = e;
        std::push_heap(best.begin(), best.end());
      }
    };
    // Rings are walked shell by shell. Once the walk has touched more cells
    // than the grid holds, a linear scan is cheaper and gives the same answer.
    const std::size_t budget = 4 * cells_.size() + 64;
    std::size_t visited = 0;
    bool exhaustive = false;
    for (int r = 0; r <= max_ring && !exhaustive; ++r) {
      for (int x = qc[0] - r; x <= qc[0] + r && !exhaustive; ++x)
        for (int y = qc[1] - r; y <= qc[1] + r; ++y) {
          const bool side = std::abs(x - qc[0]) == r || std::abs(y - qc[1]) == r;
          const int step = side || r == 0 ? 1 : 2 * r;
          for (int z = qc[2] - r; z <= qc[2] + r; z += step) {
            ++visited;
            auto it = cells_.find(key({x, y, z}));
            if (it == cells_.end()) continue;
            for (std::uint32_t idx : it->second) visit(idx);
          }
          if (visited > budget) {
            exhaustive = true;
            break;
          }
        }
      // Anything in ring r+1 or beyond is at least r cells away.
      const double reach = r * cell_;
      if (best.size() == k && best.front().first <= reach * reach) break;
    }
    if (exhaustive) {
      best.clear();
      for (std::uint32_t idx = 0; idx < points_.size(); ++idx) visit(idx);
    }
    std::sort_heap(best.begin(), best.end());
    std::vector<std::uint32_t> out;
    out.reserve(best.size());
    for (const auto& e : best) out.push_back(e.second);
    return out;
  }

  std::uint32_t nearest(const Eigen::Vector3d& q) const {
    const auto r = knn(q, 1);
    return r.empty() ? std::numeric_limits<std::uint32_t>::max() : r.front();
  }

 private:
  using Cell = std::array<int, 3>;

  Cell cell_of(const Eigen::Vector3d& p) const {
    return {static_cast<int>(std::floor(p.x() / cell_)),
            static_cast<int>(std::floor(p.y() / cell_)),
            static_cast<int>(std::floor(p.z() / cell_))};
  }

  static std::uint64_t key(const Cell& c) {
    constexpr std::uint64_t mask = (1ULL << 21) - 1;
    return ((static_cast<std::uint64_t>(c[0]) & mask) << 42) |
           ((static_cast<std::uint64_t>(c[1]) & mask) << 21) |
           (static_cast<std::uint64_t>(c[2]) & mask);
  }

  std::vector<Eigen::Vector3d> points_;
  double cell_;
  Cell lo_cell_{}, hi_cell_{};
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

/// Dense grid over the bounding box of a small point set, for repeated
/// nearest-distance queries. Cells are stored in one flat index array.
class DenseGrid {
 public:
  static constexpr int kMaxDim = 16;

  DenseGrid(std::span<const Eigen::Vector3d> points, double cell_size)
      : points_(points.begin(), points.end()) {
    if (points_.empty()) return;
    lo_ = hi_ = points_.front();
    for (const auto& p : points_) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    const double span = (hi_ - lo_).maxCoeff();
    cell_ = std::max({cell_size, span / kMaxDim, 1e-12});
    for (int d = 0; d < 3; ++d)
      dim_[d] = std::min(kMaxDim, static_cast<int>((hi_[d] - lo_[d]) / cell_) + 1);
    start_.assign(static_cast<std::size_t>(dim_[0]) * dim_[1] * dim_[2] + 1, 0);
    std::vector<std::uint32_t> cell_of_point(points_.size());
    for (std::uint32_t i = 0; i < points_.size(); ++i) {
      cell_of_point[i] = flat(coord(points_[i]));
      ++start_[cell_of_point[i] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    order_.resize(points_.size());
    auto fill = start_;
    for (std::uint32_t i = 0; i < points_.size(); ++i) order_[fill[cell_of_point[i]]++] = i;
  }

  bool empty() const { return points_.empty(); }

  /// Euclidean distance from q to the closest point; infinity when empty.
  double nearest_distance(const Eigen::Vector3d& q) const {
    double best = std::numeric_limits<double>::infinity();
    if (points_.empty()) return best;
    // Rings of cells around q's (possibly outside) cell. Rings closer than
    // the grid are empty and rings past its far side hold nothing new.
    std::array<std::int64_t, 3> qc;
    std::int64_t first = 0, last = 0;
    for (int d = 0; d < 3; ++d) {
      const double f = std::floor((q[d] - lo_[d]) / cell_);
      qc[d] = static_cast<std::int64_t>(std::clamp(f, -1e15, 1e15));
      const std::int64_t below = -qc[d], above = qc[d] - (dim_[d] - 1);
      first = std::max({first, below, above});
      last = std::max({last, std::abs(qc[d]), std::abs(dim_[d] - 1 - qc[d])});
    }
    auto clamp_axis = [&](int d, std::int64_t v) {
      return std::clamp<std::int64_t>(v, 0, dim_[d] - 1);
    };
    for (std::int64_t r = first; r <= last; ++r) {
      const auto x0 = clamp_axis(0, qc[0] - r), x1 = clamp_axis(0, qc[0] + r);
      const auto y0 = clamp_axis(1, qc[1] - r), y1 = clamp_axis(1, qc[1] + r);
      for (auto x = x0; x <= x1; ++x)
        for (auto y = y0; y <= y1; ++y) {
          const bool side = std::abs(x - qc[0]) == r || std::abs(y - qc[1]) == r;
          auto visit_z = [&](std::int64_t z) {
            if (z < 0 || z >= dim_[2]) return;
            const auto c = flat({static_cast<int>(x), static_cast<int>(y), static_cast<int>(z)});
            for (auto k = start_[c]; k < start_[c + 1]; ++k)
              best = std::min(best, (points_[order_[k]] - q).squaredNorm());
          };
          if (side) {
            for (auto z = clamp_axis(2, qc[2] - r); z <= clamp_axis(2, qc[2] + r); ++z) visit_z(z);
          } else {
            visit_z(qc[2] - r);
            if (r > 0) visit_z(qc[2] + r);
          }
        }
      // Everything not yet visited lies outside the cube of rings 0..r.
      double reach = std::numeric_limits<double>::infinity();
      for (int d = 0; d < 3; ++d) {
        const double lo = lo_[d] + static_cast<double>(qc[d] - r) * cell_;
        const double hi = lo_[d] + static_cast<double>(qc[d] + r + 1) * cell_;
        reach = std::min({reach, q[d] - lo, hi - q[d]});
      }
      if (reach > 0.0 && best <= reach * reach) break;
    }
    return std::sqrt(best);
  }

 private:
  std::array<int, 3> coord(const Eigen::Vector3d& p) const {
    std::array<int, 3> c;
    for (int d = 0; d < 3; ++d)
      c[d] = std::clamp(static_cast<int>(std::floor((p[d] - lo_[d]) / cell_)), 0, dim_[d] - 1);
    return c;
  }
  std::size_t flat(const std::array<int, 3>& c) const {
    return (static_cast<std::size_t>(c[0]) * dim_[1] + c[1]) * dim_[2] + c[2];
  }

  std::vector<Eigen::Vector3d> points_;
  Eigen::Vector3d lo_ = Eigen::Vector3d::Zero(), hi_ = Eigen::Vector3d::Zero();
  double cell_ = 1.0;
  std::array<int, 3> dim_{1, 1, 1};
  std::vector<std::uint32_t> start_, order_;
};

}  // namespace graspgen
