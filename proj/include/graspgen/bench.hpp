#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <unordered_set>
#include <vector>

#include "graspgen/errors.hpp"
#include "graspgen/generator.hpp"
#include "graspgen/histogram.hpp"
#include "graspgen/scoring.hpp"

namespace graspgen {

struct BenchReport {
  std::size_t target_count = 0;
  unsigned jobs = 1;
  std::size_t ours_count = 0;
  double ours_seconds = 0.0;
  std::size_t baseline_count = 0;
  double baseline_seconds = 0.0;
  std::size_t baseline_samples = 0;
  ScoreHistogram ours_hist;
  ScoreHistogram baseline_hist;

  static double rate(std::size_t n, double s) {
    return s > 0.0 ? static_cast<double>(n) / s : std::numeric_limits<double>::quiet_NaN();
  }
  double ours_rate() const { return rate(ours_count, ours_seconds); }
  double baseline_rate() const { return rate(baseline_count, baseline_seconds); }
  /// NaN when nothing was requested.
  double speedup() const {
    if (target_count == 0) return std::numeric_limits<double>::quiet_NaN();
    return ours_rate() / baseline_rate();
  }
  double histogram_l1() const { return l1_distance(ours_hist, baseline_hist); }
};

inline void write_report(std::ostream& out, const BenchReport& r) {
  out << "target_count = " << r.target_count << '\n'
      << "jobs = " << r.jobs << '\n'
      << "ours_count = " << r.ours_count << '\n'
      << "ours_seconds = " << r.ours_seconds << '\n'
      << "ours_grasps_per_sec = " << r.ours_rate() << '\n'
      << "baseline_count = " << r.baseline_count << '\n'
      << "baseline_samples = " << r.baseline_samples << '\n'
      << "baseline_seconds = " << r.baseline_seconds << '\n'
      << "baseline_grasps_per_sec = " << r.baseline_rate() << '\n'
      << "speedup = " << r.speedup() << '\n'
      << "histogram_l1 = " << r.histogram_l1() << '\n';
}

inline void write_report_csv(std::ostream& out, const BenchReport& r) {
  write_histogram_csv(out, r.ours_hist, r.baseline_hist, "count_ours", "count_baseline");
}

/// Times both generators until each has `target_count` grasps with a
/// positive force-closure score. Our side counts dedup survivors only; the
/// baseline keeps its duplicates. Both run single-threaded.
inline BenchReport bench_compare(const PointCloud& cloud, const GripperConfig& g,
                                 std::size_t target_count, const GenOptions& opts = {},
                                 double timeout_sec = 600.0) {
  using Clock = std::chrono::steady_clock;
  BenchReport rep;
  rep.target_count = target_count;
  rep.jobs = 1;
  if (target_count == 0) return rep;
  auto seconds_since = [](Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  GenOptions o = opts;
  o.jobs = 1;
  const double eps_p = o.position_bin(g);
  {
    const auto t0 = Clock::now();
    const auto orients = sample_orientations(o.n_dirs, o.n_rolls);
    std::unordered_set<std::uint64_t> seen;
    std::vector<CandidateGrasp> batch;
    for (std::size_t first = 0; first < orients.size() && rep.ours_count < target_count;
         ++first) {
      batch = generate_range(cloud, g, orients, o, first, first + 1);
      for (const auto& c : batch) {
        if (!seen.insert(canonical_key(c.pose, eps_p, o.eps_r)).second) continue;
        const auto q = score(c.contacts);
        if (q.score <= 0.0) continue;
        rep.ours_hist.add(q.score);
        if (++rep.ours_count == target_count) break;
      }
      if (seconds_since(t0) > timeout_sec) throw BenchTimeout("orientation sampler");
    }
    rep.ours_seconds = seconds_since(t0);
  }
  {
    const auto t0 = Clock::now();
    AntipodalSampler sampler(cloud, g, o.seed);
    CandidateGrasp c;
    while (rep.baseline_count < target_count) {
      if (!sampler.next(c)) {
        if (seconds_since(t0) > timeout_sec) throw BenchTimeout("antipodal baseline");
        sampler.draw();
        ++rep.baseline_samples;
        continue;
      }
      const auto q = score(c.contacts);
      if (q.score <= 0.0) continue;
      rep.baseline_hist.add(q.score);
      ++rep.baseline_count;
    }
    rep.baseline_seconds = seconds_since(t0);
  }
  return rep;
}

}  // namespace graspgen
