#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <vector>

#include "graspgen/bench.hpp"
#include "graspgen/config.hpp"
#include "graspgen/dataset.hpp"
#include "graspgen/generator.hpp"
#include "graspgen/geometry.hpp"
#include "graspgen/scoring.hpp"
#include "graspgen/stability.hpp"

namespace graspgen {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitNoGrasps = 2, kExitTimeout = 3 };

/// Surface cloud of the configured mesh with outward normals.
inline PointCloud load_cloud(const PipelineConfig& cfg) {
  if (cfg.mesh.empty()) throw ConfigError("--mesh is required");
  if (!std::filesystem::exists(cfg.mesh)) throw IoError("mesh not found: " + cfg.mesh.string());
  const auto mesh = load_mesh(cfg.mesh);
  return reorient_normals(sample_surface(mesh, cfg.n_points, cfg.seed, cfg.density));
}

struct GenerateResult {
  std::size_t candidates = 0;
  std::size_t survivors = 0;
  std::vector<GraspRecord> records;
  std::vector<ClosingRegionExtract> regions;
};

/// generate -> dedup -> score; keeps grasps with a positive score.
inline GenerateResult run_generation(const PointCloud& cloud, const PipelineConfig& cfg) {
  GenOptions opts = cfg.gen;
  opts.seed = cfg.seed;
  opts.jobs = cfg.jobs;
  const auto orients = sample_orientations(opts.n_dirs, opts.n_rolls);
  auto cands = generate(cloud, cfg.gripper, orients, opts);
  GenerateResult res;
  res.candidates = cands.size();
  cands = dedup(std::move(cands), opts.position_bin(cfg.gripper), opts.eps_r);
  res.survivors = cands.size();
  for (const auto& c : cands) {
    const auto q = score(c.contacts);
    if (q.score <= 0.0) continue;
    res.records.push_back(make_record(cfg.object_id, c, q, cfg.gripper, true));
  }
  if (res.records.empty()) throw NoGraspsFound("no candidate reached force closure");
  if (cfg.write_regions) {
    for (std::uint32_t k = 0; k < res.records.size(); ++k) {
      const auto pose = res.records[k].pose();
      try {
        res.regions.push_back(
            make_extract(k, pose, extract_closing_region(pose, cloud, cfg.gripper), cloud));
      } catch (const EmptyRegion&) {
      }
    }
  }
  return res;
}

namespace detail {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const NoGraspsFound& e) {
    err << e.what() << '\n';
    return kExitNoGrasps;
  } catch (const BenchTimeout& e) {
    err << e.what() << '\n';
    return kExitTimeout;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitError;
  }
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void require_out(const PipelineConfig& cfg) {
  if (cfg.out.empty()) throw ConfigError("--out is required");
}

inline std::filesystem::path with_suffix(const std::filesystem::path& p, const char* suffix) {
  auto q = p;
  q += suffix;
  return q;
}

}  // namespace detail

inline int cmd_generate(const PipelineConfig& cfg, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    validate(cfg);
    detail::require_out(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto cloud = load_cloud(cfg);
    const auto res = run_generation(cloud, cfg);
    const auto n = export_dataset(res.records, res.regions, cfg.out, cfg.format);
    out << "candidates = " << res.candidates << '\n'
        << "survivors = " << res.survivors << '\n'
        << "grasps = " << n << '\n'
        << "seconds = " << detail::seconds_since(t0) << '\n';
    return kExitOk;
  });
}

inline int cmd_baseline(const PipelineConfig& cfg, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    validate(cfg);
    detail::require_out(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto cloud = load_cloud(cfg);
    const auto cands = antipodal_generate(cloud, cfg.gripper, cfg.baseline_samples, cfg.seed);
    std::vector<GraspRecord> records;
    for (const auto& c : cands) {
      const auto q = score(c.contacts);
      if (q.score > 0.0) records.push_back(make_record(cfg.object_id, c, q, cfg.gripper, false));
    }
    const auto n = export_dataset(records, {}, cfg.out, cfg.format);
    out << "candidates = " << cands.size() << '\n'
        << "grasps = " << n << '\n'
        << "seconds = " << detail::seconds_since(t0) << '\n';
    return kExitOk;
  });
}

/// Rescores `in`, writes survivors to `out` and the before/after histogram
/// to `out`.stats.csv.
inline int cmd_rescore(const PipelineConfig& cfg, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    validate(cfg);
    detail::require_out(cfg);
    if (cfg.in.empty()) throw ConfigError("--in is required");
    const auto ds = import_dataset(cfg.in);
    const auto cloud = load_cloud(cfg);
    const auto res = rescore_dataset(ds.records, cloud, cfg.gripper, cfg.stability);
    std::vector<std::int64_t> remap(ds.records.size(), -1);
    for (std::size_t k = 0; k < res.kept.size(); ++k) remap[res.kept[k]] = static_cast<std::int64_t>(k);
    std::vector<ClosingRegionExtract> regions;
    for (const auto& ex : ds.regions)
      if (ex.record_ref < remap.size() && remap[ex.record_ref] >= 0) {
        regions.push_back(ex);
        regions.back().record_ref = static_cast<std::uint32_t>(remap[ex.record_ref]);
      }
    export_dataset(res.records, regions, cfg.out, cfg.format);
    std::ostringstream csv;
    write_histogram_csv(csv, res.stats.before, res.stats.after, "count_original",
                        "count_rescored");
    detail::write_atomically(detail::with_suffix(cfg.out, ".stats.csv"), csv.str());
    out << "kept = " << res.records.size() << '\n'
        << "removed = " << res.stats.removed << '\n'
        << "removed_fraction = " << res.stats.removed_fraction() << '\n';
    return kExitOk;
  });
}

/// Writes the key = value report to `out` and the histogram CSV to
/// `out`.csv when an output path is given.
inline int cmd_bench(const PipelineConfig& cfg, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    validate(cfg);
    const auto cloud = load_cloud(cfg);
    GenOptions opts = cfg.gen;
    opts.seed = cfg.seed;
    const auto rep = bench_compare(cloud, cfg.gripper, cfg.target_count, opts, cfg.timeout_sec);
    std::ostringstream text;
    write_report(text, rep);
    out << text.str();
    if (!cfg.out.empty()) {
      detail::write_atomically(cfg.out, text.str());
      std::ostringstream csv;
      write_report_csv(csv, rep);
      detail::write_atomically(detail::with_suffix(cfg.out, ".csv"), csv.str());
    }
    return kExitOk;
  });
}

inline int cmd_stats(const PipelineConfig& cfg, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    if (cfg.in.empty()) throw ConfigError("--in is required");
    const auto ds = import_dataset(cfg.in);
    const auto s = stats(ds.records);
    out << "records = " << s.total << '\n'
        << "removal_fraction = " << s.removal_fraction << '\n'
        << "mean_score = " << s.mean_score << '\n'
        << "median_score = " << s.median_score << '\n'
        << "mean_final_score = " << s.mean_final << '\n'
        << "median_final_score = " << s.median_final << '\n';
    if (!cfg.out.empty()) {
      std::ostringstream csv;
      write_histogram_csv(csv, s.score_hist, s.final_hist, "count_score", "count_final_score");
      detail::write_atomically(cfg.out, csv.str());
    }
    return kExitOk;
  });
}

}  // namespace graspgen
