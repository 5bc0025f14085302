#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "graspgen/dataset.hpp"
#include "graspgen/errors.hpp"
#include "graspgen/generator.hpp"
#include "graspgen/gripper.hpp"
#include "graspgen/stability.hpp"

namespace graspgen {

/// Everything one CLI invocation needs. Config files hold `key = value`
/// lines; `#` starts a comment.
struct PipelineConfig {
  std::filesystem::path mesh;
  std::filesystem::path gripper_config;
  std::filesystem::path in;
  std::filesystem::path out;
  DatasetFormat format = DatasetFormat::jsonl;

  GripperConfig gripper;
  GenOptions gen;
  StabilityOptions stability;

  std::string object_id = "object";
  std::size_t n_points = 5000;
  double density = kDefaultDensity;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::size_t target_count = 300;
  double timeout_sec = 600.0;
  std::size_t baseline_samples = 200;
  bool write_regions = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("bad value for '" + key + "': '" + v + "'");
  return out;
}

}  // namespace detail

/// Applies a flat config text to `cfg`. Unknown keys are errors.
inline void apply_config_text(PipelineConfig& cfg, const std::string& text) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto dbl = [](double& dst) -> Setter {
    return [&dst](const std::string& k, const std::string& v) {
      dst = detail::parse_number<double>(k, v);
    };
  };
  auto size = [](std::size_t& dst) -> Setter {
    return [&dst](const std::string& k, const std::string& v) {
      dst = detail::parse_number<std::size_t>(k, v);
    };
  };
  const std::map<std::string, Setter> setters = {
      {"max_width", dbl(cfg.gripper.max_width)},
      {"finger_length", dbl(cfg.gripper.finger_length)},
      {"finger_thickness", dbl(cfg.gripper.finger_thickness)},
      {"finger_height", dbl(cfg.gripper.finger_height)},
      {"max_contact_force", dbl(cfg.gripper.max_contact_force)},
      {"friction_mu", dbl(cfg.gripper.friction_mu)},
      {"close_speed", dbl(cfg.gripper.close_speed)},
      {"n_dirs", size(cfg.gen.n_dirs)},
      {"n_rolls", size(cfg.gen.n_rolls)},
      {"eps_p", dbl(cfg.gen.eps_p)},
      {"eps_r", dbl(cfg.gen.eps_r)},
      {"normal_slack_deg", dbl(cfg.gen.normal_slack_deg)},
      {"seed",
       [&](const std::string& k, const std::string& v) {
         cfg.seed = detail::parse_number<std::uint64_t>(k, v);
       }},
      {"n_points", size(cfg.n_points)},
      {"density", dbl(cfg.density)},
      {"displacement_threshold", dbl(cfg.stability.displacement_threshold)},
      {"symmetry_tol", dbl(cfg.stability.symmetry_tol)},
      {"patch_radius", dbl(cfg.stability.patch_radius)},
      {"baseline_samples", size(cfg.baseline_samples)},
      {"object_id", [&](const std::string&, const std::string& v) { cfg.object_id = v; }},
  };
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + key + "'");
    it->second(key, value);
  }
}

inline void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

inline void validate(const PipelineConfig& cfg) {
  cfg.gripper.validate();
  if (cfg.gen.n_dirs == 0 || cfg.gen.n_rolls == 0)
    throw ConfigError("n_dirs and n_rolls must be positive");
  if (cfg.gen.eps_p < 0 || !(cfg.gen.eps_r > 0)) throw ConfigError("bad dedup bins");
  if (cfg.n_points < 100) throw ConfigError("n_points must be at least 100");
  if (!(cfg.density > 0)) throw ConfigError("density must be positive");
  if (cfg.jobs == 0) throw ConfigError("jobs must be at least 1");
}

}  // namespace graspgen
