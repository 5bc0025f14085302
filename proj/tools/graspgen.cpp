// graspgen: generate, rescore, benchmark and inspect grasp datasets.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "graspgen/pipeline.hpp"

using namespace graspgen;

int main(int argc, char** argv) {
  CLI::App app{"Parallel-jaw grasp dataset generator"};
  app.require_subcommand(1);

  PipelineConfig cfg;
  std::string mesh, gripper_config, in, out, format = "jsonl";
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--mesh", mesh, "Object mesh (.obj or .ply)");
    sub->add_option("--gripper-config", gripper_config, "key = value config file");
    sub->add_option("--out", out, "Output path");
    sub->add_option("--format", format, "Dataset format")->check(CLI::IsMember({"jsonl", "binary"}));
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { seed = s; seed_given = true; }, "Random seed");
    sub->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* gen = app.add_subcommand("generate", "Orientation-sampled grasps to a dataset");
  add_common(gen);
  gen->add_flag("--regions", cfg.write_regions, "Store closing-region points");

  auto* base = app.add_subcommand("baseline", "Antipodal point-pair grasps to a dataset");
  add_common(base);
  base->add_option("--samples", cfg.baseline_samples, "Number of sampled first contacts");

  auto* rescore = app.add_subcommand("rescore", "Closing simulation and torque filter");
  add_common(rescore);
  rescore->add_option("--in", in, "Dataset to rescore")->required();

  auto* bench = app.add_subcommand("bench", "Time both generators to a grasp count");
  add_common(bench);
  bench->add_option("--target-count", cfg.target_count, "Scored grasps per generator");
  bench->add_option("--timeout-sec", cfg.timeout_sec, "Wall-clock cap per generator");

  auto* st = app.add_subcommand("stats", "Score histograms of a dataset");
  st->add_option("--in", in, "Dataset")->required();
  st->add_option("--out", out, "Histogram CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!gripper_config.empty()) apply_config_file(cfg, gripper_config);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitError;
  }
  if (seed_given) cfg.seed = seed;
  cfg.mesh = mesh;
  cfg.gripper_config = gripper_config;
  cfg.in = in;
  cfg.out = out;
  cfg.format = format == "binary" ? DatasetFormat::binary : DatasetFormat::jsonl;

  if (gen->parsed()) return cmd_generate(cfg);
  if (base->parsed()) return cmd_baseline(cfg);
  if (rescore->parsed()) return cmd_rescore(cfg);
  if (bench->parsed()) return cmd_bench(cfg);
  return cmd_stats(cfg);
}
