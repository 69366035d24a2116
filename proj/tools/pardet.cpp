#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pardet/error.hpp"
#include "pardet/pipeline.hpp"

namespace {

pardet::PipelineConfig load_config(const std::string& path, uint64_t seed_override,
                                   bool has_seed) {
  pardet::PipelineConfig cfg =
      path.empty() ? pardet::PipelineConfig{} : pardet::PipelineConfig::load(path);
  if (has_seed) cfg.seed = seed_override;
  return cfg;
}

std::vector<size_t> parse_budgets(const std::string& s) {
  std::vector<size_t> budgets;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) budgets.push_back(std::stoull(tok));
  if (budgets.empty()) throw pardet::Error(pardet::ErrorCode::ConfigError, "empty budget list");
  return budgets;
}

void apply_workers(int workers) {
#ifdef _OPENMP
  if (workers > 0) omp_set_num_threads(workers);
#else
  (void)workers;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric 3D object detection pipeline for LiDAR point clouds"};
  app.set_version_flag("--version", pardet::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = "out";
  uint64_t seed = 0;
  bool has_seed = false;
  int count = -1, workers = 0;
  size_t budget_flag = 0;
  std::string ray_table;
  double max_range = 0.0;
  std::string budgets_str = "50000,200000,400000";

  app.add_option("--config", config_path, "pipeline config JSON")->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_option("--workers", workers, "OpenMP thread count (0 = default)");

  auto* gen = app.add_subcommand("gen-scenes", "generate randomized scenes");
  gen->add_option("--count", count, "number of scenes (default from config)");

  auto* scan = app.add_subcommand("scan", "simulate LiDAR scans of generated scenes");
  scan->add_option("--ray-table", ray_table, "ray table CSV (default: builtin pattern)");
  scan->add_option("--max-range", max_range, "maximum hit distance in meters");
  scan->add_option("--budget", budget_flag, "FPS point budget");

  app.add_subcommand("predict-stub", "run the detector stub on scanned clouds");
  app.add_subcommand("eval", "evaluate predictions against ground truth");

  auto* bench = app.add_subcommand("bench", "point-accumulation timing study");
  bench->add_option("--budgets", budgets_str, "comma-separated point budgets")
      ->capture_default_str();

  auto* runall = app.add_subcommand("run-all", "gen-scenes + scan + predict-stub + eval");
  runall->add_option("--count", count, "number of scenes (default from config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    has_seed = seed_opt->count() > 0;
    pardet::PipelineConfig cfg = load_config(config_path, seed, has_seed);
    if (!ray_table.empty()) cfg.lidar.ray_table = ray_table;
    if (max_range > 0.0) cfg.lidar.max_range = max_range;
    if (budget_flag > 0) cfg.lidar.budget = budget_flag;
    int n = count >= 0 ? count : cfg.scene_count;
    apply_workers(workers);

    if (gen->parsed()) {
      pardet::run_gen_scenes(cfg, out_dir, n);
      std::cout << "wrote " << n << " scenes to " << out_dir << "/scenes\n";
    } else if (scan->parsed()) {
      pardet::run_scan(cfg, out_dir, workers);
      std::cout << "scanned " << pardet::scene_count_on_disk(out_dir) << " scenes\n";
    } else if (app.got_subcommand("predict-stub")) {
      pardet::run_predict_stub(cfg, out_dir);
      std::cout << "predictions written to " << out_dir << "/preds\n";
    } else if (app.got_subcommand("eval")) {
      pardet::EvalReport report = pardet::run_eval(cfg, out_dir);
      std::printf("mAP = %.3f\n", report.map);
    } else if (bench->parsed()) {
      pardet::run_bench(cfg, out_dir, parse_budgets(budgets_str));
    } else if (runall->parsed()) {
      pardet::EvalReport report = pardet::run_all(cfg, out_dir, n, workers);
      std::printf("mAP = %.3f\n", report.map);
    }
    return 0;
  } catch (const pardet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pardet::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
