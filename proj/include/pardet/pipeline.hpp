#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pardet/config.hpp"

namespace pardet {

// Stage-file pipeline: each command reads only the serialized artifacts of
// the previous stage, so stages are restartable and scriptable.
//
//   out/config.json              config snapshot with hash
//   out/scenes/scene_NNNN.json   scene descriptions
//   out/scenes/manifest.json     scene list, split membership, mesh hashes
//   out/clouds/scene_NNNN.cloud  simulated clouds (binary)
//   out/truth/scene_NNNN.json    culled targets + normalization scale
//   out/preds/scene_NNNN.json    stub predictions
//   out/eval/report.{json,txt}   metrics; errors.csv per-match rows
//   out/eval/timing.csv          wall clock (excluded from artifact hashing)

void run_gen_scenes(const PipelineConfig& cfg, const std::string& out_dir, int count);
void run_scan(const PipelineConfig& cfg, const std::string& out_dir, int workers = 0);
void run_predict_stub(const PipelineConfig& cfg, const std::string& out_dir);
EvalReport run_eval(const PipelineConfig& cfg, const std::string& out_dir);
void run_bench(const PipelineConfig& cfg, const std::string& out_dir,
               const std::vector<size_t>& budgets, int capture_scenes = 4);
EvalReport run_all(const PipelineConfig& cfg, const std::string& out_dir, int count,
                   int workers = 0);

// Hashes of every deterministic artifact under out_dir (timing files and
// *.tmp excluded), keyed by relative path.
std::map<std::string, uint64_t> hash_artifacts(const std::string& out_dir);

int scene_count_on_disk(const std::string& out_dir);

}  // namespace pardet
