#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pardet/lidar.hpp"
#include "pardet/matching.hpp"
#include "pardet/stub.hpp"

namespace pardet {

struct EvalConfig {
  double cd_threshold = 0.00125;  // normalized units, strict less-than

  void validate() const;
};

// Detection candidate: a prediction whose argmax class is an object class,
// with its posed 64-point representation in the normalized frame.
struct EvalDetection {
  ObjectClass cls = ObjectClass::NoObject;
  double confidence = 0.0;
  std::vector<Vec3> points;
  int pred_index = -1;
};

struct EvalTargetSet {
  ObjectClass cls = ObjectClass::NoObject;
  std::vector<Vec3> points;
  int target_index = -1;
};

struct EvalMatchLabel {
  int target_index = -1;  // -1 marks a false positive
  double cd = 0.0;
};

// Greedy confidence-descending matching within class: each detection takes
// the unmatched same-class target of minimal Chamfer distance, and counts as
// a true positive iff that distance is strictly below the threshold.
std::vector<EvalMatchLabel> match_for_eval(const std::vector<EvalDetection>& detections,
                                           const std::vector<EvalTargetSet>& targets,
                                           double cd_threshold);

// All-point interpolated average precision. `scored` holds (confidence,
// is_true_positive); throws NoGroundTruth when num_gt == 0.
double average_precision(std::vector<std::pair<double, bool>> scored, int num_gt);

struct Stats {
  int n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population

  void accumulate(const std::vector<double>& values);
};

struct ClassReport {
  ObjectClass cls = ObjectClass::NoObject;
  int tp = 0, fp = 0, fn = 0;
  int num_gt = 0;
  std::optional<double> ap;  // absent when the class has no ground truth
  Stats l2_m, geodesic_deg, yaw_deg;
  std::optional<Stats> opening_deg;  // grippers only
};

struct EvalReport {
  std::vector<ClassReport> per_class;  // gripper, platform, pallet
  double map = 0.0;                    // mean over classes with ground truth
  int map_classes = 0;
};

// One scene's inputs: predictions and targets in the shared normalized frame.
struct SceneEvalInput {
  std::vector<Prediction> preds;
  std::vector<ParamTarget> targets;  // normalized
  FrameScale scale;
};

// Per-match geometric error row (for the CSV dump).
struct MatchErrorRow {
  int scene = 0;
  ObjectClass cls = ObjectClass::NoObject;
  double cd = 0.0;
  double l2_m = 0.0;
  double geodesic_deg = 0.0;
  double yaw_deg = 0.0;
  std::optional<double> opening_deg;
};

EvalReport evaluate_dataset(const std::vector<SceneEvalInput>& scenes, const MeshSet& meshes,
                            const EvalConfig& cfg, std::vector<MatchErrorRow>* rows = nullptr);

std::string format_report_table(const EvalReport& report);

// -- point-accumulation study --------------------------------------------

struct StageTiming {
  std::string stage;
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

struct AccumulationCapture {
  ScanCloud raw;                     // SensorRos frame, meters
  std::vector<ParamTarget> targets;  // same frame, meters
};

struct AccumulationResult {
  size_t budget_points = 0;
  EvalReport report;
  std::vector<StageTiming> timings;  // preprocess, fps, stub, match, eval
};

// Runs ingestion preprocessing at each accumulation budget (a time-prefix of
// the raw capture), then the stub + matching + evaluation chain, reporting
// metrics and per-stage wall-clock statistics.
std::vector<AccumulationResult> accumulation_study(
    const std::vector<AccumulationCapture>& captures, const std::vector<size_t>& budgets,
    const MeshSet& meshes, const StubConfig& stub_cfg, const EvalConfig& eval_cfg,
    size_t fps_budget = 32768, uint64_t seed = 0);

std::string accumulation_table(const std::vector<AccumulationResult>& results);
std::string timings_csv(const std::vector<AccumulationResult>& results);

}  // namespace pardet
