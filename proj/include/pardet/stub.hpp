#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pardet/lidar.hpp"
#include "pardet/matching.hpp"

namespace pardet {

enum class ConfidenceModel { Oracle, NoiseCoupled };

ConfidenceModel confidence_model_from_name(const std::string& name);
const char* confidence_model_name(ConfidenceModel m);

// Synthetic prediction generator standing in for the trained network: ground
// truth corrupted by configurable noise, misses, confusions, and false
// positives, emitted over K query slots.
struct StubConfig {
  double position_sigma = 0.0;      // normalized units
  double rotation_sigma_deg = 0.0;
  double opening_sigma_deg = 0.0;
  double class_confusion_rate = 0.0;
  double false_positive_rate = 0.0;  // expected count per scene
  double miss_rate = 0.0;
  ConfidenceModel confidence_model = ConfidenceModel::Oracle;
  int queries = 128;  // K

  void validate() const;
};

// Targets must be in the normalized frame; |targets| <= K. Deterministic
// under seed. Query points come from farthest point sampling of the cloud.
std::vector<Prediction> stub_predict(const std::vector<ParamTarget>& targets,
                                     const ScanCloud& normalized_cloud, const StubConfig& cfg,
                                     double alpha_max_deg, uint64_t seed);

}  // namespace pardet
