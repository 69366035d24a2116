#include <doctest.h>

#include <cmath>

#include "pardet/error.hpp"
#include "pardet/rng.hpp"
#include "pardet/stub.hpp"

using namespace pardet;

namespace {

std::vector<ParamTarget> sample_targets() {
  std::vector<ParamTarget> targets(3);
  targets[0].cls = ObjectClass::Gripper;
  targets[0].pose.position = {0.2, 0.1, 0.3};
  targets[0].pose.orientation = Quat::from_axis_angle({0, 0, 1}, 0.7);
  targets[0].pose.normalized_frame = true;
  targets[0].opening = 0.4;
  targets[1].cls = ObjectClass::LoadingPlatform;
  targets[1].pose.position = {-0.5, 0.0, 0.1};
  targets[1].pose.orientation = Quat::identity();
  targets[1].pose.normalized_frame = true;
  targets[2].cls = ObjectClass::Pallet;
  targets[2].pose.position = {0.6, -0.4, 0.0};
  targets[2].pose.orientation = Quat::from_axis_angle({0, 0, 1}, -1.2);
  targets[2].pose.normalized_frame = true;
  return targets;
}

ScanCloud sample_cloud() {
  ScanCloud cloud;
  cloud.normalized = true;
  Rng rng(5);
  for (int i = 0; i < 500; ++i)
    cloud.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  return cloud;
}

}  // namespace

TEST_CASE("noiseless oracle stub reproduces targets exactly") {
  StubConfig cfg;  // all zeros, oracle
  auto targets = sample_targets();
  auto preds = stub_predict(targets, sample_cloud(), cfg, 90.0, 11);
  REQUIRE(static_cast<int>(preds.size()) == cfg.queries);

  int object_preds = 0;
  for (const Prediction& p : preds) {
    ObjectClass cls = p.argmax_class();
    if (cls == ObjectClass::NoObject) continue;
    ++object_preds;
    CHECK(p.prob(cls) == 1.0);
    bool matches_some = false;
    for (const ParamTarget& t : targets) {
      if (t.cls != cls) continue;
      if (distance(p.params_for(cls).position, t.pose.position) == 0.0) matches_some = true;
    }
    CHECK(matches_some);
  }
  CHECK(object_preds == 3);
}

TEST_CASE("miss_rate 1 produces zero object predictions") {
  StubConfig cfg;
  cfg.miss_rate = 1.0;
  auto preds = stub_predict(sample_targets(), sample_cloud(), cfg, 90.0, 13);
  for (const Prediction& p : preds) CHECK(p.argmax_class() == ObjectClass::NoObject);
}

TEST_CASE("stub determinism under seed") {
  StubConfig cfg;
  cfg.position_sigma = 0.02;
  cfg.rotation_sigma_deg = 4.0;
  cfg.opening_sigma_deg = 3.0;
  cfg.false_positive_rate = 1.5;
  cfg.miss_rate = 0.2;
  cfg.confidence_model = ConfidenceModel::NoiseCoupled;
  auto a = stub_predict(sample_targets(), sample_cloud(), cfg, 90.0, 99);
  auto b = stub_predict(sample_targets(), sample_cloud(), cfg, 90.0, 99);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    for (int c = 0; c < 4; ++c) CHECK(a[i].class_probs[c] == b[i].class_probs[c]);
    for (int c = 0; c < kNumObjectClasses; ++c)
      CHECK(distance(a[i].params[c].position, b[i].params[c].position) == 0.0);
  }
  auto c = stub_predict(sample_targets(), sample_cloud(), cfg, 90.0, 100);
  bool any_diff = false;
  for (size_t i = 0; i < a.size() && !any_diff; ++i)
    for (int k = 0; k < 4; ++k)
      if (a[i].class_probs[k] != c[i].class_probs[k]) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("noise-coupled confidences live in (0,1) and probs form a simplex") {
  StubConfig cfg;
  cfg.position_sigma = 0.05;
  cfg.rotation_sigma_deg = 10.0;
  cfg.confidence_model = ConfidenceModel::NoiseCoupled;
  cfg.false_positive_rate = 2.0;
  auto preds = stub_predict(sample_targets(), sample_cloud(), cfg, 90.0, 7);
  for (const Prediction& p : preds) {
    double sum = 0.0;
    for (double v : p.class_probs) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    if (p.argmax_class() != ObjectClass::NoObject) {
      CHECK(p.confidence() > 0.0);
      CHECK(p.confidence() < 1.0);
    }
  }
}

TEST_CASE("position noise grows matched distances (statistical monotonicity)") {
  auto mean_offset = [&](double sigma) {
    StubConfig cfg;
    cfg.position_sigma = sigma;
    double total = 0.0;
    int n = 0;
    for (uint64_t seed = 0; seed < 50; ++seed) {
      auto targets = sample_targets();
      auto preds = stub_predict(targets, sample_cloud(), cfg, 90.0, seed);
      for (const Prediction& p : preds) {
        ObjectClass cls = p.argmax_class();
        if (cls == ObjectClass::NoObject) continue;
        double best = 1e9;
        for (const ParamTarget& t : targets)
          if (t.cls == cls) best = std::min(best, distance(p.params_for(cls).position,
                                                            t.pose.position));
        total += best;
        ++n;
      }
    }
    return total / n;
  };
  double m0 = mean_offset(0.0);
  double m1 = mean_offset(0.01);
  double m2 = mean_offset(0.04);
  CHECK(m0 == 0.0);
  CHECK(m1 > m0);
  CHECK(m2 > m1);
}

TEST_CASE("class confusion changes the reported class") {
  StubConfig cfg;
  cfg.class_confusion_rate = 1.0;
  auto targets = sample_targets();
  auto preds = stub_predict(targets, sample_cloud(), cfg, 90.0, 3);
  int mismatches = 0;
  for (const Prediction& p : preds) {
    ObjectClass cls = p.argmax_class();
    if (cls == ObjectClass::NoObject) continue;
    for (const ParamTarget& t : targets)
      if (distance(p.params_for(t.cls).position, t.pose.position) == 0.0 && t.cls != cls)
        ++mismatches;
  }
  CHECK(mismatches == 3);
}

TEST_CASE("stub rejects more targets than queries") {
  StubConfig cfg;
  cfg.queries = 2;
  CHECK_THROWS_AS((void)stub_predict(sample_targets(), sample_cloud(), cfg, 90.0, 1), Error);
}

TEST_CASE("stub rejects invalid configs and raw targets") {
  StubConfig bad;
  bad.miss_rate = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = StubConfig{};
  bad.position_sigma = -0.1;
  CHECK_THROWS_AS(bad.validate(), Error);

  StubConfig cfg;
  std::vector<ParamTarget> raw(1);
  raw[0].cls = ObjectClass::Pallet;  // not normalized
  CHECK_THROWS_AS((void)stub_predict(raw, sample_cloud(), cfg, 90.0, 1), Error);
}
