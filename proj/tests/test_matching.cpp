#include <doctest.h>

#include <cmath>

#include "pardet/error.hpp"
#include "pardet/matching.hpp"
#include "pardet/reference.hpp"
#include "pardet/rng.hpp"

using namespace pardet;

namespace {

ParamTarget normalized_target(ObjectClass cls, const Vec3& pos, const Quat& q,
                              double opening = 0.0) {
  ParamTarget t;
  t.cls = cls;
  t.pose.position = pos;
  t.pose.orientation = q;
  t.pose.normalized_frame = true;
  if (cls == ObjectClass::Gripper) t.opening = opening;
  return t;
}

Prediction exact_prediction(const ParamTarget& t) {
  Prediction p;
  p.class_probs = {0, 0, 0, 0};
  p.class_probs[static_cast<int>(t.cls)] = 1.0;
  for (int c = 0; c < kNumObjectClasses; ++c) {
    p.params[c].position = t.pose.position;
    p.params[c].orientation = t.pose.orientation;
    p.params[c].opening = t.opening.value_or(0.0);
  }
  return p;
}

std::vector<Vec3> random_points(Rng& rng, int n) {
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts) p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return pts;
}

MeshSet builtin_set(std::vector<ClassMesh>& storage) {
  storage.clear();
  storage.push_back(builtin_class_mesh(ObjectClass::Gripper));
  storage.push_back(builtin_class_mesh(ObjectClass::LoadingPlatform));
  storage.push_back(builtin_class_mesh(ObjectClass::Pallet));
  return MeshSet{&storage[0], &storage[1], &storage[2]};
}

}  // namespace

TEST_CASE("chamfer: identity, hand value, symmetry") {
  std::vector<Vec3> x = {{0, 0, 0}};
  std::vector<Vec3> y = {{1, 0, 0}};
  CHECK(chamfer(x, x) == 0.0);
  CHECK(chamfer(x, y) == 2.0);  // 1.0 each direction

  Rng rng(3);
  auto a = random_points(rng, 64);
  auto b = random_points(rng, 64);
  CHECK(chamfer(a, b) == chamfer(b, a));

  std::vector<Vec3> empty;
  CHECK_THROWS_AS((void)chamfer(empty, y), Error);
}

TEST_CASE("chamfer agrees with the double-loop reference") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_points(rng, 64);
    auto b = random_points(rng, 64);
    CHECK(std::abs(chamfer(a, b) - reference::chamfer(a, b)) <= 1e-12);
  }
  // asymmetric sizes
  auto a = random_points(rng, 17);
  auto b = random_points(rng, 211);
  CHECK(std::abs(chamfer(a, b) - reference::chamfer(a, b)) <= 1e-12);
}

TEST_CASE("chamfer of translated phi sets equals twice the offset") {
  ClassMesh pallet = builtin_class_mesh(ObjectClass::Pallet);
  ParamTarget t0;
  t0.cls = ObjectClass::Pallet;
  ParamTarget t1 = t0;
  t1.pose.position = {0.003, 0.0, 0.0};  // small against the sample spacing
  auto x = phi_points(pallet, t0);
  auto y = phi_points(pallet, t1);
  CHECK(chamfer(x, y) == doctest::Approx(2.0 * 0.003).epsilon(1e-12));
}

TEST_CASE("chamfer is invariant under a shared rigid transform") {
  Rng rng(7);
  auto a = random_points(rng, 40);
  auto b = random_points(rng, 40);
  double base = chamfer(a, b);
  Quat rot = rng.unit_quaternion();
  Vec3 shift{0.3, -0.2, 0.9};
  for (Vec3& p : a) p = rot.rotate(p) + shift;
  for (Vec3& p : b) p = rot.rotate(p) + shift;
  CHECK(chamfer(a, b) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("param_loss branch structure") {
  Rng rng(11);
  Quat q = rng.unit_quaternion();

  ParamTarget pallet = normalized_target(ObjectClass::Pallet, {0.1, 0.2, 0.3}, q);
  Prediction exact = exact_prediction(pallet);
  CHECK(param_loss(exact, pallet) == 0.0);

  // pallet flipped 180 about z: quaternion term vanishes, position term stays
  Prediction flipped = exact;
  for (int c = 0; c < kNumObjectClasses; ++c) {
    flipped.params[c].orientation = rotate_z_180(q);
    flipped.params[c].position = pallet.pose.position + Vec3{0.05, 0.0, 0.0};
  }
  CHECK(param_loss(flipped, pallet) == doctest::Approx(0.05).epsilon(1e-12));

  // gripper with a pure position offset of 0.1 (normalized l1)
  ParamTarget grip = normalized_target(ObjectClass::Gripper, {0, 0, 0}, q, 0.25);
  Prediction off = exact_prediction(grip);
  off.params_for(ObjectClass::Gripper).position = {0.1, 0.0, 0.0};
  CHECK(param_loss(off, grip) == doctest::Approx(0.1).epsilon(1e-12));

  // platform is SignOnly: a z-flip is penalized
  ParamTarget plat = normalized_target(ObjectClass::LoadingPlatform, {0, 0, 0}, q);
  Prediction pflip = exact_prediction(plat);
  pflip.params_for(ObjectClass::LoadingPlatform).orientation = rotate_z_180(q);
  CHECK(param_loss(pflip, plat) > 0.1);
}

TEST_CASE("param_loss r^z-invariance for symmetric classes") {
  Rng rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    Quat q = rng.unit_quaternion();
    Quat qp = rng.unit_quaternion();
    Vec3 pos{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    ParamTarget t = normalized_target(ObjectClass::Pallet, pos, q);
    ParamTarget t_flipped = normalized_target(ObjectClass::Pallet, pos, rotate_z_180(q));
    Prediction p = exact_prediction(t);
    for (int c = 0; c < kNumObjectClasses; ++c) p.params[c].orientation = qp;
    CHECK(std::abs(param_loss(p, t) - param_loss(p, t_flipped)) <= 1e-12);
  }
}

TEST_CASE("param_loss positional monotonicity") {
  Rng rng(17);
  ParamTarget t = normalized_target(ObjectClass::Pallet, {0, 0, 0}, rng.unit_quaternion());
  Prediction p = exact_prediction(t);
  double prev = param_loss(p, t);
  for (double dx : {0.01, 0.02, 0.05, 0.2, 0.7}) {
    p.params_for(ObjectClass::Pallet).position.x = dx;
    double cur = param_loss(p, t);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("match_cost_matrix extremal and uniform cases") {
  Rng rng(19);
  ParamTarget t = normalized_target(ObjectClass::Gripper, {0.1, 0.1, 0.1},
                                    rng.unit_quaternion(), 0.2);
  Prediction perfect = exact_prediction(t);
  CostMatrix m = match_cost_matrix({perfect}, {t});
  CHECK(m.at(0, 0) == -1.0);

  Prediction uniform = perfect;
  uniform.class_probs = {0.25, 0.25, 0.25, 0.25};
  m = match_cost_matrix({uniform}, {t});
  CHECK(m.at(0, 0) == -0.25);

  CHECK_THROWS_AS((void)match_cost_matrix({perfect}, {t, t}), Error);
}

TEST_CASE("match_cost_matrix equals independent per-entry recomputation") {
  Rng rng(23);
  std::vector<ParamTarget> targets;
  targets.push_back(normalized_target(ObjectClass::Gripper,
                                       {rng.uniform(-1, 1), rng.uniform(-1, 1), 0},
                                       rng.unit_quaternion(), rng.uniform(-1, 1)));
  targets.push_back(normalized_target(ObjectClass::LoadingPlatform,
                                       {rng.uniform(-1, 1), rng.uniform(-1, 1), 0},
                                       rng.unit_quaternion()));
  targets.push_back(normalized_target(ObjectClass::Pallet,
                                       {rng.uniform(-1, 1), rng.uniform(-1, 1), 0},
                                       rng.unit_quaternion()));
  std::vector<Prediction> preds(5);
  for (Prediction& p : preds) {
    double a = rng.uniform(0, 1), b = rng.uniform(0, 1 - a), c = rng.uniform(0, 1 - a - b);
    p.class_probs = {1.0 - a - b - c, a, b, c};
    for (int k = 0; k < kNumObjectClasses; ++k) {
      p.params[k].position = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      p.params[k].orientation = rng.unit_quaternion();
      p.params[k].opening = rng.uniform(-1, 1);
    }
  }
  CostMatrix m = match_cost_matrix(preds, targets);

  // scalar recomputation straight from the formula
  auto l1q = [](const Quat& a, const Quat& b) {
    return std::abs(a.w - b.w) + std::abs(a.x - b.x) + std::abs(a.y - b.y) +
           std::abs(a.z - b.z);
  };
  for (size_t j = 0; j < preds.size(); ++j)
    for (size_t i = 0; i < targets.size(); ++i) {
      const ParamTarget& t = targets[i];
      const ClassParams& cp = preds[j].params_for(t.cls);
      Vec3 dp = cp.position - t.pose.position;
      double expected = std::abs(dp.x) + std::abs(dp.y) + std::abs(dp.z);
      double quat_best = std::numeric_limits<double>::infinity();
      std::vector<Quat> orbit = {cp.orientation, -cp.orientation};
      if (t.cls != ObjectClass::LoadingPlatform) {
        orbit.push_back(rotate_z_180(cp.orientation));
        orbit.push_back(-rotate_z_180(cp.orientation));
      }
      for (const Quat& e : orbit) quat_best = std::min(quat_best, l1q(e, t.pose.orientation));
      expected += quat_best;
      if (t.cls == ObjectClass::Gripper)
        expected += std::abs(cp.opening - t.opening.value_or(0.0));
      expected += -preds[j].class_probs[static_cast<int>(t.cls)];
      CHECK(m.at(j, i) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("hungarian: diagonal dominant identity") {
  CostMatrix m;
  m.num_preds = 3;
  m.num_targets = 3;
  m.cost = {0, 1, 1, 1, 0, 1, 1, 1, 0};
  MatchResult r = hungarian_assign(m);
  CHECK(r.target_to_pred == std::vector<int>{0, 1, 2});
  CHECK(r.total_cost == 0.0);
  CHECK(r.unmatched_preds.empty());
}

TEST_CASE("hungarian: tied costs resolve to the lowest prediction index") {
  CostMatrix m;
  m.num_preds = 3;
  m.num_targets = 1;
  m.cost = {0.5, 0.5, 0.5};
  MatchResult r = hungarian_assign(m);
  CHECK(r.target_to_pred[0] == 0);
  REQUIRE(r.unmatched_preds.size() == 2);
  CHECK(r.unmatched_preds[0] == 1);

  CostMatrix z;
  z.num_preds = 2;
  z.num_targets = 2;
  z.cost = {0, 0, 0, 0};
  MatchResult rz = hungarian_assign(z);
  CHECK(rz.target_to_pred == std::vector<int>{0, 1});
}

TEST_CASE("hungarian equals brute-force enumeration on random instances") {
  Rng rng(29);
  for (int trial = 0; trial < 300; ++trial) {
    size_t m_targets = 1 + rng.uniform_int(6);
    size_t k_preds = m_targets + rng.uniform_int(8 - m_targets);
    CostMatrix cm;
    cm.num_preds = k_preds;
    cm.num_targets = m_targets;
    cm.cost.resize(k_preds * m_targets);
    for (double& c : cm.cost) c = rng.uniform(-1.0, 2.0);

    MatchResult fast = hungarian_assign(cm);
    reference::BruteAssignment slow = reference::assignment_bruteforce(cm);
    double fast_cost = 0.0, slow_cost = 0.0;
    for (size_t i = 0; i < m_targets; ++i) {
      fast_cost += cm.at(fast.target_to_pred[i], i);
      slow_cost += cm.at(slow.target_to_pred[i], i);
    }
    CHECK(fast_cost == slow_cost);
    // the assignment is injective
    std::vector<char> used(k_preds, 0);
    for (int j : fast.target_to_pred) {
      CHECK(!used[j]);
      used[j] = 1;
    }
    CHECK(fast.unmatched_preds.size() == k_preds - m_targets);
  }
}

TEST_CASE("match result carries the per-pair cost decomposition") {
  Rng rng(41);
  std::vector<ParamTarget> targets = {
      normalized_target(ObjectClass::Pallet, {0.1, 0.0, 0.0}, rng.unit_quaternion()),
      normalized_target(ObjectClass::Gripper, {-0.3, 0.2, 0.1}, rng.unit_quaternion(), 0.1)};
  std::vector<Prediction> preds(4);
  for (Prediction& p : preds) {
    p.class_probs = {0.4, 0.2, 0.2, 0.2};
    for (int c = 0; c < kNumObjectClasses; ++c) {
      p.params[c].position = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      p.params[c].orientation = rng.unit_quaternion();
      p.params[c].opening = rng.uniform(-1, 1);
    }
  }
  CostMatrix cost = match_cost_matrix(preds, targets);
  MatchResult result = hungarian_assign(cost);
  for (size_t i = 0; i < targets.size(); ++i) {
    int j = result.target_to_pred[i];
    CHECK(result.pair_param_cost[i] == param_loss(preds[j], targets[i]));
    CHECK(result.pair_class_cost[i] ==
          doctest::Approx(-preds[j].prob(targets[i].cls)).epsilon(1e-12));
    CHECK(result.pair_class_cost[i] + result.pair_param_cost[i] ==
          doctest::Approx(cost.at(j, i)).epsilon(1e-12));
  }

  nlohmann::json report = match_report_json(cost, result);
  CHECK(report["schema"] == "pardet/match@1");
  REQUIRE(report["assignment"].size() == 2);
  CHECK(report["assignment"][0].contains("class_cost"));
  CHECK(report["assignment"][0].contains("param_cost"));
  CHECK(report["unmatched_predictions"].size() == 2);
}

TEST_CASE("hungarian rejects non-finite costs") {
  CostMatrix m;
  m.num_preds = 1;
  m.num_targets = 1;
  m.cost = {std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS((void)hungarian_assign(m), Error);
}

TEST_CASE("total_loss trivial values") {
  std::vector<ClassMesh> storage;
  MeshSet meshes = builtin_set(storage);
  FrameScale scale{{0, 0, 0}, 12.5};
  std::array<double, 4> w{1, 1, 1, 1};

  // no-object target with full no-object probability
  Prediction noobj;
  noobj.class_probs = {1, 0, 0, 0};
  LossBreakdown l = total_loss(noobj, std::nullopt, w, meshes, scale);
  CHECK(l.total == 0.0);
  CHECK(l.cross_entropy == 0.0);

  // exact match: all three terms vanish
  Rng rng(31);
  ParamTarget t = normalized_target(ObjectClass::Pallet, {0.2, -0.1, 0.0},
                                    Quat::from_axis_angle({0, 0, 1}, 0.4));
  Prediction exact = exact_prediction(t);
  l = total_loss(exact, t, w, meshes, scale);
  CHECK(l.cross_entropy == 0.0);
  CHECK(l.param == 0.0);
  CHECK(l.chamfer == 0.0);
  CHECK(l.total == 0.0);

  // exact pose, half class probability: total = ln 2
  Prediction half = exact;
  half.class_probs = {0.5, 0, 0, 0.5};
  l = total_loss(half, t, w, meshes, scale);
  CHECK(l.total == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // zero probability hits the 1e-12 floor instead of -inf
  Prediction zero = exact;
  zero.class_probs = {1, 0, 0, 0};
  l = total_loss(zero, t, w, meshes, scale);
  CHECK(std::isfinite(l.total));
  CHECK(l.cross_entropy == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));
}

TEST_CASE("total_loss decomposition has no hidden terms") {
  std::vector<ClassMesh> storage;
  MeshSet meshes = builtin_set(storage);
  FrameScale scale{{0, 0, 0}, 10.0};
  std::array<double, 4> w{0.5, 2.0, 1.0, 0.5};
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    ParamTarget t = normalized_target(ObjectClass::Gripper,
                                      {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0},
                                      rng.unit_quaternion(), rng.uniform(-1, 1));
    Prediction p = exact_prediction(t);
    p.class_probs = {0.1, 0.6, 0.2, 0.1};
    p.params_for(ObjectClass::Gripper).position.x += rng.uniform(-0.1, 0.1);
    LossBreakdown l = total_loss(p, t, w, meshes, scale);
    CHECK(l.total == doctest::Approx(l.cross_entropy + l.param + l.chamfer).epsilon(1e-12));
    CHECK(l.param >= 0.0);
    CHECK(l.chamfer >= 0.0);
  }
}

TEST_CASE("class_weights: balanced, ratios, scale invariance") {
  auto w = class_weights({100, 100, 100, 100});
  for (double x : w) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));

  auto w2 = class_weights({200, 100, 100, 100});
  CHECK(w2[0] == doctest::Approx(w2[1] * 0.5).epsilon(1e-12));

  auto w3 = class_weights({2000, 1000, 1000, 1000});
  for (int c = 0; c < 4; ++c) CHECK(w2[c] == doctest::Approx(w3[c]).epsilon(1e-12));

  double mean = (w2[0] + w2[1] + w2[2] + w2[3]) / 4.0;
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)class_weights({0, 1, 1, 1}), Error);
}
