#include "pardet/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

#include "pardet/error.hpp"
#include "pardet/rng.hpp"

namespace pardet {

void EvalConfig::validate() const {
  if (cd_threshold <= 0.0) throw Error(ErrorCode::ConfigError, "cd_threshold must be > 0");
}

std::vector<EvalMatchLabel> match_for_eval(const std::vector<EvalDetection>& detections,
                                           const std::vector<EvalTargetSet>& targets,
                                           double cd_threshold) {
  std::vector<int> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return detections[a].confidence > detections[b].confidence;
  });

  std::vector<char> target_taken(targets.size(), 0);
  std::vector<EvalMatchLabel> labels(detections.size());
  for (int d : order) {
    const EvalDetection& det = detections[d];
    int best = -1;
    double best_cd = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < targets.size(); ++t) {
      if (target_taken[t] || targets[t].cls != det.cls) continue;
      double cd = chamfer(det.points, targets[t].points);
      if (cd < best_cd) {
        best_cd = cd;
        best = static_cast<int>(t);
      }
    }
    if (best >= 0 && best_cd < cd_threshold) {  // strict, by definition
      labels[d] = {targets[best].target_index, best_cd};
      target_taken[best] = 1;
    } else {
      labels[d] = {-1, best >= 0 ? best_cd : std::numeric_limits<double>::infinity()};
    }
  }
  return labels;
}

double average_precision(std::vector<std::pair<double, bool>> scored, int num_gt) {
  if (num_gt <= 0)
    throw Error(ErrorCode::NoGroundTruth, "AP undefined for a class without ground truth");
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<double> precision(scored.size()), recall(scored.size());
  int tp = 0;
  for (size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].second) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  // precision envelope (all-point interpolation)
  for (int i = static_cast<int>(precision.size()) - 2; i >= 0; --i)
    precision[i] = std::max(precision[i], precision[i + 1]);

  double ap = 0.0, prev_recall = 0.0;
  for (size_t i = 0; i < scored.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

void Stats::accumulate(const std::vector<double>& values) {
  n = static_cast<int>(values.size());
  if (n == 0) return;
  mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  stddev = std::sqrt(var / n);
}

namespace {

ParamTarget prediction_as_target(const Prediction& pred, ObjectClass cls) {
  ParamTarget t;
  t.cls = cls;
  const ClassParams& p = pred.params_for(cls);
  t.pose.position = p.position;
  t.pose.orientation = p.orientation;
  t.pose.normalized_frame = true;
  if (cls == ObjectClass::Gripper) t.opening = p.opening;
  return t;
}

constexpr std::array<ObjectClass, 3> kObjectClasses = {
    ObjectClass::Gripper, ObjectClass::LoadingPlatform, ObjectClass::Pallet};

}  // namespace

EvalReport evaluate_dataset(const std::vector<SceneEvalInput>& scenes, const MeshSet& meshes,
                            const EvalConfig& cfg, std::vector<MatchErrorRow>* rows) {
  cfg.validate();

  struct Collector {
    std::vector<std::pair<double, bool>> scored;
    int num_gt = 0, tp = 0, fp = 0;
    std::vector<double> l2, geo, yaw, opening;
  };
  std::array<Collector, 3> collectors;
  auto slot = [](ObjectClass cls) { return static_cast<int>(cls) - 1; };

  for (size_t s = 0; s < scenes.size(); ++s) {
    const SceneEvalInput& scene = scenes[s];

    std::vector<EvalDetection> dets;
    for (size_t j = 0; j < scene.preds.size(); ++j) {
      const Prediction& pred = scene.preds[j];
      ObjectClass cls = pred.argmax_class();
      if (cls == ObjectClass::NoObject) continue;
      EvalDetection det;
      det.cls = cls;
      det.confidence = pred.prob(cls);
      det.pred_index = static_cast<int>(j);
      det.points = phi_points_normalized(meshes.for_class(cls), prediction_as_target(pred, cls),
                                         scene.scale);
      dets.push_back(std::move(det));
    }

    std::vector<EvalTargetSet> tgts;
    for (size_t i = 0; i < scene.targets.size(); ++i) {
      const ParamTarget& target = scene.targets[i];
      EvalTargetSet t;
      t.cls = target.cls;
      t.target_index = static_cast<int>(i);
      t.points = phi_points_normalized(meshes.for_class(target.cls), target, scene.scale);
      tgts.push_back(std::move(t));
      collectors[slot(target.cls)].num_gt += 1;
    }

    std::vector<EvalMatchLabel> labels = match_for_eval(dets, tgts, cfg.cd_threshold);

    // the matching must stay one-to-one and class-consistent
    std::vector<char> seen(scene.targets.size(), 0);
    for (size_t d = 0; d < dets.size(); ++d) {
      int ti = labels[d].target_index;
      if (ti < 0) continue;
      if (seen[ti] || scene.targets[ti].cls != dets[d].cls)
        throw Error(ErrorCode::InvariantViolation, "eval matching violated one-to-one/class");
      seen[ti] = 1;
    }

    for (size_t d = 0; d < dets.size(); ++d) {
      Collector& col = collectors[slot(dets[d].cls)];
      bool is_tp = labels[d].target_index >= 0;
      col.scored.emplace_back(dets[d].confidence, is_tp);
      if (!is_tp) {
        col.fp += 1;
        continue;
      }
      col.tp += 1;

      const ParamTarget& target = scene.targets[labels[d].target_index];
      const ClassParams& p = scene.preds[dets[d].pred_index].params_for(dets[d].cls);
      SymmetrySet sym = class_symmetry(dets[d].cls);
      double l2 = norm(p.position - target.pose.position) * scene.scale.half_extent;
      double geo = geodesic_error_deg(p.orientation, target.pose.orientation, sym);
      double yaw = 0.0;
      bool yaw_ok = true;
      try {
        yaw = yaw_error_deg(p.orientation, target.pose.orientation, sym);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateYaw) throw;
        yaw_ok = false;
      }
      col.l2.push_back(l2);
      col.geo.push_back(geo);
      if (yaw_ok) col.yaw.push_back(yaw);

      MatchErrorRow row;
      row.scene = static_cast<int>(s);
      row.cls = dets[d].cls;
      row.cd = labels[d].cd;
      row.l2_m = l2;
      row.geodesic_deg = geo;
      row.yaw_deg = yaw_ok ? yaw : std::numeric_limits<double>::quiet_NaN();
      if (dets[d].cls == ObjectClass::Gripper) {
        const ClassMesh& mesh = meshes.for_class(ObjectClass::Gripper);
        double err = std::abs(p.opening - target.opening.value_or(0.0)) *
                     mesh.alpha_max_deg() * 0.5;
        col.opening.push_back(err);
        row.opening_deg = err;
      }
      if (rows) rows->push_back(row);
    }
  }

  EvalReport report;
  double ap_sum = 0.0;
  for (ObjectClass cls : kObjectClasses) {
    Collector& col = collectors[slot(cls)];
    ClassReport cr;
    cr.cls = cls;
    cr.tp = col.tp;
    cr.fp = col.fp;
    cr.num_gt = col.num_gt;
    cr.fn = col.num_gt - col.tp;
    if (col.num_gt > 0) {
      cr.ap = average_precision(col.scored, col.num_gt);
      ap_sum += *cr.ap;
      report.map_classes += 1;
    } else if (!col.scored.empty()) {
      std::cerr << "warning: " << class_name(cls)
                << " has detections but no ground truth; excluded from mAP\n";
    }
    cr.l2_m.accumulate(col.l2);
    cr.geodesic_deg.accumulate(col.geo);
    cr.yaw_deg.accumulate(col.yaw);
    if (cls == ObjectClass::Gripper) {
      Stats s;
      s.accumulate(col.opening);
      cr.opening_deg = s;
    }
    report.per_class.push_back(cr);
  }
  report.map = report.map_classes > 0 ? ap_sum / report.map_classes : 0.0;
  return report;
}

std::string format_report_table(const EvalReport& report) {
  std::ostringstream os;
  auto fmt = [](const Stats& s) {
    std::ostringstream o;
    if (s.n == 0) {
      o << "--";
    } else {
      o.precision(4);
      o << std::fixed << s.mean << " (+/- " << s.stddev << ")";
    }
    return o.str();
  };
  os << "Metric                 Gripper                Loading Platform       Pallet\n";
  os << "---------------------------------------------------------------------------------\n";
  auto row = [&](const std::string& name, const std::array<std::string, 3>& cells) {
    os << name;
    for (size_t i = name.size(); i < 23; ++i) os << ' ';
    for (const std::string& c : cells) {
      os << c;
      for (size_t i = c.size(); i < 23; ++i) os << ' ';
    }
    os << "\n";
  };
  std::array<std::string, 3> l2, geo, yaw, open, ap;
  for (int c = 0; c < 3; ++c) {
    const ClassReport& cr = report.per_class[c];
    l2[c] = fmt(cr.l2_m);
    geo[c] = fmt(cr.geodesic_deg);
    yaw[c] = fmt(cr.yaw_deg);
    open[c] = cr.opening_deg ? fmt(*cr.opening_deg) : "--";
    if (cr.ap) {
      std::ostringstream o;
      o.precision(3);
      o << std::fixed << *cr.ap;
      ap[c] = o.str();
    } else {
      ap[c] = "--";
    }
  }
  row("l2 [m]", l2);
  row("Geodesic [deg]", geo);
  row("Yaw [deg]", yaw);
  row("Opening [deg]", open);
  row("Det. (AP)", ap);
  os.precision(3);
  os << std::fixed << "mAP = " << report.map << " over " << report.map_classes << " classes\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// accumulation study

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct StageClock {
  std::vector<double> preprocess, fps, stub, match, eval;
};

StageTiming summarize(const std::string& name, const std::vector<double>& samples) {
  Stats s;
  s.accumulate(samples);
  return {name, s.mean, s.stddev};
}

}  // namespace

std::vector<AccumulationResult> accumulation_study(
    const std::vector<AccumulationCapture>& captures, const std::vector<size_t>& budgets,
    const MeshSet& meshes, const StubConfig& stub_cfg, const EvalConfig& eval_cfg,
    size_t fps_budget, uint64_t seed) {
  std::vector<AccumulationResult> results;
  const double alpha_max = meshes.for_class(ObjectClass::Gripper).alpha_max_deg();

  for (size_t budget : budgets) {
    StageClock clock;
    std::vector<SceneEvalInput> scenes;

    for (size_t c = 0; c < captures.size(); ++c) {
      const AccumulationCapture& cap = captures[c];
      ScanCloud prefix = cap.raw;
      if (prefix.points.size() > budget) {
        prefix.points.resize(budget);  // accumulation = time prefix of the scan
        if (prefix.has_source_ids() || !prefix.source_ids.empty())
          prefix.source_ids.resize(std::min(prefix.source_ids.size(), budget));
      }

      double t0 = now_ms();
      ScanCloud filtered;
      filtered.frame = prefix.frame;
      for (const Vec3& p : prefix.points)
        if (norm_sq(p) <= 25.0 * 25.0) filtered.points.push_back(p);
      if (filtered.points.empty())
        throw Error(ErrorCode::EmptyAfterFilter, "capture empty after range filter");
      double t1 = now_ms();
      ScanCloud reduced = fps_reduce(filtered, fps_budget, Rng::derive(seed, c));
      double t2 = now_ms();
      for (Vec3& p : reduced.points) p = Vec3{-p.x, -p.y, p.z};
      reduced.frame = FrameTag::SensorBlender;

      std::vector<ParamTarget> targets = cap.targets;
      Quat rz{0.0, 0.0, 0.0, 1.0};
      for (ParamTarget& t : targets) {
        t.pose.position = Vec3{-t.pose.position.x, -t.pose.position.y, t.pose.position.z};
        t.pose.orientation = quat_multiply(rz, t.pose.orientation);
      }
      double t3 = now_ms();

      FrameScale scale = normalize_frame(Aabb::of_points(reduced.points));
      ScanCloud norm_cloud = reduced;
      for (Vec3& p : norm_cloud.points) p = scale.normalize(p);
      norm_cloud.normalized = true;
      std::vector<ParamTarget> norm_targets;
      for (const ParamTarget& t : targets)
        norm_targets.push_back(normalize_target(t, scale, alpha_max));
      std::vector<Prediction> preds =
          stub_predict(norm_targets, norm_cloud, stub_cfg, alpha_max, Rng::derive(seed, 1000 + c));
      double t4 = now_ms();

      if (!norm_targets.empty()) {
        CostMatrix cost = match_cost_matrix(preds, norm_targets);
        hungarian_assign(cost);
      }
      double t5 = now_ms();

      clock.preprocess.push_back((t1 - t0) + (t3 - t2));
      clock.fps.push_back(t2 - t1);
      clock.stub.push_back(t4 - t3);
      clock.match.push_back(t5 - t4);
      scenes.push_back({std::move(preds), std::move(norm_targets), scale});
    }

    double t0 = now_ms();
    EvalReport report = evaluate_dataset(scenes, meshes, eval_cfg);
    clock.eval.assign(1, now_ms() - t0);

    AccumulationResult res;
    res.budget_points = budget;
    res.report = std::move(report);
    res.timings = {summarize("preprocess", clock.preprocess), summarize("fps", clock.fps),
                   summarize("stub", clock.stub), summarize("match", clock.match),
                   summarize("eval", clock.eval)};
    results.push_back(std::move(res));
  }
  return results;
}

std::string accumulation_table(const std::vector<AccumulationResult>& results) {
  std::ostringstream os;
  os << "Metric";
  for (const auto& r : results)
    for (const char* cls : {"gripper", "platform", "pallet"})
      os << "," << cls << "@" << r.budget_points;
  os << "\n";
  auto emit = [&](const std::string& name, auto getter) {
    os << name;
    for (const auto& r : results)
      for (int c = 0; c < 3; ++c) os << "," << getter(r.report.per_class[c]);
    os << "\n";
  };
  auto stat_or_dash = [](const Stats& s) {
    if (s.n == 0) return std::string("--");
    std::ostringstream o;
    o.precision(4);
    o << std::fixed << s.mean;
    return o.str();
  };
  emit("l2_m", [&](const ClassReport& c) { return stat_or_dash(c.l2_m); });
  emit("geodesic_deg", [&](const ClassReport& c) { return stat_or_dash(c.geodesic_deg); });
  emit("yaw_deg", [&](const ClassReport& c) { return stat_or_dash(c.yaw_deg); });
  emit("opening_deg", [&](const ClassReport& c) {
    return c.opening_deg ? stat_or_dash(*c.opening_deg) : std::string("--");
  });
  emit("ap", [&](const ClassReport& c) {
    if (!c.ap) return std::string("--");
    std::ostringstream o;
    o.precision(3);
    o << std::fixed << *c.ap;
    return o.str();
  });
  return os.str();
}

std::string timings_csv(const std::vector<AccumulationResult>& results) {
  std::ostringstream os;
  os << "budget,stage,mean_ms,std_ms\n";
  os.precision(4);
  os << std::fixed;
  for (const auto& r : results)
    for (const auto& t : r.timings)
      os << r.budget_points << "," << t.stage << "," << t.mean_ms << "," << t.std_ms << "\n";
  return os.str();
}

}  // namespace pardet
