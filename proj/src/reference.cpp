#include "pardet/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pardet/rng.hpp"

namespace pardet::reference {

double chamfer(std::span<const Vec3> x, std::span<const Vec3> y) {
  double sum_x = 0.0;
  for (const Vec3& p : x) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : y) {
      double d = std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) +
                           (p.z - q.z) * (p.z - q.z));
      best = std::min(best, d);
    }
    sum_x += best;
  }
  double sum_y = 0.0;
  for (const Vec3& q : y) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : x) {
      double d = std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) +
                           (p.z - q.z) * (p.z - q.z));
      best = std::min(best, d);
    }
    sum_y += best;
  }
  return sum_x / static_cast<double>(x.size()) + sum_y / static_cast<double>(y.size());
}

std::vector<int> fps_indices(const std::vector<Vec3>& points, size_t budget, uint64_t seed) {
  const size_t n = points.size();
  std::vector<int> selected;
  if (n <= budget) {
    selected.resize(n);
    for (size_t i = 0; i < n; ++i) selected[i] = static_cast<int>(i);
    return selected;
  }
  Rng rng(seed);
  selected.push_back(static_cast<int>(rng.uniform_int(n)));
  std::vector<char> taken(n, 0);
  taken[selected[0]] = 1;
  while (selected.size() < budget) {
    int best = -1;
    double best_d = -1.0;
    for (size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      double mind = std::numeric_limits<double>::infinity();
      for (int s : selected) mind = std::min(mind, norm_sq(points[i] - points[s]));
      if (mind > best_d) {
        best_d = mind;
        best = static_cast<int>(i);
      }
    }
    selected.push_back(best);
    taken[best] = 1;
  }
  return selected;
}

std::optional<RayHit> raycast_brute(const std::vector<Vec3>& tri_vertices, const Ray& ray,
                                    double max_dist) {
  double best = max_dist;
  int best_tri = -1;
  const size_t tris = tri_vertices.size() / 3;
  for (size_t t = 0; t < tris; ++t) {
    auto d = ray_triangle(ray, tri_vertices[3 * t], tri_vertices[3 * t + 1],
                          tri_vertices[3 * t + 2]);
    if (d && (*d < best || (*d == best && best_tri < 0))) {
      best = *d;
      best_tri = static_cast<int>(t);
    }
  }
  if (best_tri < 0) return std::nullopt;
  return RayHit{ray.origin + ray.direction * best, best, static_cast<uint32_t>(best_tri)};
}

static void enumerate(const CostMatrix& cost, size_t target, std::vector<char>& used,
                      std::vector<int>& current, double running, BruteAssignment& best) {
  if (target == cost.num_targets) {
    if (running < best.total_cost) {
      best.total_cost = running;
      best.target_to_pred = current;
    }
    return;
  }
  for (size_t j = 0; j < cost.num_preds; ++j) {
    if (used[j]) continue;
    used[j] = 1;
    current[target] = static_cast<int>(j);
    enumerate(cost, target + 1, used, current, running + cost.at(j, target), best);
    used[j] = 0;
  }
}

BruteAssignment assignment_bruteforce(const CostMatrix& cost) {
  BruteAssignment best;
  best.total_cost = std::numeric_limits<double>::infinity();
  std::vector<char> used(cost.num_preds, 0);
  std::vector<int> current(cost.num_targets, -1);
  enumerate(cost, 0, used, current, 0.0, best);
  return best;
}

double average_precision_bruteforce(std::vector<std::pair<double, bool>> scored, int num_gt) {
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  const size_t n = scored.size();
  std::vector<double> prec(n), rec(n);
  int tp = 0;
  for (size_t i = 0; i < n; ++i) {
    if (scored[i].second) ++tp;
    prec[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    rec[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  double ap = 0.0, prev = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double envelope = 0.0;
    for (size_t k = i; k < n; ++k) envelope = std::max(envelope, prec[k]);
    ap += (rec[i] - prev) * envelope;
    prev = rec[i];
  }
  return ap;
}

Mat3 quat_to_matrix(const Quat& q) {
  // independent formulation via the two cross products
  Mat3 r;
  Vec3 u{q.x, q.y, q.z};
  Vec3 cols[3];
  for (int i = 0; i < 3; ++i) {
    Vec3 e{i == 0 ? 1.0 : 0.0, i == 1 ? 1.0 : 0.0, i == 2 ? 1.0 : 0.0};
    Vec3 uxe = cross(u, e);
    cols[i] = e + (uxe * q.w + cross(u, uxe)) * 2.0;
  }
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r.m[row][col] = cols[col][row];
  return r;
}

Mat3 axis_angle_matrix(const Vec3& axis, double angle_rad) {
  Vec3 k = normalized(axis);
  double c = std::cos(angle_rad), s = std::sin(angle_rad);
  Mat3 r;
  r.m[0][0] = c + k.x * k.x * (1 - c);
  r.m[0][1] = k.x * k.y * (1 - c) - k.z * s;
  r.m[0][2] = k.x * k.z * (1 - c) + k.y * s;
  r.m[1][0] = k.y * k.x * (1 - c) + k.z * s;
  r.m[1][1] = c + k.y * k.y * (1 - c);
  r.m[1][2] = k.y * k.z * (1 - c) - k.x * s;
  r.m[2][0] = k.z * k.x * (1 - c) - k.y * s;
  r.m[2][1] = k.z * k.y * (1 - c) + k.x * s;
  r.m[2][2] = c + k.z * k.z * (1 - c);
  return r;
}

Vec3 apply_matrix(const Mat3& m, const Vec3& v) { return m * v; }

}  // namespace pardet::reference
