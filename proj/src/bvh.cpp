#include "pardet/bvh.hpp"

#include <algorithm>
#include <numeric>

namespace pardet {

std::optional<double> ray_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c) {
  constexpr double kEps = 1e-12;
  Vec3 e1 = b - a, e2 = c - a;
  Vec3 p = cross(ray.direction, e2);
  double det = dot(e1, p);
  if (std::abs(det) < kEps) return std::nullopt;
  double inv = 1.0 / det;
  Vec3 t = ray.origin - a;
  double u = dot(t, p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  Vec3 q = cross(t, e1);
  double v = dot(ray.direction, q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  double dist = dot(e2, q) * inv;
  if (dist <= kEps) return std::nullopt;
  return dist;
}

static bool ray_box(const Ray& ray, const Vec3& inv_dir, const Aabb& box, double max_dist) {
  double t0 = 0.0, t1 = max_dist;
  for (int axis = 0; axis < 3; ++axis) {
    double lo = (box.lo[axis] - ray.origin[axis]) * inv_dir[axis];
    double hi = (box.hi[axis] - ray.origin[axis]) * inv_dir[axis];
    if (inv_dir[axis] < 0.0) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return false;
  }
  return true;
}

Bvh::Bvh(std::vector<Vec3> tri_vertices) : verts_(std::move(tri_vertices)) {
  tris_ = verts_.size() / 3;
  if (tris_ == 0) return;
  std::vector<Vec3> centers(tris_);
  for (size_t t = 0; t < tris_; ++t)
    centers[t] = (verts_[3 * t] + verts_[3 * t + 1] + verts_[3 * t + 2]) / 3.0;
  std::vector<int> order(tris_);
  std::iota(order.begin(), order.end(), 0);
  nodes_.reserve(2 * tris_);
  build(order, 0, static_cast<int>(tris_), centers);
  tri_index_ = std::move(order);
}

int Bvh::build(std::vector<int>& order, int begin, int end, const std::vector<Vec3>& centers) {
  int node_id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  for (int i = begin; i < end; ++i) {
    int t = order[i];
    box.expand(verts_[3 * t]);
    box.expand(verts_[3 * t + 1]);
    box.expand(verts_[3 * t + 2]);
  }
  nodes_[node_id].box = box;

  constexpr int kLeafSize = 4;
  if (end - begin <= kLeafSize) {
    nodes_[node_id].first = begin;
    nodes_[node_id].count = end - begin;
    return node_id;
  }

  Vec3 e = box.extent();
  int axis = e.x >= e.y && e.x >= e.z ? 0 : (e.y >= e.z ? 1 : 2);
  int mid = (begin + end) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](int a, int b) {
                     double ca = centers[a][axis], cb = centers[b][axis];
                     return ca != cb ? ca < cb : a < b;
                   });
  int left = build(order, begin, mid, centers);
  int right = build(order, mid, end, centers);
  nodes_[node_id].left = left;
  nodes_[node_id].right = right;
  return node_id;
}

std::optional<RayHit> Bvh::nearest_hit(const Ray& ray, double max_dist) const {
  if (nodes_.empty()) return std::nullopt;
  Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
  double best = max_dist;
  int best_tri = -1;
  int stack[64];
  int sp = 0;
  stack[sp++] = 0;
  while (sp > 0) {
    const Node& node = nodes_[stack[--sp]];
    if (!ray_box(ray, inv_dir, node.box, best)) continue;
    if (node.leaf()) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        int t = tri_index_[i];
        auto d = ray_triangle(ray, verts_[3 * t], verts_[3 * t + 1], verts_[3 * t + 2]);
        // on exact distance ties keep the lowest triangle id, matching the
        // brute-force reference
        if (d && (*d < best || (*d == best && (best_tri < 0 || t < best_tri)))) {
          best = *d;
          best_tri = t;
        }
      }
    } else {
      stack[sp++] = node.right;
      stack[sp++] = node.left;
    }
  }
  if (best_tri < 0) return std::nullopt;
  return RayHit{ray.origin + ray.direction * best, best, static_cast<uint32_t>(best_tri)};
}

}  // namespace pardet
