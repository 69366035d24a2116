#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pardet/geometry.hpp"

namespace pardet {

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct RayHit {
  Vec3 point;
  double distance = 0.0;
  uint32_t triangle = 0;
};

// Moller-Trumbore; returns the ray parameter t > eps or nothing.
std::optional<double> ray_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c);

// Binary BVH over a triangle soup (3 consecutive vertices per triangle).
// Built once, read-only afterwards; traversal is safe from many threads.
class Bvh {
 public:
  Bvh() = default;
  explicit Bvh(std::vector<Vec3> tri_vertices);

  // Nearest intersection with distance <= max_dist.
  std::optional<RayHit> nearest_hit(const Ray& ray, double max_dist) const;

  size_t triangle_count() const { return tris_ / 1; }
  const std::vector<Vec3>& vertices() const { return verts_; }

 private:
  struct Node {
    Aabb box;
    int left = -1;   // internal: child index; leaf: first triangle
    int right = -1;  // internal: child index; leaf: -1
    int first = 0, count = 0;
    bool leaf() const { return count > 0; }
  };

  int build(std::vector<int>& order, int begin, int end, const std::vector<Vec3>& centers);

  std::vector<Vec3> verts_;
  std::vector<int> tri_index_;  // leaf order -> original triangle id
  std::vector<Node> nodes_;
  size_t tris_ = 0;
};

}  // namespace pardet
