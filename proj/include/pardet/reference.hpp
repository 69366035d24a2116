#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pardet/geometry.hpp"
#include "pardet/lidar.hpp"
#include "pardet/matching.hpp"

// Serial reference implementations. These are the oracles the optimized
// kernels are tested against, and the baselines the benchmark compares with;
// they must stay independent of the main code paths.
namespace pardet::reference {

// Plain double loop, no parallelism.
double chamfer(std::span<const Vec3> x, std::span<const Vec3> y);

// O(n^2 k): recomputes, for every candidate, the min distance to the entire
// selected set at each step. Returns selected indices in selection order.
std::vector<int> fps_indices(const std::vector<Vec3>& points, size_t budget, uint64_t seed);

// All-triangle scan, nearest hit (lowest triangle id on exact ties).
std::optional<RayHit> raycast_brute(const std::vector<Vec3>& tri_vertices, const Ray& ray,
                                    double max_dist);

// Exhaustive enumeration over injective assignments of targets to
// predictions; feasible for K <= 8.
struct BruteAssignment {
  std::vector<int> target_to_pred;
  double total_cost = 0.0;
};
BruteAssignment assignment_bruteforce(const CostMatrix& cost);

// All-point interpolated AP computed the slow way: explicit max over suffix
// precisions per rank (no running-envelope pass).
double average_precision_bruteforce(std::vector<std::pair<double, bool>> scored, int num_gt);

// Independent quaternion-to-matrix route used as the rotation oracle.
Mat3 quat_to_matrix(const Quat& q);
Mat3 axis_angle_matrix(const Vec3& axis, double angle_rad);  // Rodrigues
Vec3 apply_matrix(const Mat3& m, const Vec3& v);

}  // namespace pardet::reference
