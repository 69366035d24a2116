// Compares the OpenMP kernels against the serial reference implementations
// on synthetic workloads. The references double as the correctness oracles in
// the test suite; this target reports the speed side.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pardet/lidar.hpp"
#include "pardet/matching.hpp"
#include "pardet/reference.hpp"
#include "pardet/rng.hpp"
#include "pardet/scene.hpp"

using namespace pardet;

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_ms(F&& fn, int repeats = 3) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    double t0 = now_ms();
    fn();
    best = std::min(best, now_ms() - t0);
  }
  return best;
}

std::vector<Vec3> random_points(size_t n, uint64_t seed, double extent) {
  Rng rng(seed);
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts)
    p = {rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent)};
  return pts;
}

void report(const char* kernel, double parallel_ms, double serial_ms) {
  std::printf("%-22s %10.2f ms %12.2f ms %8.2fx\n", kernel, parallel_ms, serial_ms,
              serial_ms / parallel_ms);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel kernels run serially\n");
#endif
  std::printf("%-22s %13s %15s %9s\n", "kernel", "parallel", "serial ref", "speedup");

  {  // chamfer on two 4096-point sets
    auto x = random_points(4096, 1, 1.0);
    auto y = random_points(4096, 2, 1.0);
    double p = time_ms([&] { chamfer(x, y); });
    double s = time_ms([&] { reference::chamfer(x, y); });
    report("chamfer 4096x4096", p, s);
  }

  {  // FPS 20000 -> 2048 (reference recomputes min-distances per step)
    ScanCloud cloud;
    cloud.points = random_points(20000, 3, 10.0);
    double p = time_ms([&] { fps_reduce(cloud, 2048, 7); }, 2);
    double s = time_ms([&] { reference::fps_indices(cloud.points, 2048, 7); }, 1);
    report("fps 20k->2048", p, s);
  }

  {  // raycast of a full scene: BVH+OMP vs serial brute force
    SceneConfig scfg;
    SceneDescription desc = build_scene(scfg, 42);
    MeshLibrary meshes = MeshLibrary::builtins();
    SceneGeometry geo = bake_scene(desc, meshes);
    RayTable rays = RayTable::generate(50000);
    double p = time_ms([&] { raycast_scan(geo, rays, 25.0); }, 2);
    double s = time_ms(
        [&] {
          for (const RayRecord& r : rays.rows) {
            Vec3 dir = geo.sensor_pose().orientation.rotate(
                spherical_to_cartesian(r.azimuth_rad, r.elevation_rad));
            reference::raycast_brute(geo.triangle_vertices(), {geo.sensor_pose().position, dir},
                                     25.0);
          }
        },
        1);
    std::printf("  (scene: %zu triangles, 50k rays)\n", geo.triangle_count());
    report("raycast 50k rays", p, s);
  }

  {  // cost matrix 128 queries x 12 targets, many scenes
    Rng rng(11);
    std::vector<ParamTarget> targets(12);
    for (ParamTarget& t : targets) {
      t.cls = ObjectClass::Pallet;
      t.pose.position = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      t.pose.orientation = rng.unit_quaternion();
      t.pose.normalized_frame = true;
    }
    std::vector<Prediction> preds(128);
    for (Prediction& p : preds) {
      p.class_probs = {0.25, 0.25, 0.25, 0.25};
      for (int c = 0; c < kNumObjectClasses; ++c) {
        p.params[c].position = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        p.params[c].orientation = rng.unit_quaternion();
      }
    }
    double p = time_ms([&] {
      for (int r = 0; r < 200; ++r) match_cost_matrix(preds, targets);
    });
    double s = time_ms([&] {
      for (int r = 0; r < 200; ++r) {
        CostMatrix out;
        out.num_preds = preds.size();
        out.num_targets = targets.size();
        out.cost.resize(preds.size() * targets.size());
        for (size_t j = 0; j < preds.size(); ++j)
          for (size_t i = 0; i < targets.size(); ++i)
            out.cost[j * targets.size() + i] =
                -preds[j].prob(targets[i].cls) + param_loss(preds[j], targets[i]);
      }
    });
    report("cost matrix x200", p, s);
  }
  return 0;
}
