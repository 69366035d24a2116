#include <doctest.h>

#include <cmath>

#include "pardet/error.hpp"
#include "pardet/geometry.hpp"
#include "pardet/reference.hpp"
#include "pardet/rng.hpp"

using namespace pardet;

namespace {

double mat_diff(const Mat3& a, const Mat3& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(a.m[i][j] - b.m[i][j]));
  return m;
}

const Quat kZFlip{0.0, 0.0, 0.0, 1.0};

}  // namespace

TEST_CASE("quat_multiply identity and z-flip") {
  Quat id = Quat::identity();
  Quat r = quat_multiply(id, id);
  CHECK(r.w == doctest::Approx(1.0).epsilon(1e-15));

  // identity * (0,0,0,1) is the 180 degree z-rotation
  Quat f = quat_multiply(id, kZFlip);
  CHECK(f.w == doctest::Approx(0.0));
  CHECK(f.z == doctest::Approx(1.0));
  Vec3 v = f.rotate({1.0, 2.0, 3.0});
  CHECK(v.x == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(v.y == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(v.z == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("double z-flip gives -q, same rotation (matrix oracle)") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    Quat q = rng.unit_quaternion();
    Quat twice = rotate_z_180(rotate_z_180(q));
    CHECK(twice.w == doctest::Approx(-q.w).epsilon(1e-12));
    CHECK(twice.x == doctest::Approx(-q.x).epsilon(1e-12));
    CHECK(twice.y == doctest::Approx(-q.y).epsilon(1e-12));
    CHECK(twice.z == doctest::Approx(-q.z).epsilon(1e-12));
    CHECK(mat_diff(reference::quat_to_matrix(twice), reference::quat_to_matrix(q)) < 1e-12);
  }
}

TEST_CASE("quat norm stays 1 after multiplication") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    Quat q = quat_multiply(rng.unit_quaternion(), rng.unit_quaternion());
    CHECK(std::abs(std::sqrt(dot(q, q)) - 1.0) < 1e-9);
  }
}

TEST_CASE("symmetry_expand identity") {
  auto full = symmetry_expand(Quat::identity(), SymmetrySet::SignAndZFlip);
  REQUIRE(full.size() == 4);
  CHECK(full[0].w == 1.0);
  CHECK(full[1].w == -1.0);
  CHECK(full[2].z == doctest::Approx(1.0));
  CHECK(full[3].z == doctest::Approx(-1.0));

  auto sign = symmetry_expand(Quat::identity(), SymmetrySet::SignOnly);
  REQUIRE(sign.size() == 2);
  CHECK(sign[0].w == 1.0);
  CHECK(sign[1].w == -1.0);
}

TEST_CASE("symmetry_expand elements differ by identity or a body-frame z-flip") {
  // rotation-matrix oracle: q * (0,0,0,1) post-multiplies by diag(-1,-1,1),
  // i.e. the flip is about the object's own z-axis
  Mat3 flip = Mat3::identity();
  flip.m[0][0] = flip.m[1][1] = -1.0;
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    Quat q = rng.unit_quaternion();
    Mat3 rq = reference::quat_to_matrix(q);
    Mat3 flipped = rq * flip;
    for (const Quat& e : symmetry_expand(q, SymmetrySet::SignAndZFlip)) {
      Mat3 re = reference::quat_to_matrix(e);
      bool same = mat_diff(re, rq) < 1e-9;
      bool is_flip = mat_diff(re, flipped) < 1e-9;
      CHECK((same || is_flip));
    }
  }
}

TEST_CASE("quat_symmetry_loss zero cases") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    Quat q = rng.unit_quaternion();
    CHECK(quat_symmetry_loss(q, q, SymmetrySet::SignOnly) == 0.0);
    CHECK(quat_symmetry_loss(rotate_z_180(q), q, SymmetrySet::SignAndZFlip) <= 1e-12);
  }
}

TEST_CASE("quat_symmetry_loss equals explicit two-branch min under SignOnly") {
  auto l1 = [](const Quat& a, const Quat& b) {
    return std::abs(a.w - b.w) + std::abs(a.x - b.x) + std::abs(a.y - b.y) +
           std::abs(a.z - b.z);
  };
  Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    Quat q = rng.unit_quaternion();
    Quat flipped = rotate_z_180(q);
    double expected = std::min(l1(flipped, q), l1(-flipped, q));
    CHECK(quat_symmetry_loss(flipped, q, SymmetrySet::SignOnly) == expected);
  }
}

TEST_CASE("quat_symmetry_loss equals exhaustive expansion minimum") {
  auto l1 = [](const Quat& a, const Quat& b) {
    return std::abs(a.w - b.w) + std::abs(a.x - b.x) + std::abs(a.y - b.y) +
           std::abs(a.z - b.z);
  };
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    Quat a = rng.unit_quaternion(), b = rng.unit_quaternion();
    for (SymmetrySet s : {SymmetrySet::SignOnly, SymmetrySet::SignAndZFlip}) {
      double expected = std::numeric_limits<double>::infinity();
      for (const Quat& e : symmetry_expand(a, s)) expected = std::min(expected, l1(e, b));
      CHECK(quat_symmetry_loss(a, b, s) == expected);
    }
  }
}

TEST_CASE("quat_symmetry_loss invariant under symmetry substitution of q_hat") {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    Quat a = rng.unit_quaternion(), b = rng.unit_quaternion();
    double base = quat_symmetry_loss(a, b, SymmetrySet::SignAndZFlip);
    for (const Quat& e : symmetry_expand(a, SymmetrySet::SignAndZFlip))
      CHECK(quat_symmetry_loss(e, b, SymmetrySet::SignAndZFlip) ==
            doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("geodesic_error basics") {
  Quat id = Quat::identity();
  CHECK(geodesic_error_deg(id, id, SymmetrySet::SignOnly) == 0.0);

  Quat ten_x = Quat::from_axis_angle({1, 0, 0}, deg_to_rad(10.0));
  CHECK(geodesic_error_deg(ten_x, id, SymmetrySet::SignOnly) ==
        doctest::Approx(10.0).epsilon(1e-9));

  Quat z180 = Quat::from_axis_angle({0, 0, 1}, deg_to_rad(180.0));
  CHECK(geodesic_error_deg(z180, id, SymmetrySet::SignAndZFlip) <= 1e-6);
  CHECK(geodesic_error_deg(z180, id, SymmetrySet::SignOnly) ==
        doctest::Approx(180.0).epsilon(1e-9));
}

TEST_CASE("geodesic_error is symmetric in its arguments") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    Quat a = rng.unit_quaternion(), b = rng.unit_quaternion();
    for (SymmetrySet s : {SymmetrySet::SignOnly, SymmetrySet::SignAndZFlip})
      CHECK(geodesic_error_deg(a, b, s) ==
            doctest::Approx(geodesic_error_deg(b, a, s)).epsilon(1e-9));
  }
}

TEST_CASE("geodesic_error of a small perturbation equals its angle") {
  Rng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    Quat q = rng.unit_quaternion();
    double delta_deg = rng.uniform(0.01, 2.0);
    Quat d = Quat::from_axis_angle(rng.unit_vector(), deg_to_rad(delta_deg));
    CHECK(geodesic_error_deg(quat_multiply(q, d), q, SymmetrySet::SignOnly) ==
          doctest::Approx(delta_deg).epsilon(1e-6));
  }
}

TEST_CASE("yaw_error analytic cases") {
  Quat id = Quat::identity();
  CHECK(yaw_error_deg(id, id, SymmetrySet::SignOnly) == 0.0);

  Quat z30 = Quat::from_axis_angle({0, 0, 1}, deg_to_rad(30.0));
  CHECK(yaw_error_deg(z30, id, SymmetrySet::SignOnly) == doctest::Approx(30.0).epsilon(1e-9));

  Quat z170 = Quat::from_axis_angle({0, 0, 1}, deg_to_rad(170.0));
  CHECK(yaw_error_deg(z170, id, SymmetrySet::SignAndZFlip) ==
        doctest::Approx(10.0).epsilon(1e-9));
  CHECK(yaw_error_deg(z170, id, SymmetrySet::SignOnly) ==
        doctest::Approx(170.0).epsilon(1e-9));
}

TEST_CASE("yaw_error degenerate gimbal case") {
  Quat up = Quat::from_axis_angle({0, 1, 0}, deg_to_rad(-90.0));  // +x -> +z
  CHECK_THROWS_AS((void)yaw_error_deg(up, Quat::identity(), SymmetrySet::SignOnly), Error);
}

TEST_CASE("spherical_to_cartesian axes and frozen oracle value") {
  Vec3 x = spherical_to_cartesian(0.0, 0.0);
  CHECK(x.x == 1.0);
  CHECK(x.y == 0.0);
  CHECK(x.z == 0.0);

  Vec3 y = spherical_to_cartesian(kPi / 2.0, 0.0);
  CHECK(y.y == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(y.x) < 1e-15);

  // mpmath, 40 digits: az=0.3, el=0.2
  Vec3 v = spherical_to_cartesian(0.3, 0.2);
  CHECK(std::abs(v.x - 0.93629336358419924111) < 1e-12);
  CHECK(std::abs(v.y - 0.28962947762551557629) < 1e-12);
  CHECK(std::abs(v.z - 0.19866933079506121546) < 1e-12);
}

TEST_CASE("spherical_to_cartesian unit norm over many random inputs") {
  Rng rng(41);
  double worst = 0.0;
  for (int trial = 0; trial < 1000000; ++trial) {
    Vec3 v = spherical_to_cartesian(rng.uniform(-10.0, 10.0), rng.uniform(-1.5, 1.5));
    worst = std::max(worst, std::abs(norm(v) - 1.0));
  }
  CHECK(worst < 1e-12);
}
