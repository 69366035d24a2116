#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace pardet {

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm_sq(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm_sq(v)); }
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

// Row-major 3x3 matrix; only used for rotations and oracle checks.
struct Mat3 {
  std::array<std::array<double, 3>, 3> m{};

  static Mat3 identity() {
    Mat3 r;
    r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
    return r;
  }
  Vec3 operator*(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r.m[i][j] += m[i][k] * o.m[k][j];
    return r;
  }
};

// Unit quaternion stored as (w, x, y, z); the literal (0,0,0,1) is a 180 degree
// rotation about z. This differs from ROS (x,y,z,w) ordering.
struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  static Quat identity() { return {1.0, 0.0, 0.0, 0.0}; }
  static Quat from_axis_angle(const Vec3& axis, double angle_rad);

  Quat operator-() const { return {-w, -x, -y, -z}; }
  Quat conjugate() const { return {w, -x, -y, -z}; }
  Quat normalized() const;
  Mat3 to_mat3() const;
  Vec3 rotate(const Vec3& v) const;
};

inline double dot(const Quat& a, const Quat& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

// Hamilton product, renormalized.
Quat quat_multiply(const Quat& a, const Quat& b);

// q composed with a 180 degree z-rotation: q * (0,0,0,1).
Quat rotate_z_180(const Quat& q);

// Symmetry group applied to an orientation before loss evaluation.
// SignOnly: {+q, -q}. SignAndZFlip: {+q, -q, +q*rz, -q*rz}.
enum class SymmetrySet { SignOnly, SignAndZFlip };

std::vector<Quat> symmetry_expand(const Quat& q, SymmetrySet s);

// min over the expansion of q_hat of the elementwise l1 distance to q_gt.
double quat_symmetry_loss(const Quat& q_hat, const Quat& q_gt, SymmetrySet s);

// min over the expansion of 2*acos(|<q', q_gt>|), degrees in [0, 180].
double geodesic_error_deg(const Quat& q_hat, const Quat& q_gt, SymmetrySet s);

// Heading is the +x body axis projected to the xy-plane. Throws DegenerateYaw
// when the rotated +x axis is (near) parallel to z.
double yaw_error_deg(const Quat& q_hat, const Quat& q_gt, SymmetrySet s);

// (cos el cos az, cos el sin az, sin el); x-forward convention.
Vec3 spherical_to_cartesian(double azimuth_rad, double elevation_rad);

struct Pose {
  Vec3 position;
  Quat orientation;
  bool normalized_frame = false;  // true when coordinates are in [-1,1] cloud units

  Vec3 apply(const Vec3& p) const { return orientation.rotate(p) + position; }
};

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void expand(const Vec3& p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
    hi.z = std::max(hi.z, p.z);
  }
  void expand(const Aabb& b) {
    expand(b.lo);
    expand(b.hi);
  }
  bool valid() const { return lo.x <= hi.x; }
  Vec3 center() const { return (lo + hi) * 0.5; }
  Vec3 extent() const { return hi - lo; }
  double longest_extent() const {
    Vec3 e = extent();
    return std::max(e.x, std::max(e.y, e.z));
  }
  static Aabb of_points(const std::vector<Vec3>& pts) {
    Aabb b;
    for (const auto& p : pts) b.expand(p);
    return b;
  }
};

}  // namespace pardet
