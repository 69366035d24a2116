#include "pardet/geometry.hpp"

#include <algorithm>

#include "pardet/error.hpp"

namespace pardet {

Quat Quat::from_axis_angle(const Vec3& axis, double angle_rad) {
  Vec3 a = pardet::normalized(axis);
  double h = 0.5 * angle_rad;
  double s = std::sin(h);
  return Quat{std::cos(h), a.x * s, a.y * s, a.z * s}.normalized();
}

Quat Quat::normalized() const {
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  return {w / n, x / n, y / n, z / n};
}

Mat3 Quat::to_mat3() const {
  Mat3 r;
  double ww = w * w, xx = x * x, yy = y * y, zz = z * z;
  r.m[0][0] = ww + xx - yy - zz;
  r.m[0][1] = 2.0 * (x * y - w * z);
  r.m[0][2] = 2.0 * (x * z + w * y);
  r.m[1][0] = 2.0 * (x * y + w * z);
  r.m[1][1] = ww - xx + yy - zz;
  r.m[1][2] = 2.0 * (y * z - w * x);
  r.m[2][0] = 2.0 * (x * z - w * y);
  r.m[2][1] = 2.0 * (y * z + w * x);
  r.m[2][2] = ww - xx - yy + zz;
  return r;
}

Vec3 Quat::rotate(const Vec3& v) const {
  // v' = v + 2 w (u x v) + 2 u x (u x v), u = (x,y,z)
  Vec3 u{x, y, z};
  Vec3 t = cross(u, v) * 2.0;
  return v + t * w + cross(u, t);
}

Quat quat_multiply(const Quat& a, const Quat& b) {
  Quat r{a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
         a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
         a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
         a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
  return r.normalized();
}

Quat rotate_z_180(const Quat& q) { return quat_multiply(q, Quat{0.0, 0.0, 0.0, 1.0}); }

std::vector<Quat> symmetry_expand(const Quat& q, SymmetrySet s) {
  std::vector<Quat> out;
  out.push_back(q);
  out.push_back(-q);
  if (s == SymmetrySet::SignAndZFlip) {
    Quat f = rotate_z_180(q);
    out.push_back(f);
    out.push_back(-f);
  }
  return out;
}

static double l1(const Quat& a, const Quat& b) {
  return std::abs(a.w - b.w) + std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.z - b.z);
}

double quat_symmetry_loss(const Quat& q_hat, const Quat& q_gt, SymmetrySet s) {
  double best = std::numeric_limits<double>::infinity();
  for (const Quat& q : symmetry_expand(q_hat, s)) best = std::min(best, l1(q, q_gt));
  return best;
}

double geodesic_error_deg(const Quat& q_hat, const Quat& q_gt, SymmetrySet s) {
  double best = std::numeric_limits<double>::infinity();
  for (const Quat& q : symmetry_expand(q_hat, s)) {
    double d = std::clamp(std::abs(dot(q, q_gt)), 0.0, 1.0);
    best = std::min(best, 2.0 * std::acos(d));
  }
  return rad_to_deg(best);
}

static double heading_rad(const Quat& q) {
  Vec3 fwd = q.rotate(Vec3{1.0, 0.0, 0.0});
  if (std::hypot(fwd.x, fwd.y) < 1e-8)
    throw Error(ErrorCode::DegenerateYaw, "rotated +x axis is parallel to z; yaw undefined");
  return std::atan2(fwd.y, fwd.x);
}

static double wrap_angle_deg(double deg) {
  deg = std::fmod(std::abs(deg), 360.0);
  return deg > 180.0 ? 360.0 - deg : deg;
}

double yaw_error_deg(const Quat& q_hat, const Quat& q_gt, SymmetrySet s) {
  double h_gt = heading_rad(q_gt);
  double best = std::numeric_limits<double>::infinity();
  for (const Quat& q : symmetry_expand(q_hat, s)) {
    double d = wrap_angle_deg(rad_to_deg(heading_rad(q) - h_gt));
    best = std::min(best, d);
  }
  return best;
}

Vec3 spherical_to_cartesian(double azimuth_rad, double elevation_rad) {
  double ce = std::cos(elevation_rad);
  return {ce * std::cos(azimuth_rad), ce * std::sin(azimuth_rad), std::sin(elevation_rad)};
}

}  // namespace pardet
