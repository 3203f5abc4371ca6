#pragma once

// Points on the unit sphere, spherical coordinates and rotations.
//
// Conventions: +z is the north pole, theta is the polar angle measured from
// +z, phi is the azimuth measured from +x towards +y.
//   x = sin(theta) cos(phi), y = sin(theta) sin(phi), z = cos(theta)

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iterator>
#include <numbers>

#include "panoclone/errors.hpp"

namespace panoclone {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A direction on the unit sphere. Constructed only through normalizing
/// factories, so the norm is 1 up to rounding.
class UnitVector {
 public:
  UnitVector() : v_(0.0, 0.0, 1.0) {}

  static UnitVector normalized(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero or non-finite vector");
    }
    return UnitVector(v / n);
  }
  static UnitVector normalized(double x, double y, double z) { return normalized(Vec3(x, y, z)); }
  /// Wraps stored components bit-exactly (deserialization). Rejects input
  /// that is not unit length within 1e-12.
  static UnitVector restore(const Vec3& v) {
    if (!std::isfinite(v.squaredNorm()) || std::abs(v.squaredNorm() - 1.0) > 1e-12) {
      throw Error(ErrorCode::FormatError, "stored vector is not unit length");
    }
    return UnitVector(v);
  }

  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }

  UnitVector operator-() const { return UnitVector(-v_); }
  double dot(const UnitVector& o) const { return v_.dot(o.v_); }
  Vec3 cross(const UnitVector& o) const { return v_.cross(o.v_); }

  friend bool operator==(const UnitVector& a, const UnitVector& b) { return a.v_ == b.v_; }

 private:
  explicit UnitVector(const Vec3& v) : v_(v) {}
  Vec3 v_;
};

struct SphericalCoord {
  double phi = 0.0;    // [0, 2pi)
  double theta = 0.0;  // [0, pi]

  /// Wraps phi into [0, 2pi) and clamps theta into [0, pi].
  static SphericalCoord make(double phi, double theta) {
    double p = std::fmod(phi, kTwoPi);
    if (p < 0.0) p += kTwoPi;
    if (p >= kTwoPi) p = 0.0;
    return {p, std::clamp(theta, 0.0, kPi)};
  }
};

inline UnitVector sph_to_unit(const SphericalCoord& c) {
  const double st = std::sin(c.theta);
  return UnitVector::normalized(st * std::cos(c.phi), st * std::sin(c.phi), std::cos(c.theta));
}

inline SphericalCoord unit_to_sph(const UnitVector& v) {
  const double rho = std::hypot(v.x(), v.y());
  const double theta = std::atan2(rho, v.z());
  // phi is meaningless at the poles; report 0 there.
  if (rho == 0.0) return {0.0, theta};
  return SphericalCoord::make(std::atan2(v.y(), v.x()), theta);
}

/// Great-circle distance in radians.
inline double angle_between(const UnitVector& a, const UnitVector& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Signed angle at v from the great circle through (v, a) to the one through
/// (v, b), positive counter-clockwise as seen from outside the sphere at v.
inline double signed_angle_at(const UnitVector& v, const UnitVector& a, const UnitVector& b) {
  const Vec3 ta = v.cross(a);
  const Vec3 tb = v.cross(b);
  if (ta.norm() < 1e-12 || tb.norm() < 1e-12) {
    throw Error(ErrorCode::DegenerateAngle, "signed_angle_at: argument coincides with v or -v");
  }
  return std::atan2(v.vec().dot(ta.cross(tb)), ta.dot(tb));
}

/// Proper rotation of R^3.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m) : m_(m) {}

  static Rotation identity() { return Rotation(); }

  const Mat3& matrix() const { return m_; }
  Vec3 apply(const Vec3& v) const { return m_ * v; }
  UnitVector operator*(const UnitVector& v) const { return UnitVector::normalized(m_ * v.vec()); }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }
  Rotation inverse() const { return Rotation(m_.transpose()); }

 private:
  Mat3 m_;
};

inline Mat3 cross_matrix(const Vec3& u) {
  Mat3 k;
  k << 0.0, -u.z(), u.y(),
       u.z(), 0.0, -u.x(),
       -u.y(), u.x(), 0.0;
  return k;
}

/// Axis-angle rotation, right-handed about `axis`.
inline Rotation rodriguez(const UnitVector& axis, double angle) {
  const Vec3& u = axis.vec();
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Mat3 m = Mat3::Identity() * c + s * cross_matrix(u) + (1.0 - c) * (u * u.transpose());
  return Rotation(m);
}

inline Rotation rotation_about_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 m;
  m << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return Rotation(m);
}

inline bool is_polar(const UnitVector& v, double tol = 1e-9) {
  return std::hypot(v.x(), v.y()) < tol;
}

/// Orientation-preserving placement rotation: first about z to the target
/// azimuth, then within the target meridian plane to the target polar
/// angle. The result maps the meridian through v_s onto the meridian through
/// v_t, so the patch keeps its local "up".
inline Rotation two_step_rotation(const UnitVector& v_s, const UnitVector& v_t) {
  if (is_polar(v_s)) {
    throw Error(ErrorCode::PoleDatum, "datum point lies on a pole; choose a non-polar datum");
  }
  if (is_polar(v_t)) {
    throw Error(ErrorCode::PoleDatum, "target anchor lies on a pole; nudge the anchor off the pole");
  }
  const SphericalCoord s = unit_to_sph(v_s);
  const SphericalCoord t = unit_to_sph(v_t);
  const Rotation r1 = rotation_about_z(t.phi - s.phi);
  const Vec3 vs1 = r1.apply(v_s.vec());
  const Vec3 axis = vs1.cross(Vec3::UnitZ());
  // Right-handed rotation about vs1 x z decreases theta, hence the sign.
  const Rotation r2 = rodriguez(UnitVector::normalized(axis), s.theta - t.theta);
  return r2 * r1;
}

/// Shortest-arc rotation taking v_s to v_t. Rotates the patch's local frame
/// as a side effect; kept as the comparison baseline.
inline Rotation naive_rotation(const UnitVector& v_s, const UnitVector& v_t) {
  const Vec3 axis = v_s.cross(v_t);
  const double n = axis.norm();
  if (n < 1e-12) {
    throw Error(ErrorCode::DegenerateAxis, "naive_rotation: v_s and v_t are parallel");
  }
  return rodriguez(UnitVector::normalized(axis), std::atan2(n, v_s.dot(v_t)));
}

/// Unit tangent pointing to the north pole at v (undefined at the poles).
inline Vec3 local_north(const UnitVector& v) {
  const Vec3 z = Vec3::UnitZ();
  return (z - z.dot(v.vec()) * v.vec()).normalized();
}

/// Normalized mean of a set of points.
template <class Range>
UnitVector spherical_centroid(const Range& points) {
  Vec3 sum = Vec3::Zero();
  for (const UnitVector& p : points) sum += p.vec();
  if (sum.norm() < 1e-12) return *std::begin(points);
  return UnitVector::normalized(sum);
}

}  // namespace panoclone
