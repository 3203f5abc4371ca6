#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "panoclone/errors.hpp"
#include "panoclone/sphere_geom.hpp"

namespace panoclone {

using Vec2 = Eigen::Vector2d;

/// Stereographic projection from the antipode of `center` onto the tangent
/// plane at `center`. Bijective on the sphere minus -center; conformal.
/// Plane coordinates are relative to the tangent point, in the right-handed
/// tangent frame (e1, e2, center).
class PatchProjection {
 public:
  PatchProjection() : PatchProjection(UnitVector()) {}
  explicit PatchProjection(const UnitVector& center) : c_(center) {
    // Pick the world axis least aligned with the center to seed the frame.
    const Vec3& c = c_.vec();
    int k = 0;
    if (std::abs(c.y()) < std::abs(c[k])) k = 1;
    if (std::abs(c.z()) < std::abs(c[k])) k = 2;
    const Vec3 seed = Vec3::Unit(k);
    e1_ = (seed - seed.dot(c) * c).normalized();
    e2_ = c.cross(e1_);
  }

  const UnitVector& center() const { return c_; }
  const Vec3& e1() const { return e1_; }
  const Vec3& e2() const { return e2_; }

  Vec2 project(const Vec3& v) const {
    const double s = 2.0 / (1.0 + v.dot(c_.vec()));
    return {s * v.dot(e1_), s * v.dot(e2_)};
  }
  Vec2 project(const UnitVector& v) const { return project(v.vec()); }

  UnitVector unproject(const Vec2& q) const {
    const double r2 = q.squaredNorm();
    const double k = 4.0 / (4.0 + r2);
    return UnitVector::normalized((1.0 - 0.5 * r2 * k) * c_.vec() + k * (q.x() * e1_ + q.y() * e2_));
  }

  /// Plane length per unit of sphere length at plane point q.
  static double scale(const Vec2& q) { return 1.0 + 0.25 * q.squaredNorm(); }

 private:
  UnitVector c_;
  Vec3 e1_, e2_;
};

/// Closed spherical polygon with geodesic edges; v_{n} wraps to v_0.
class SphericalPolygon {
 public:
  SphericalPolygon() = default;
  explicit SphericalPolygon(std::vector<UnitVector> vertices) : v_(std::move(vertices)) {
    if (v_.size() < 3) throw Error(ErrorCode::DegeneratePolyline, "spherical polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < v_.size(); ++i) {
      if (angle_between(v_[i], v_[(i + 1) % v_.size()]) < 1e-9) {
        throw Error(ErrorCode::DegeneratePolyline, "consecutive polygon vertices coincide", i);
      }
    }
  }

  std::size_t size() const { return v_.size(); }
  const UnitVector& operator[](std::size_t i) const { return v_[i]; }
  const UnitVector& wrapped(std::ptrdiff_t i) const {
    const auto n = std::ptrdiff_t(v_.size());
    return v_[std::size_t(((i % n) + n) % n)];
  }
  const std::vector<UnitVector>& vertices() const { return v_; }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  UnitVector centroid() const { return spherical_centroid(v_); }

  /// Angular span: twice the largest angle between the centroid and a vertex.
  double span() const {
    const UnitVector c = centroid();
    double m = 0.0;
    for (const auto& p : v_) m = std::max(m, angle_between(c, p));
    return 2.0 * m;
  }

  /// The projection whose bounded side defines the polygon interior.
  PatchProjection projection() const { return PatchProjection(centroid()); }

  std::vector<Vec2> projected(const PatchProjection& proj) const {
    std::vector<Vec2> out;
    out.reserve(v_.size());
    for (const auto& p : v_) out.push_back(proj.project(p));
    return out;
  }

 private:
  std::vector<UnitVector> v_;
};

/// Winding number of a closed planar polygon around q.
inline int winding_number(std::span<const Vec2> poly, const Vec2& q) {
  int wn = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double side = (b.x() - a.x()) * (q.y() - a.y()) - (q.x() - a.x()) * (b.y() - a.y());
    if (a.y() <= q.y()) {
      if (b.y() > q.y() && side > 0) ++wn;
    } else if (b.y() <= q.y() && side < 0) {
      --wn;
    }
  }
  return wn;
}

inline double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

/// Inside test: winding number on the stereographic projection from the
/// antipode of the polygon centroid.
inline bool contains(const SphericalPolygon& poly, const UnitVector& v) {
  const PatchProjection proj = poly.projection();
  if (v.dot(proj.center()) < -1.0 + 1e-12) return false;
  const auto pts = poly.projected(proj);
  return winding_number(pts, proj.project(v)) != 0;
}

}  // namespace panoclone
