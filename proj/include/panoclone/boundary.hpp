#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "panoclone/errors.hpp"
#include "panoclone/sphere_geom.hpp"
#include "panoclone/spherical_polygon.hpp"

namespace panoclone {

/// Point at fraction t along the great-circle arc a -> b.
inline UnitVector slerp(const UnitVector& a, const UnitVector& b, double t) {
  const double omega = angle_between(a, b);
  if (omega < 1e-15) return a;
  const double s = std::sin(omega);
  return UnitVector::normalized((std::sin((1.0 - t) * omega) / s) * a.vec() + (std::sin(t * omega) / s) * b.vec());
}

/// Boundary spacing matching one source pixel of arc length at the latitude
/// of `center`. Near the poles the horizontal pixel arc shrinks to nothing,
/// so the latitude factor is floored.
inline double default_boundary_spacing(int panorama_height, const UnitVector& center) {
  const double sin_theta = std::hypot(center.x(), center.y());
  return (kPi / panorama_height) * std::max(sin_theta, 0.25);
}

/// Drops consecutive duplicates (including a closing repeat of the first
/// vertex). Throws DegeneratePolyline when fewer than three remain.
inline std::vector<UnitVector> dedupe_polyline(const std::vector<UnitVector>& in) {
  std::vector<UnitVector> out;
  for (const auto& v : in) {
    if (out.empty() || angle_between(out.back(), v) > 1e-12) out.push_back(v);
  }
  while (out.size() > 1 && angle_between(out.front(), out.back()) <= 1e-12) out.pop_back();
  if (out.size() < 3) throw Error(ErrorCode::DegeneratePolyline, "boundary needs at least 3 distinct vertices");
  return out;
}

/// Densifies a closed polyline along great-circle arcs so consecutive
/// samples are at most `spacing` apart. Input vertices are kept.
inline SphericalPolygon sample_boundary(const std::vector<UnitVector>& polyline, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "spacing must be positive");
  const std::vector<UnitVector> pts = dedupe_polyline(polyline);
  std::vector<UnitVector> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const UnitVector& a = pts[i];
    const UnitVector& b = pts[(i + 1) % pts.size()];
    const double len = angle_between(a, b);
    if (len > kPi - 1e-9) {
      throw Error(ErrorCode::DegeneratePolyline, "boundary edge joins antipodal vertices", i);
    }
    const int segs = std::max(1, int(std::ceil(len / spacing - 1e-9)));
    out.push_back(a);
    for (int k = 1; k < segs; ++k) out.push_back(slerp(a, b, double(k) / segs));
  }
  return SphericalPolygon(std::move(out));
}

inline SphericalPolygon sample_boundary(const std::vector<SphericalCoord>& polyline, double spacing) {
  std::vector<UnitVector> v;
  v.reserve(polyline.size());
  for (const auto& c : polyline) v.push_back(sph_to_unit(c));
  return sample_boundary(v, spacing);
}

}  // namespace panoclone
