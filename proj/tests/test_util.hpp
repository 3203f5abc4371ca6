#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "panoclone/boundary.hpp"
#include "panoclone/panorama.hpp"
#include "panoclone/sphere_geom.hpp"
#include "panoclone/spherical_polygon.hpp"

namespace panoclone::fixtures {

inline double deg(double d) { return d * kPi / 180.0; }

inline UnitVector random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Vec3 v(n(rng), n(rng), n(rng));
    if (v.norm() > 1e-6) return UnitVector::normalized(v);
  }
}

inline UnitVector random_non_polar(std::mt19937_64& rng, double min_rho = 1e-3) {
  for (;;) {
    const UnitVector v = random_unit(rng);
    if (std::hypot(v.x(), v.y()) > min_rho) return v;
  }
}

inline Rotation random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  return rodriguez(random_unit(rng), u(rng));
}

/// Point at angular distance `radius` from `center` in tangent direction `bearing`.
inline UnitVector offset_point(const UnitVector& center, double bearing, double radius) {
  const PatchProjection frame(center);
  const Vec3 dir = std::cos(bearing) * frame.e1() + std::sin(bearing) * frame.e2();
  return UnitVector::normalized(std::cos(radius) * center.vec() + std::sin(radius) * dir);
}

/// Regular spherical polygon around `center`, counter-clockwise seen from outside.
inline SphericalPolygon regular_polygon(const UnitVector& center, int n, double radius, double phase = 0.0) {
  std::vector<UnitVector> pts;
  for (int i = 0; i < n; ++i) pts.push_back(offset_point(center, phase + kTwoPi * i / n, radius));
  return SphericalPolygon(std::move(pts));
}

/// Random star-shaped polygon around `center`; radii in [rmin, rmax].
inline SphericalPolygon random_star_polygon(std::mt19937_64& rng, const UnitVector& center, int n, double rmin,
                                            double rmax, bool reverse = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Jittered even bearings keep the vertices distinct and in angular order.
  std::vector<double> bearings(n);
  for (int i = 0; i < n; ++i) bearings[i] = (i + 0.15 + 0.7 * u(rng)) * kTwoPi / n;
  std::vector<UnitVector> pts;
  for (int i = 0; i < n; ++i) pts.push_back(offset_point(center, bearings[i], rmin + (rmax - rmin) * u(rng)));
  if (reverse) std::reverse(pts.begin(), pts.end());
  return SphericalPolygon(std::move(pts));
}

/// Band of constant half-height around the equator, centered on phi = 0 and
/// covering [-half_span, half_span] in azimuth, then tilted about the x axis.
/// The latitude rows are traced with `step` spaced vertices and resampled at
/// `spacing`.
inline SphericalPolygon band_patch(double half_span, double half_width, double spacing, double tilt = 0.0,
                                   double step = 0.02) {
  std::vector<UnitVector> pts;
  const int n = int(std::ceil(2 * half_span / step));
  for (int i = 0; i <= n; ++i) pts.push_back(sph_to_unit({-half_span + 2 * half_span * i / n, kPi / 2 - half_width}));
  for (int i = n; i >= 0; --i) pts.push_back(sph_to_unit({-half_span + 2 * half_span * i / n, kPi / 2 + half_width}));
  const Rotation r = rodriguez(UnitVector::normalized(1, 0, 0), tilt);
  for (auto& p : pts) p = r * p;
  return sample_boundary(pts, spacing);
}

/// Strip that is straight in the equirectangular image: its centerline
/// climbs linearly from latitude -rise to +rise across [-half_span, half_span].
inline SphericalPolygon slanted_strip(double half_span, double half_width, double rise, double spacing,
                                      int steps = 150) {
  std::vector<UnitVector> pts;
  for (int i = 0; i <= steps; ++i) {
    const double t = -1.0 + 2.0 * i / steps;
    pts.push_back(sph_to_unit({t * half_span, kPi / 2 - (t * rise + half_width)}));
  }
  for (int i = steps; i >= 0; --i) {
    const double t = -1.0 + 2.0 * i / steps;
    pts.push_back(sph_to_unit({t * half_span, kPi / 2 - (t * rise - half_width)}));
  }
  return sample_boundary(pts, spacing);
}

/// Smooth synthetic panorama.
inline Panorama smooth_panorama(int h, double seed = 0.0) {
  Panorama p(2 * h, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < 2 * h; ++x) {
      const UnitVector v = pixel_to_unit({x + 0.5, y + 0.5}, 2 * h, h);
      p.set(x, y, {0.5 + 0.3 * std::sin(2.0 * v.x() + seed), 0.5 + 0.3 * std::cos(1.5 * v.y() - seed),
                   0.5 + 0.25 * std::sin(v.z() * 2.5 + 0.5 * seed)});
    }
  }
  return p;
}

/// Panorama with detail at several scales (for aliasing and divergence checks).
inline Panorama textured_panorama(int h, double seed = 0.0) {
  Panorama p(2 * h, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < 2 * h; ++x) {
      const UnitVector v = pixel_to_unit({x + 0.5, y + 0.5}, 2 * h, h);
      const double a = std::sin(23.0 * v.x() + seed) * std::cos(19.0 * v.y() - seed);
      const double b = std::sin(41.0 * v.z() + 7.0 * v.x());
      const double c = std::cos(11.0 * v.x() * v.y() + 13.0 * v.z());
      p.set(x, y, {0.5 + 0.3 * a, 0.5 + 0.3 * b, 0.5 + 0.3 * c});
    }
  }
  return p;
}

}  // namespace panoclone::fixtures
