#pragma once

// Spherical mean value coordinates.
//
// Two independent evaluations are provided:
//   smvc_direct         closed form in the boundary angles theta_i, alpha_i
//   smvc_stereographic  planar MVC of the stereographic image of the polygon
//                       seen from the antipode of v, rescaled and renormalized
// They must agree to rounding; the second one is used as the oracle and as
// the source of the overflow diagnostics. The two paths deliberately share no
// intermediate code.
//
// The coordinates reproduce the point, sum_i lambda_i v_i = v. They do not
// sum to one: the sum equals 1 to second order in the patch radius only.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "panoclone/errors.hpp"
#include "panoclone/sphere_geom.hpp"
#include "panoclone/spherical_polygon.hpp"

namespace panoclone {

inline constexpr double kVertexSnap = 1e-9;
inline constexpr double kAntipodalTol = 1e-9;

struct CoordinateRow {
  std::vector<double> weights;
  /// Set when the evaluation point coincided with a vertex (or, for planar
  /// MVC, lay on an edge) and the limit row was returned.
  std::optional<std::size_t> snapped_to;

  std::size_t size() const { return weights.size(); }
  double operator[](std::size_t i) const { return weights[i]; }
  double sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
  static CoordinateRow indicator(std::size_t n, std::size_t i) {
    CoordinateRow r;
    r.weights.assign(n, 0.0);
    r.weights[i] = 1.0;
    r.snapped_to = i;
    return r;
  }
};

struct CoordinateDiagnostics {
  double theta_max = 0.0;
  double sum_tilde = 0.0;
  double lambda_min = 0.0;
  double lambda_max_abs = 0.0;
  bool overflow = false;
  bool antipodal = false;
  /// Largest deviation seen in the stereographic bridge identities
  /// d_i = 2 tan(theta_i/2) and (1 + cos theta_i) tan(theta_i/2) = sin theta_i.
  double bridge_error = 0.0;
};

inline Vec3 reproduce(const CoordinateRow& row, std::span<const UnitVector> vertices) {
  Vec3 s = Vec3::Zero();
  for (std::size_t i = 0; i < row.size(); ++i) s += row[i] * vertices[i].vec();
  return s;
}
inline Vec3 reproduce(const CoordinateRow& row, const SphericalPolygon& poly) {
  return reproduce(row, std::span<const UnitVector>(poly.vertices()));
}

/// Planar mean value coordinates of p with respect to a closed polygon.
/// On a vertex the indicator row is returned; on an edge the linear
/// interpolation row. Both set `snapped_to`.
inline CoordinateRow planar_mvc(const Vec2& p, std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) throw Error(ErrorCode::DegeneratePolyline, "planar_mvc needs at least 3 vertices");
  std::vector<Vec2> r(n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = poly[i] - p;
    d[i] = r[i].norm();
    if (d[i] < 1e-12) return CoordinateRow::indicator(n, i);
  }
  // tan(alpha_i / 2) with alpha_i the signed angle from r_i to r_{i+1}.
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double cr = r[i].x() * r[j].y() - r[i].y() * r[j].x();
    const double dt = r[i].dot(r[j]);
    const double denom = d[i] * d[j] + dt;
    if (std::abs(cr) <= 1e-14 * d[i] * d[j] && dt < 0.0) {
      CoordinateRow row;
      row.weights.assign(n, 0.0);
      row.weights[i] = d[j] / (d[i] + d[j]);
      row.weights[j] = d[i] / (d[i] + d[j]);
      row.snapped_to = i;
      return row;
    }
    t[i] = cr / denom;
  }
  CoordinateRow row;
  row.weights.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (t[(i + n - 1) % n] + t[i]) / d[i];
    row.weights[i] = w;
    total += w;
  }
  for (double& w : row.weights) w /= total;
  return row;
}

/// Closed-form spherical mean value coordinates of v.
///
/// Throws AntipodalBoundary (with the vertex index) when a boundary vertex is
/// within 1e-9 of -v, and CoordinateOverflow if the normalizer vanishes.
inline CoordinateRow smvc_direct(const UnitVector& v, const SphericalPolygon& poly) {
  const std::size_t n = poly.size();
  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) {
    theta[i] = angle_between(v, poly[i]);
    if (theta[i] < kVertexSnap) return CoordinateRow::indicator(n, i);
    if (theta[i] > kPi - kAntipodalTol) {
      throw Error(ErrorCode::AntipodalBoundary, "boundary vertex is antipodal to the evaluation point", i);
    }
  }
  std::vector<double> half_tan(n);
  for (std::size_t i = 0; i < n; ++i) {
    half_tan[i] = std::tan(0.5 * signed_angle_at(v, poly[i], poly.wrapped(std::ptrdiff_t(i) + 1)));
  }
  CoordinateRow row;
  row.weights.resize(n);
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double tsum = half_tan[(i + n - 1) % n] + half_tan[i];
    row.weights[i] = tsum / std::sin(theta[i]);
    denom += tsum / std::tan(theta[i]);
  }
  if (denom == 0.0 || !std::isfinite(denom)) {
    throw Error(ErrorCode::CoordinateOverflow, "spherical coordinate normalizer vanished");
  }
  for (double& w : row.weights) w /= denom;
  return row;
}

struct StereographicResult {
  CoordinateRow row;
  CoordinateDiagnostics diagnostics;
  /// Intermediate coordinates: planar (lambda bar) and rescaled (lambda tilde).
  std::vector<double> planar;
  std::vector<double> tilde;
};

inline constexpr double kOverflowDelta = 0.1;

/// Spherical mean value coordinates through the stereographic construction:
///   1. move the origin to the projection point -v; v' = 2v, v'_i = v_i + v
///   2. scale each v'_i onto the tangent plane at v: vbar'_i = s_i v'_i
///   3. planar MVC of v' with respect to the projected polygon -> lambda bar
///   4. lambda tilde_i = (|vbar'_i| / |v'_i|) lambda bar_i
///   5. lambda_i = lambda tilde_i / (2 - sum lambda tilde)
inline StereographicResult smvc_stereographic(const UnitVector& v, const SphericalPolygon& poly,
                                              double overflow_delta = kOverflowDelta) {
  const std::size_t n = poly.size();
  const Vec3 origin = -v.vec();
  const Vec3 vp = v.vec() - origin;

  // Tangent-plane frame at v.
  const Vec3 a = std::abs(v.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = (a - a.dot(v.vec()) * v.vec()).normalized();
  const Vec3 e2 = v.vec().cross(e1);

  StereographicResult res;
  auto& diag = res.diagnostics;
  std::vector<Vec2> projected(n);
  std::vector<double> ratio(n);
  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 vi = poly[i].vec() - origin;
    theta[i] = std::acos(std::clamp(poly[i].vec().dot(v.vec()), -1.0, 1.0));
    diag.theta_max = std::max(diag.theta_max, theta[i]);
    if (theta[i] < kVertexSnap) {
      res.row = CoordinateRow::indicator(n, i);
      res.planar = res.row.weights;
      res.tilde = res.row.weights;
      diag.sum_tilde = 1.0;
      diag.lambda_min = 0.0;
      diag.lambda_max_abs = 1.0;
      return res;
    }
    if (theta[i] > kPi - kAntipodalTol) {
      throw Error(ErrorCode::AntipodalBoundary, "boundary vertex is antipodal to the evaluation point", i);
    }
    // The tangent plane at v is {x' : x' . v = 2} in translated coordinates.
    const double s = 2.0 / vi.dot(v.vec());
    const Vec3 bar = s * vi;
    ratio[i] = bar.norm() / vi.norm();
    const Vec3 rel = bar - vp;
    projected[i] = Vec2(rel.dot(e1), rel.dot(e2));

    const double d = projected[i].norm();
    const double half = std::tan(0.5 * theta[i]);
    diag.bridge_error = std::max(diag.bridge_error, std::abs(d - 2.0 * half) / std::max(1.0, d));
    diag.bridge_error = std::max(diag.bridge_error, std::abs((1.0 + std::cos(theta[i])) * half - std::sin(theta[i])));
    diag.bridge_error = std::max(diag.bridge_error, std::abs(ratio[i] - 2.0 / (1.0 + std::cos(theta[i]))) /
                                                        std::max(1.0, ratio[i]));
  }

  const CoordinateRow planar = planar_mvc(Vec2::Zero(), projected);
  res.planar = planar.weights;
  res.tilde.resize(n);
  double sum_tilde = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    res.tilde[i] = ratio[i] * planar[i];
    sum_tilde += res.tilde[i];
  }
  diag.sum_tilde = sum_tilde;
  res.row.weights.resize(n);
  diag.lambda_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    res.row.weights[i] = res.tilde[i] / (2.0 - sum_tilde);
    diag.lambda_min = std::min(diag.lambda_min, res.row.weights[i]);
    diag.lambda_max_abs = std::max(diag.lambda_max_abs, std::abs(res.row.weights[i]));
  }
  diag.overflow = sum_tilde > 2.0 - overflow_delta;
  return res;
}

/// Overflow diagnostics for one evaluation point. Never throws: antipodal
/// configurations come back flagged.
inline CoordinateDiagnostics diagnose(const UnitVector& v, const SphericalPolygon& poly,
                                      double overflow_delta = kOverflowDelta) {
  try {
    return smvc_stereographic(v, poly, overflow_delta).diagnostics;
  } catch (const Error&) {
    CoordinateDiagnostics d;
    d.theta_max = kPi;
    d.sum_tilde = std::numeric_limits<double>::infinity();
    d.lambda_min = -std::numeric_limits<double>::infinity();
    d.lambda_max_abs = std::numeric_limits<double>::infinity();
    d.overflow = true;
    d.antipodal = true;
    return d;
  }
}

/// Sum of the rescaled coordinates recovered from a closed-form row:
/// sum lambda = S / (2 - S) with S = sum lambda tilde, so S = 2 s / (1 + s).
inline double sum_tilde_from_row(const CoordinateRow& row) {
  const double s = row.sum();
  return 2.0 * s / (1.0 + s);
}

inline bool row_overflows(const CoordinateRow& row, double overflow_delta = kOverflowDelta) {
  if (row.snapped_to) return false;
  return sum_tilde_from_row(row) > 2.0 - overflow_delta;
}

}  // namespace panoclone
