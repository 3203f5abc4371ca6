#pragma once

// Preprocess-once, clone-many engine.
//
// A session holds the source patch, its mesh and one coordinate row per mesh
// vertex. Cloning at an anchor rotates the patch with the two-step rotation,
// takes boundary differences against the target, spreads them over the mesh
// (the membrane) and pulls every covered target pixel back into the source.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "panoclone/boundary.hpp"
#include "panoclone/errors.hpp"
#include "panoclone/mesh.hpp"
#include "panoclone/panorama.hpp"
#include "panoclone/parallel.hpp"
#include "panoclone/smvc.hpp"
#include "panoclone/sphere_geom.hpp"
#include "panoclone/spherical_polygon.hpp"
#include "panoclone/split.hpp"

namespace panoclone {

enum class SplitMode { Auto, Off, Median, PcaSphere, PcaProjected };

inline const char* to_string(SplitMode m) {
  switch (m) {
    case SplitMode::Auto: return "auto";
    case SplitMode::Off: return "off";
    case SplitMode::Median: return "median";
    case SplitMode::PcaSphere: return "pca-sphere";
    case SplitMode::PcaProjected: return "pca-projected";
  }
  return "unknown";
}

inline SplitMode parse_split_mode(std::string_view s) {
  for (SplitMode m : {SplitMode::Auto, SplitMode::Off, SplitMode::Median, SplitMode::PcaSphere,
                      SplitMode::PcaProjected}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown split mode '" + std::string(s) + "'");
}

inline bool valid_supersampling(int n) { return n == 1 || n == 2 || n == 4 || n == 8 || n == 16; }

struct PreprocessOptions {
  /// Boundary sample spacing in radians; 0 means one source pixel.
  double boundary_spacing = 0.0;
  SplitMode split = SplitMode::Auto;
  double split_margin = kSplitMargin;
  /// Datum v_s; defaults to the boundary centroid (or the mesh vertex
  /// nearest to it when the centroid falls outside the patch).
  std::optional<UnitVector> datum;
  /// Keep unsplit rows even when some vertex overflows.
  bool allow_overflow = false;
  int supersampling = 1;
  MeshOptions mesh;
};

struct PreprocessStats {
  double mesh_ms = 0.0;
  double coordinates_ms = 0.0;
  double total_ms = 0.0;
};

struct CloneSession {
  Panorama source;
  SphericalPolygon boundary;
  AdaptiveMesh mesh;
  std::vector<CoordinateRow> rows;
  std::optional<SplitPlan> split;
  UnitVector datum;
  int supersampling = 1;
  /// Alpha raster registered to the source; empty when absent.
  std::vector<float> matte;
  /// Vertices whose rows overflow (only populated with allow_overflow).
  std::vector<int> overflow_vertices;
  PreprocessStats stats;

  bool has_matte() const { return !matte.empty(); }
};

/// Per-vertex RGB offsets for one anchor.
struct MembraneField {
  Rotation rotation;
  SphericalCoord anchor;
  std::vector<Rgb> boundary_difference;
  std::vector<Rgb> offsets;
  double elapsed_ms = 0.0;
};

struct PixelRect {
  int x = 0, y = 0, width = 0, height = 0;
};

struct RenderOptions {
  /// 0 uses the session setting.
  int supersampling = 0;
  bool use_matte = true;
  std::optional<PixelRect> rect;
};

struct RenderStats {
  double elapsed_ms = 0.0;
  std::size_t pixels = 0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

inline std::vector<CoordinateRow> direct_coordinates(const AdaptiveMesh& mesh) {
  const SphericalPolygon full = mesh.boundary();
  std::vector<CoordinateRow> rows(mesh.size());
  parallel_for(mesh.size(), [&](std::size_t v) {
    rows[v] = mesh.is_boundary(v) ? CoordinateRow::indicator(mesh.boundary_count, v)
                                  : smvc_for_vertex(mesh.vertices[v], full, int(v));
  });
  return rows;
}

inline std::vector<int> overflowing(const std::vector<CoordinateRow>& rows) {
  std::vector<int> out;
  for (std::size_t v = 0; v < rows.size(); ++v) {
    if (row_overflows(rows[v])) out.push_back(int(v));
  }
  return out;
}

inline SplitMethod method_for(SplitMode m) {
  switch (m) {
    case SplitMode::PcaSphere: return SplitMethod::PcaSphere;
    case SplitMode::PcaProjected: return SplitMethod::PcaProjected;
    default: return SplitMethod::MedianAzimuth;
  }
}

inline UnitVector choose_datum(const AdaptiveMesh& mesh, const SphericalPolygon& poly) {
  const UnitVector c = poly.centroid();
  if (!is_polar(c) && mesh.try_locate(c)) return c;
  // Nearest interior vertex otherwise; a polar centroid cannot be a datum.
  int best = -1;
  double best_d = kPi + 1.0;
  for (std::size_t v = mesh.boundary_count; v < mesh.size(); ++v) {
    if (is_polar(mesh.vertices[v])) continue;
    const double d = angle_between(c, mesh.vertices[v]);
    if (d < best_d) {
      best_d = d;
      best = int(v);
    }
  }
  if (best < 0) throw Error(ErrorCode::TriangulationFailure, "mesh has no interior vertex for the datum");
  return mesh.vertices[best];
}

}  // namespace detail

/// Samples the boundary, builds the mesh and computes the coordinate rows.
inline CloneSession preprocess(const Panorama& source, const std::vector<SphericalCoord>& polyline,
                               const PreprocessOptions& opt = {}) {
  if (!valid_supersampling(opt.supersampling)) {
    throw Error(ErrorCode::InvalidArgument, "supersampling must be one of 1, 2, 4, 8, 16");
  }
  if (source.empty()) throw Error(ErrorCode::InvalidArgument, "source panorama is empty");
  const auto t0 = detail::Clock::now();
  CloneSession s;
  s.source = source;
  s.supersampling = opt.supersampling;

  std::vector<UnitVector> pts;
  pts.reserve(polyline.size());
  for (const auto& c : polyline) {
    if (!std::isfinite(c.phi) || !std::isfinite(c.theta) || c.theta < 0.0 || c.theta > kPi) {
      throw Error(ErrorCode::InvalidArgument, "boundary point out of range", std::size_t(&c - polyline.data()));
    }
    pts.push_back(sph_to_unit(c));
  }
  const std::vector<UnitVector> clean = dedupe_polyline(pts);
  double spacing = opt.boundary_spacing;
  if (spacing <= 0.0) spacing = default_boundary_spacing(source.height(), spherical_centroid(clean));
  s.boundary = sample_boundary(clean, spacing);
  s.mesh = build_adaptive_mesh(s.boundary, opt.mesh);
  s.stats.mesh_ms = detail::ms_since(t0);

  const auto t1 = detail::Clock::now();
  auto split_with = [&](SplitMethod m) {
    s.split = split_path(s.mesh, m, opt.split_margin);
    s.rows = composed_coordinates(s.mesh, *s.split);
  };
  switch (opt.split) {
    case SplitMode::Median:
    case SplitMode::PcaSphere:
    case SplitMode::PcaProjected:
      split_with(detail::method_for(opt.split));
      break;
    case SplitMode::Off: {
      s.rows = detail::direct_coordinates(s.mesh);
      s.overflow_vertices = detail::overflowing(s.rows);
      if (!s.overflow_vertices.empty() && !opt.allow_overflow) {
        const int v = s.overflow_vertices.front();
        throw Error(ErrorCode::CoordinateOverflow,
                    "coordinates overflow at mesh vertex " + std::to_string(v) + " (" +
                        std::to_string(s.overflow_vertices.size()) + " vertices); enable splitting",
                    std::size_t(v));
      }
      break;
    }
    case SplitMode::Auto: {
      bool failed = false;
      if (!needs_split(s.boundary, opt.split_margin).split) {
        try {
          s.rows = detail::direct_coordinates(s.mesh);
          failed = !detail::overflowing(s.rows).empty();
        } catch (const Error& e) {
          if (e.code() != ErrorCode::AntipodalBoundary) throw;
          failed = true;
        }
      }
      if (failed || needs_split(s.boundary, opt.split_margin).split) split_with(SplitMethod::MedianAzimuth);
      break;
    }
  }
  s.stats.coordinates_ms = detail::ms_since(t1);

  if (opt.datum) {
    if (!s.mesh.try_locate(*opt.datum)) throw Error(ErrorCode::OutsidePatch, "datum lies outside the patch");
    s.datum = *opt.datum;
  } else {
    s.datum = detail::choose_datum(s.mesh, s.boundary);
  }
  s.stats.total_ms = detail::ms_since(t0);
  return s;
}

/// Attaches an alpha matte registered to the source raster.
inline void attach_matte(CloneSession& s, std::vector<float> alpha) {
  if (alpha.size() != std::size_t(s.source.width()) * s.source.height()) {
    throw Error(ErrorCode::InvalidArgument, "matte size does not match the source panorama");
  }
  s.matte = std::move(alpha);
}

inline void validate_anchor(const SphericalCoord& a) {
  if (!std::isfinite(a.phi) || !std::isfinite(a.theta) || a.theta < 0.0 || a.theta > kPi) {
    throw Error(ErrorCode::InvalidArgument, "anchor out of range: theta must lie in [0, pi]");
  }
}

/// Boundary differences d_i = f*(R v_i) - g(v_i) and the membrane rows * d.
inline MembraneField compute_membrane(const CloneSession& s, const Panorama& target, const SphericalCoord& anchor) {
  validate_anchor(anchor);
  const auto t0 = detail::Clock::now();
  MembraneField m;
  m.anchor = anchor;
  m.rotation = two_step_rotation(s.datum, sph_to_unit(anchor));
  const std::size_t nb = s.mesh.boundary_count;
  m.boundary_difference.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const UnitVector& v = s.mesh.vertices[i];
    m.boundary_difference[i] = target.sample(m.rotation * v) - s.source.sample(v);
  }
  m.offsets.assign(s.mesh.size(), Rgb{});
  parallel_for(s.mesh.size(), [&](std::size_t v) {
    const CoordinateRow& row = s.rows[v];
    if (row.snapped_to) {
      m.offsets[v] = m.boundary_difference[*row.snapped_to];
      return;
    }
    double r = 0.0, g = 0.0, b = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      const double w = row.weights[i];
      r += w * m.boundary_difference[i].r;
      g += w * m.boundary_difference[i].g;
      b += w * m.boundary_difference[i].b;
    }
    m.offsets[v] = {r, g, b};
  }, 16);
  m.elapsed_ms = detail::ms_since(t0);
  return m;
}

namespace detail {

inline Rgb interpolate(const MembraneField& m, const AdaptiveMesh& mesh, const BarycentricHit& hit) {
  const auto& t = mesh.triangles[hit.triangle];
  Rgb out;
  for (int k = 0; k < 3; ++k) out += m.offsets[t[k]] * hit.weights[k];
  return out;
}

inline PixelCoord map_to_source(const Mat3& inv, double x, double y, int tw, int th, int sw, int sh) {
  const UnitVector u = pixel_to_unit({x, y}, tw, th);
  return unit_to_pixel(UnitVector::normalized(inv * u.vec()), sw, sh);
}

inline double wrap_columns(double dx, int w) {
  if (dx > 0.5 * w) return dx - w;
  if (dx < -0.5 * w) return dx + w;
  return dx;
}

/// Stratified sub-pixel offsets from the pixel center, one per stratum.
inline std::vector<double> strata(int n, std::uint64_t salt) {
  std::vector<double> o(n);
  if (n == 1) return {0.0};
  for (int i = 0; i < n; ++i) o[i] = (i + 0.5 + 0.5 * hash_jitter(salt * 131 + std::uint64_t(i))) / n - 0.5;
  return o;
}

/// Column interval [lo, hi] (in continuous pixel units, may exceed the
/// raster) whose centers lie within `radius` of `c` on row center y, or
/// nullopt. A full row returns [0, w].
inline std::optional<std::pair<double, double>> row_interval(const UnitVector& c, double radius, double y, int w,
                                                             int h) {
  if (radius >= kPi) return std::pair{0.0, double(w)};
  const double theta = kPi * y / h;
  const SphericalCoord cc = unit_to_sph(c);
  const double a = std::cos(theta) * std::cos(cc.theta);
  const double b = std::sin(theta) * std::sin(cc.theta);
  const double cr = std::cos(radius);
  if (b < 1e-12) {
    if (a >= cr) return std::pair{0.0, double(w)};
    return std::nullopt;
  }
  const double q = (cr - a) / b;
  if (q <= -1.0) return std::pair{0.0, double(w)};
  if (q > 1.0) return std::nullopt;
  const double dphi = std::acos(q);
  const double center = cc.phi / kTwoPi * w;
  const double half = dphi / kTwoPi * w + 1.0;
  if (2.0 * half >= w) return std::pair{0.0, double(w)};
  return std::pair{center - half, center + half};
}

}  // namespace detail

/// Composite value at a target-space direction: the clone inside the
/// rotated patch, the bilinear target elsewhere. No matte.
inline Rgb composite_at(const CloneSession& s, const Panorama& target, const MembraneField& m, const UnitVector& u) {
  const UnitVector v = m.rotation.inverse() * u;
  const auto hit = s.mesh.try_locate(v);
  if (!hit) return target.sample(u);
  return (s.source.sample(v) + detail::interpolate(m, s.mesh, *hit)).clamped();
}

/// Pull-based raster: every target pixel whose center falls inside the
/// rotated patch is replaced by the averaged, clamped clone samples.
inline Panorama render_clone(const CloneSession& s, const Panorama& target, const MembraneField& m,
                             const RenderOptions& opt = {}, RenderStats* stats = nullptr) {
  const auto t0 = detail::Clock::now();
  const int n = opt.supersampling > 0 ? opt.supersampling : s.supersampling;
  if (!valid_supersampling(n)) throw Error(ErrorCode::InvalidArgument, "supersampling must be one of 1, 2, 4, 8, 16");
  const int tw = target.width(), th = target.height();
  const int sw = s.source.width(), sh = s.source.height();
  PixelRect rect{0, 0, tw, th};
  if (opt.rect) {
    rect = *opt.rect;
    if (rect.width <= 0 || rect.height <= 0 || rect.x < 0 || rect.y < 0 || rect.x + rect.width > tw ||
        rect.y + rect.height > th) {
      throw Error(ErrorCode::InvalidArgument, "render rectangle outside the target");
    }
  }

  Panorama out = target;
  const Mat3 inv = m.rotation.inverse().matrix();
  const UnitVector cone = m.rotation * s.mesh.projection.center();
  double max_edge = 0.0;
  for (const auto& e : s.mesh.edges) max_edge = std::max(max_edge, e.length);
  const double radius = s.mesh.bounding_radius() + 2.0 * kPi / th + 0.25 * max_edge * max_edge;
  const std::vector<double> ox = detail::strata(n, 2 * std::uint64_t(n));
  const std::vector<double> oy = detail::strata(n, 2 * std::uint64_t(n) + 1);
  const bool matte = opt.use_matte && s.has_matte();
  Panorama matte_plane;
  if (matte) {
    matte_plane = Panorama(sw, sh);
    matte_plane.set_alpha_plane(s.matte);
  }
  std::atomic<std::size_t> covered{0};

  parallel_for(std::size_t(rect.height), [&](std::size_t row) {
    const int y = rect.y + int(row);
    const double yc = y + 0.5;
    const auto span = detail::row_interval(cone, radius, yc, tw, th);
    if (!span) return;
    int x0 = int(std::floor(span->first)), x1 = int(std::ceil(span->second));
    if (x1 - x0 >= tw) {
      x0 = 0;
      x1 = tw;
    }
    std::vector<double> ax(n), ay(n);
    std::size_t local = 0;
    for (int xi = x0; xi < x1; ++xi) {
      const int x = ((xi % tw) + tw) % tw;
      if (x < rect.x || x >= rect.x + rect.width) continue;
      const double xc = x + 0.5;
      const UnitVector u = pixel_to_unit({xc, yc}, tw, th);
      const UnitVector v = UnitVector::normalized(inv * u.vec());
      const auto hit = s.mesh.try_locate(v);
      if (!hit) continue;
      ++local;
      const Rgb offset = detail::interpolate(m, s.mesh, *hit);
      const PixelCoord pc = unit_to_pixel(v, sw, sh);
      Rgb color;
      if (n == 1) {
        color = (s.source.sample_pixel(pc.x, pc.y) + offset).clamped();
      } else {
        // Linearize the target-to-source pixel map around the center.
        const PixelCoord px0 = detail::map_to_source(inv, xc - 0.5, yc, tw, th, sw, sh);
        const PixelCoord px1 = detail::map_to_source(inv, xc + 0.5, yc, tw, th, sw, sh);
        const PixelCoord py0 = detail::map_to_source(inv, xc, yc - 0.5, tw, th, sw, sh);
        const PixelCoord py1 = detail::map_to_source(inv, xc, yc + 0.5, tw, th, sw, sh);
        const double jxx = detail::wrap_columns(px1.x - px0.x, sw), jyx = px1.y - px0.y;
        const double jxy = detail::wrap_columns(py1.x - py0.x, sw), jyy = py1.y - py0.y;
        const bool exact = pc.y < 3.0 || pc.y > sh - 3.0 || y < 1 || y >= th - 1 ||
                           std::max({std::abs(jxx), std::abs(jyx), std::abs(jxy), std::abs(jyy)}) > 8.0;
        double r = 0.0, g = 0.0, b = 0.0;
        if (exact) {
          for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
              const PixelCoord p = detail::map_to_source(inv, xc + ox[i], yc + oy[j], tw, th, sw, sh);
              const Rgb c = (s.source.sample_pixel(p.x, p.y) + offset).clamped();
              r += c.r;
              g += c.g;
              b += c.b;
            }
          }
        } else {
          for (int i = 0; i < n; ++i) {
            ax[i] = jxx * ox[i];
            ay[i] = jyx * ox[i];
          }
          for (int j = 0; j < n; ++j) {
            const double bx = pc.x + jxy * oy[j], by = pc.y + jyy * oy[j];
            for (int i = 0; i < n; ++i) {
              const Rgb c = (s.source.sample_pixel(bx + ax[i], by + ay[i]) + offset).clamped();
              r += c.r;
              g += c.g;
              b += c.b;
            }
          }
        }
        const double k = 1.0 / (n * n);
        color = {r * k, g * k, b * k};
      }
      if (matte) {
        const double a = std::clamp(matte_plane.sample_alpha_pixel(pc.x, pc.y), 0.0, 1.0);
        color = color * a + target.at(x, y) * (1.0 - a);
      }
      out.set(x, y, color);
    }
    covered += local;
  }, 4);

  if (stats) {
    stats->elapsed_ms = detail::ms_since(t0);
    stats->pixels = covered.load();
  }
  return out;
}

struct CloneTiming {
  double membrane_ms = 0.0;
  double raster_ms = 0.0;
};

/// Membrane plus raster for one anchor.
inline Panorama clone_at(const CloneSession& s, const Panorama& target, const SphericalCoord& anchor,
                         const RenderOptions& opt = {}, CloneTiming* timing = nullptr) {
  const MembraneField m = compute_membrane(s, target, anchor);
  RenderStats rs;
  Panorama out = render_clone(s, target, m, opt, &rs);
  if (timing) *timing = {m.elapsed_ms, rs.elapsed_ms};
  return out;
}

/// Datum in spherical coordinates: the anchor that reproduces the source
/// placement.
inline SphericalCoord datum_anchor(const CloneSession& s) { return unit_to_sph(s.datum); }

/// Per-vertex coordinate diagnostics as CSV. The unsplit columns evaluate
/// against the full boundary; the row columns describe the rows in use.
inline void write_diagnostics_csv(const CloneSession& s, std::ostream& os) {
  os << "vertex,phi,theta,boundary,region,theta_max,sum_tilde,lambda_min,overflow,row_sum,row_min,row_max\n";
  const SphericalPolygon full = s.mesh.boundary();
  std::vector<CoordinateDiagnostics> diag(s.mesh.size());
  parallel_for(s.mesh.size(), [&](std::size_t v) {
    if (!s.mesh.is_boundary(v)) diag[v] = diagnose(s.mesh.vertices[v], full);
  });
  const auto old = os.precision(12);
  for (std::size_t v = 0; v < s.mesh.size(); ++v) {
    const SphericalCoord c = unit_to_sph(s.mesh.vertices[v]);
    const char* region = "none";
    if (s.split) {
      switch (s.split->tags[v]) {
        case Region::Path: region = "path"; break;
        case Region::A: region = "a"; break;
        case Region::B: region = "b"; break;
      }
    }
    const CoordinateRow& row = s.rows[v];
    const auto [lo, hi] = std::minmax_element(row.weights.begin(), row.weights.end());
    os << v << ',' << c.phi << ',' << c.theta << ',' << (s.mesh.is_boundary(v) ? 1 : 0) << ',' << region << ',';
    if (s.mesh.is_boundary(v)) {
      os << "0,1,0,0";
    } else {
      const auto& d = diag[v];
      os << d.theta_max << ',' << d.sum_tilde << ',' << d.lambda_min << ',' << (d.overflow ? 1 : 0);
    }
    os << ',' << row.sum() << ',' << *lo << ',' << *hi << '\n';
  }
  os.precision(old);
}

/// Membrane channel `channel` as a grayscale source-space panorama:
/// 0.5 + gain * offset, interpolated over the mesh; pixels off the patch
/// stay mid-gray.
inline Panorama membrane_image(const CloneSession& s, const MembraneField& m, int channel, double gain = 2.0) {
  Panorama out(s.source.width(), s.source.height(), {0.5, 0.5, 0.5});
  const int w = out.width(), h = out.height();
  parallel_for(std::size_t(h), [&](std::size_t y) {
    for (int x = 0; x < w; ++x) {
      const UnitVector v = pixel_to_unit({x + 0.5, y + 0.5}, w, h);
      const auto hit = s.mesh.try_locate(v);
      if (!hit) continue;
      const double g = 0.5 + gain * detail::interpolate(m, s.mesh, *hit)[channel];
      out.set(x, int(y), {g, g, g});
    }
  }, 8);
  return out;
}

/// Planar translation clone on the unrolled rasters. `mask` is the patch
/// outline in source pixel coordinates and `offset` moves it into the
/// target. Columns wrap; rows must stay inside the raster.
inline Panorama planar_clone_baseline(const Panorama& source, const Panorama& target,
                                      const std::vector<PixelCoord>& mask, PixelCoord offset) {
  if (mask.size() < 3) throw Error(ErrorCode::DegeneratePolyline, "mask needs at least 3 vertices");
  const int w = target.width(), h = target.height();
  if (source.width() != w || source.height() != h) {
    throw Error(ErrorCode::InvalidArgument, "planar baseline needs equally sized panoramas");
  }
  // One boundary sample per pixel of outline length.
  std::vector<Vec2> ring;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const Vec2 a(mask[i].x, mask[i].y);
    const Vec2 b(mask[(i + 1) % mask.size()].x, mask[(i + 1) % mask.size()].y);
    const int segs = std::max(1, int(std::ceil((b - a).norm())));
    for (int k = 0; k < segs; ++k) ring.push_back(a + (b - a) * (double(k) / segs));
  }
  double ymin = 1e300, ymax = -1e300, xmin = 1e300, xmax = -1e300;
  for (const auto& p : ring) {
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
  }
  if (ymin < 0.0 || ymax > h) throw Error(ErrorCode::MaskOutOfBounds, "mask leaves the source raster vertically");
  if (ymin + offset.y < 0.0 || ymax + offset.y > h) {
    throw Error(ErrorCode::MaskOutOfBounds, "offset mask crosses the top or bottom edge of the target");
  }
  std::vector<Rgb> diff(ring.size());
  for (std::size_t i = 0; i < ring.size(); ++i) {
    diff[i] = target.sample_pixel(ring[i].x() + offset.x, ring[i].y() + offset.y) -
              source.sample_pixel(ring[i].x(), ring[i].y());
  }
  Panorama out = target;
  const int y0 = std::max(0, int(std::floor(ymin + offset.y))), y1 = std::min(h, int(std::ceil(ymax + offset.y)));
  const int x0 = int(std::floor(xmin + offset.x)), x1 = int(std::ceil(xmax + offset.x));
  parallel_for(std::size_t(std::max(0, y1 - y0)), [&](std::size_t r) {
    const int y = y0 + int(r);
    for (int xi = x0; xi < x1; ++xi) {
      const Vec2 p(xi + 0.5 - offset.x, y + 0.5 - offset.y);
      if (winding_number(ring, p) == 0) continue;
      const CoordinateRow row = planar_mvc(p, ring);
      Rgb m;
      for (std::size_t i = 0; i < ring.size(); ++i) m += diff[i] * row[i];
      out.set(((xi % w) + w) % w, y, (source.sample_pixel(p.x(), p.y()) + m).clamped());
    }
  }, 4);
  return out;
}

}  // namespace panoclone
