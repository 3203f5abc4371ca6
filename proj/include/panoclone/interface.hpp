#pragma once

// Pieces shared by the command-line tool and the HTTP service: request
// parsing, error reporting and the PNG render path.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "panoclone/clone.hpp"
#include "panoclone/errors.hpp"
#include "panoclone/image_io.hpp"

namespace panoclone {

using json = nlohmann::json;

/// CLI exit status for a library error.
constexpr int exit_code_for(ErrorCode code) { return 10 + int(code); }

inline const char* remediation_hint(ErrorCode code) {
  switch (code) {
    case ErrorCode::PoleDatum: return "move the anchor or datum off the pole (theta strictly inside (0, pi))";
    case ErrorCode::CoordinateOverflow: return "enable splitting (split=auto or median)";
    case ErrorCode::AntipodalBoundary: return "enable splitting or shrink the patch";
    case ErrorCode::AspectError: return "equirectangular images need width = 2 * height";
    case ErrorCode::OutsidePatch: return "pick a datum inside the boundary";
    case ErrorCode::DegeneratePolyline: return "draw at least three distinct boundary points";
    case ErrorCode::MaskOutOfBounds: return "planar cloning cannot cross the top or bottom edge";
    default: return "";
  }
}

inline json error_json(const Error& e) {
  json j{{"error", std::string(to_string(e.code()))}, {"code", int(e.code())}, {"message", e.what()}};
  if (e.index()) j["index"] = *e.index();
  if (const std::string hint = remediation_hint(e.code()); !hint.empty()) j["hint"] = hint;
  return j;
}

namespace detail {

inline double number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw Error(ErrorCode::InvalidArgument, std::string("expected a number for '") + key + "'");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' is not finite");
  return v;
}

inline SphericalCoord checked(SphericalCoord c) {
  if (c.theta < 0.0 || c.theta > kPi) throw Error(ErrorCode::InvalidArgument, "theta must lie in [0, pi]");
  return c;
}

inline SphericalCoord from_pixel(double x, double y, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "pixel coordinates need width and height");
  if (y < 0.0 || y > height) throw Error(ErrorCode::InvalidArgument, "pixel y outside the image");
  return unit_to_sph(pixel_to_unit({x, y}, width, height));
}

inline SphericalCoord point_from_json(const json& p, int width, int height) {
  if (p.is_array()) {
    if (p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw Error(ErrorCode::InvalidArgument, "boundary point arrays must be [phi, theta]");
    }
    return checked({p[0].get<double>(), p[1].get<double>()});
  }
  if (!p.is_object()) throw Error(ErrorCode::InvalidArgument, "boundary points must be objects or arrays");
  if (p.contains("phi") || p.contains("theta")) return checked({number(p, "phi"), number(p, "theta")});
  const int w = p.contains("width") ? int(number(p, "width")) : width;
  const int h = p.contains("height") ? int(number(p, "height")) : height;
  return from_pixel(number(p, "x"), number(p, "y"), w, h);
}

}  // namespace detail

inline json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " is not valid JSON: " + e.what());
  }
}

/// Boundary polyline in radians. Accepts an array of {phi, theta}, of
/// [phi, theta] pairs or of pixel points {x, y, width, height}, or an object
/// {"width", "height", "points": [{x, y}, ...]}.
inline std::vector<SphericalCoord> parse_boundary(const json& j) {
  int width = 0, height = 0;
  const json* points = &j;
  if (j.is_object()) {
    if (j.contains("width")) width = int(detail::number(j, "width"));
    if (j.contains("height")) height = int(detail::number(j, "height"));
    const auto it = j.find("points");
    if (it == j.end()) throw Error(ErrorCode::InvalidArgument, "boundary object needs a 'points' array");
    points = &*it;
  }
  if (!points->is_array()) throw Error(ErrorCode::InvalidArgument, "boundary must be a JSON array of points");
  std::vector<SphericalCoord> out;
  out.reserve(points->size());
  for (const auto& p : *points) out.push_back(detail::point_from_json(p, width, height));
  return out;
}

inline std::vector<SphericalCoord> parse_boundary_text(std::string_view text) {
  return parse_boundary(parse_json(text, "boundary"));
}

/// {phi, theta} in radians, or pixel {x, y} in a width x height target.
inline SphericalCoord parse_anchor(const json& j, int width, int height) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "anchor must be an object");
  if (j.contains("phi") || j.contains("theta")) {
    return detail::checked({detail::number(j, "phi"), detail::number(j, "theta")});
  }
  return detail::from_pixel(detail::number(j, "x"), detail::number(j, "y"), width, height);
}

/// "a,b" as two doubles.
inline std::pair<double, double> parse_pair(std::string_view s, const char* what) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be 'a,b'");
  try {
    std::size_t used = 0;
    const std::string a(s.substr(0, comma)), b(s.substr(comma + 1));
    const double x = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(what);
    const double y = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(what);
    if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument(what);
    return {x, y};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be two numbers 'a,b'");
  }
}

/// Preprocess options from {"split", "spacing_deg", "supersampling",
/// "allow_overflow", "datum": {phi, theta}}.
inline PreprocessOptions preprocess_options(const json& j) {
  PreprocessOptions o;
  if (j.is_null()) return o;
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "options must be a JSON object");
  if (j.contains("split")) {
    if (!j["split"].is_string()) throw Error(ErrorCode::InvalidArgument, "split must be a string");
    o.split = parse_split_mode(j["split"].get<std::string>());
  }
  if (j.contains("spacing_deg")) {
    const double d = detail::number(j, "spacing_deg");
    if (d <= 0.0) throw Error(ErrorCode::InvalidArgument, "spacing_deg must be positive");
    o.boundary_spacing = d * kPi / 180.0;
  }
  if (j.contains("supersampling")) {
    o.supersampling = int(detail::number(j, "supersampling"));
    if (!valid_supersampling(o.supersampling)) {
      throw Error(ErrorCode::InvalidArgument, "supersampling must be one of 1, 2, 4, 8, 16");
    }
  }
  if (j.contains("allow_overflow")) {
    if (!j["allow_overflow"].is_boolean()) throw Error(ErrorCode::InvalidArgument, "allow_overflow must be a boolean");
    o.allow_overflow = j["allow_overflow"].get<bool>();
  }
  if (j.contains("datum")) o.datum = sph_to_unit(detail::checked({detail::number(j["datum"], "phi"),
                                                                   detail::number(j["datum"], "theta")}));
  return o;
}

inline json split_plan_json(const CloneSession& s) {
  if (!s.split) return nullptr;
  json j = plan_to_json(*s.split);
  json pts = json::array();
  for (int v : s.split->path) {
    const SphericalCoord c = unit_to_sph(s.mesh.vertices[v]);
    pts.push_back({c.phi, c.theta});
  }
  j["path_points"] = pts;
  return j;
}

inline json mesh_stats_json(const CloneSession& s) {
  return {{"boundary_samples", s.mesh.boundary_count},
          {"vertices", s.mesh.size()},
          {"interior_vertices", s.mesh.size() - s.mesh.boundary_count},
          {"triangles", s.mesh.triangles.size()},
          {"overflow_vertices", s.overflow_vertices.size()},
          {"split", bool(s.split)},
          {"mesh_ms", s.stats.mesh_ms},
          {"coordinates_ms", s.stats.coordinates_ms},
          {"preprocess_ms", s.stats.total_ms}};
}

/// Mesh geometry for inspection: vertices as [phi, theta], triangles, datum
/// and split plan.
inline json mesh_json(const CloneSession& s) {
  json verts = json::array();
  for (const auto& v : s.mesh.vertices) {
    const SphericalCoord c = unit_to_sph(v);
    verts.push_back({c.phi, c.theta});
  }
  const SphericalCoord d = unit_to_sph(s.datum);
  return {{"vertices", verts},
          {"boundary_count", s.mesh.boundary_count},
          {"triangles", s.mesh.triangles},
          {"datum", {{"phi", d.phi}, {"theta", d.theta}}},
          {"split_plan", split_plan_json(s)}};
}

/// Membrane plus raster, encoded as PNG; a rect crops the encoded image.
inline std::vector<std::uint8_t> render_png(const CloneSession& s, const Panorama& target, const SphericalCoord& anchor,
                                            const RenderOptions& opt, CloneTiming* timing = nullptr) {
  const Panorama out = clone_at(s, target, anchor, opt, timing);
  if (opt.rect) return encode_png(out, opt.rect->x, opt.rect->y, opt.rect->width, opt.rect->height);
  return encode_png(out);
}

inline PixelRect parse_rect(const json& j) {
  return {int(detail::number(j, "x")), int(detail::number(j, "y")), int(detail::number(j, "width")),
          int(detail::number(j, "height"))};
}

/// Boundary outline in source pixels for the planar baseline, with columns
/// unwrapped so consecutive vertices never jump across the seam.
inline std::vector<PixelCoord> planar_mask(const SphericalPolygon& boundary, int width, int height) {
  std::vector<PixelCoord> mask;
  for (const auto& v : boundary.vertices()) {
    PixelCoord p = unit_to_pixel(v, width, height);
    if (!mask.empty()) {
      while (p.x - mask.back().x > 0.5 * width) p.x -= width;
      while (mask.back().x - p.x > 0.5 * width) p.x += width;
    }
    mask.push_back(p);
  }
  return mask;
}

}  // namespace panoclone
