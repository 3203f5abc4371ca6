#pragma once

// Batch cloning front end. Errors go to stderr as one JSON object and the
// exit status is exit_code_for(code).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "panoclone/interface.hpp"

namespace panoclone {

struct CliArgs {
  std::string source, target, boundary, output;
  std::string anchor, anchor_px, datum, rect;
  std::string split = "auto";
  std::string matte, baseline;
  std::optional<std::string> dump_mesh, dump_diagnostics;
  int supersample = 1;
  double spacing_deg = 0.0;
  bool allow_overflow = false;
};

namespace detail {

inline std::string read_text(const std::string& path_or_json) {
  if (!path_or_json.empty() && (path_or_json.front() == '[' || path_or_json.front() == '{')) return path_or_json;
  std::ifstream in(path_or_json);
  if (!in) throw Error(ErrorCode::FormatError, "cannot open " + path_or_json);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FormatError, "cannot write " + path);
  out << text;
}

inline void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FormatError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw Error(ErrorCode::FormatError, "write failed for " + path);
}

inline std::string sibling(const std::string& output, const char* suffix) {
  std::filesystem::path p(output);
  p.replace_extension(suffix);
  return p.string();
}

inline SphericalCoord pair_coord(const std::string& text, const char* what) {
  const auto [a, b] = parse_pair(text, what);
  return {a, b};
}

inline int run_clone(const CliArgs& a, std::ostream& out) {
  const Panorama source = load_panorama(a.source);
  const Panorama target = load_panorama(a.target);
  const std::vector<SphericalCoord> polyline = parse_boundary_text(read_text(a.boundary));

  PreprocessOptions opt;
  opt.split = parse_split_mode(a.split);
  opt.allow_overflow = a.allow_overflow;
  opt.supersampling = a.supersample;
  if (!valid_supersampling(a.supersample)) {
    throw Error(ErrorCode::InvalidArgument, "supersampling must be one of 1, 2, 4, 8, 16");
  }
  if (a.spacing_deg > 0.0) opt.boundary_spacing = a.spacing_deg * kPi / 180.0;
  if (!a.datum.empty()) opt.datum = sph_to_unit(checked(pair_coord(a.datum, "--datum")));

  std::optional<SphericalCoord> anchor;
  if (!a.anchor.empty()) anchor = checked(pair_coord(a.anchor, "--anchor"));
  if (!a.anchor_px.empty()) {
    const auto [x, y] = parse_pair(a.anchor_px, "--anchor-px");
    anchor = from_pixel(x, y, target.width(), target.height());
  }
  RenderOptions ropt;
  if (!a.rect.empty()) {
    std::istringstream ss(a.rect);
    PixelRect r;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ss >> r.x >> c1 >> r.y >> c2 >> r.width >> c3 >> r.height) || c1 != ',' || c2 != ',' || c3 != ',') {
      throw Error(ErrorCode::InvalidArgument, "--rect must be 'x,y,width,height'");
    }
    ropt.rect = r;
  }

  if (a.baseline == "planar") {
    const SphericalPolygon boundary = sample_boundary(
        dedupe_polyline([&] {
          std::vector<UnitVector> pts;
          for (const auto& c : polyline) pts.push_back(sph_to_unit(c));
          return pts;
        }()),
        opt.boundary_spacing > 0.0 ? opt.boundary_spacing : 2.0 * kPi / source.width());
    const UnitVector datum = opt.datum ? *opt.datum : boundary.centroid();
    const PixelCoord from = unit_to_pixel(datum, source.width(), source.height());
    const PixelCoord to = unit_to_pixel(sph_to_unit(anchor.value_or(unit_to_sph(datum))), target.width(),
                                        target.height());
    const Panorama result = planar_clone_baseline(
        source, target, planar_mask(boundary, source.width(), source.height()), {to.x - from.x, to.y - from.y});
    if (ropt.rect) {
      write_bytes(a.output, encode_png(result, ropt.rect->x, ropt.rect->y, ropt.rect->width, ropt.rect->height));
    } else {
      write_bytes(a.output, encode_png(result));
    }
    out << json{{"output", a.output}, {"baseline", "planar"}}.dump() << '\n';
    return 0;
  }
  if (!a.baseline.empty()) throw Error(ErrorCode::InvalidArgument, "unknown baseline '" + a.baseline + "'");

  CloneSession session = preprocess(source, polyline, opt);
  if (!a.matte.empty()) attach_matte(session, load_matte(a.matte, source.width(), source.height()));
  const SphericalCoord at = anchor.value_or(datum_anchor(session));
  CloneTiming timing;
  write_bytes(a.output, render_png(session, target, at, ropt, &timing));

  json report{{"output", a.output},
              {"anchor", {{"phi", at.phi}, {"theta", at.theta}}},
              {"mesh_stats", mesh_stats_json(session)},
              {"membrane_ms", timing.membrane_ms},
              {"raster_ms", timing.raster_ms}};
  if (a.dump_mesh) {
    const std::string path = a.dump_mesh->empty() ? sibling(a.output, ".mesh.json") : *a.dump_mesh;
    write_text(path, mesh_json(session).dump());
    report["mesh"] = path;
  }
  if (a.dump_diagnostics) {
    const std::string path = a.dump_diagnostics->empty() ? sibling(a.output, ".diagnostics.csv") : *a.dump_diagnostics;
    std::ostringstream csv;
    write_diagnostics_csv(session, csv);
    write_text(path, csv.str());
    report["diagnostics"] = path;
  }
  out << report.dump() << '\n';
  return 0;
}

}  // namespace detail

/// Runs the `panoclone` command line. Returns the process exit status.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CliArgs a;
  CLI::App app{"Clone a patch of one equirectangular panorama into another."};
  app.add_option("--source", a.source, "Source panorama (PNG or JPEG)")->required();
  app.add_option("--target", a.target, "Target panorama (PNG or JPEG)")->required();
  app.add_option("--boundary", a.boundary, "Boundary polyline: JSON file or inline JSON")->required();
  app.add_option("-o,--output", a.output, "Output PNG")->required();
  app.add_option("--anchor", a.anchor, "Target anchor 'phi,theta' in radians (default: the datum)");
  app.add_option("--anchor-px", a.anchor_px, "Target anchor 'x,y' in target pixels");
  app.add_option("--datum", a.datum, "Source datum 'phi,theta' (default: patch centroid)");
  app.add_option("--supersample", a.supersample, "Sub-samples per axis: 1, 2, 4, 8 or 16");
  app.add_option("--split", a.split, "auto | off | median | pca-sphere | pca-projected");
  app.add_option("--spacing-deg", a.spacing_deg, "Boundary sample spacing in degrees");
  app.add_option("--matte", a.matte, "Alpha matte registered to the source");
  app.add_option("--baseline", a.baseline, "Render a baseline instead ('planar')");
  app.add_option("--rect", a.rect, "Write only the sub-rectangle 'x,y,width,height'");
  app.add_option("--dump-mesh", a.dump_mesh, "Write the mesh as JSON (default: <output>.mesh.json)")
      ->expected(0, 1);
  app.add_option("--dump-diagnostics", a.dump_diagnostics,
                 "Write per-vertex coordinate diagnostics as CSV (default: <output>.diagnostics.csv)")
      ->expected(0, 1);
  app.add_flag("--allow-overflow", a.allow_overflow, "With --split off, render even if coordinates overflow");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json(Error(ErrorCode::InvalidArgument, e.what())).dump() << '\n';
    return exit_code_for(ErrorCode::InvalidArgument);
  }
  try {
    return detail::run_clone(a, out);
  } catch (const Error& e) {
    err << error_json(e).dump() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << json{{"error", "Internal"}, {"code", 0}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
}

}  // namespace panoclone
