// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "panoclone/clone.hpp"
#include "panoclone/image_io.hpp"
#include "test_util.hpp"

using namespace panoclone;
using namespace panoclone::fixtures;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

using Clock = std::chrono::steady_clock;
double ms(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

Vec3 north_oracle(const UnitVector& v) { return (Vec3::UnitZ() - v.z() * v.vec()).normalized(); }

std::vector<SphericalCoord> cap_polyline(const UnitVector& c, double radius, int n = 64) {
  std::vector<SphericalCoord> out;
  for (int i = 0; i < n; ++i) out.push_back(unit_to_sph(offset_point(c, kTwoPi * i / n, radius)));
  return out;
}

int quantized_gap(const Rgb& a, const Rgb& b) {
  int g = 0;
  for (int c = 0; c < 3; ++c) g = std::max(g, std::abs(int(quantize(a[c])) - int(quantize(b[c]))));
  return g;
}

// Random star polygon around c with span below 170 degrees and an interior point.
struct Sample {
  SphericalPolygon poly;
  UnitVector v;
};

Sample random_sample(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const UnitVector c = random_unit(rng);
    const int n = 5 + int(u(rng) * 14);
    const double rmin = deg(2.0 + 50.0 * u(rng));
    const double rmax = std::min(deg(84.0), rmin + deg(30.0) * u(rng));
    SphericalPolygon poly = random_star_polygon(rng, c, n, rmin, rmax, u(rng) < 0.5);
    if (poly.span() >= deg(170)) continue;
    const UnitVector v = offset_point(c, kTwoPi * u(rng), 0.5 * rmin * u(rng));
    if (!contains(poly, v)) continue;
    return {std::move(poly), v};
  }
}

Verdict smvc_suite() {
  std::mt19937_64 rng(20240607);
  const auto t0 = Clock::now();
  double pou = 0.0, repro = 0.0, dual = 0.0;
  int pou_ok = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const Sample s = random_sample(rng);
    const CoordinateRow a = smvc_direct(s.v, s.poly);
    const StereographicResult b = smvc_stereographic(s.v, s.poly);
    const double e = std::abs(a.sum() - 1.0);
    pou = std::max(pou, e);
    pou_ok += e <= 1e-9;
    Vec3 r = Vec3::Zero();
    for (std::size_t i = 0; i < s.poly.size(); ++i) r += a[i] * s.poly[i].vec();
    repro = std::max(repro, (r - s.v.vec()).norm());
    for (std::size_t i = 0; i < a.size(); ++i) dual = std::max(dual, std::abs(a[i] - b.row[i]));
  }
  const double elapsed = ms(t0) / 1000.0;
  const bool pass = pou <= 1e-9 && repro <= 1e-9 && dual <= 1e-9 && elapsed < 30.0;
  return {pass, fmt("%d pairs; partition of unity max|sum-1| = %.3g (%d/%d within 1e-9); reproduction %.3g; "
                    "direct vs stereographic %.3g; %.1f s",
                    trials, pou, pou_ok, trials, repro, dual, elapsed)};
}

Verdict bridge_identity() {
  std::mt19937_64 rng(11);
  double worst = 0.0, library = 0.0;
  long evaluations = 0;
  for (int t = 0; t < 3000; ++t) {
    const Sample s = random_sample(rng);
    const Vec3 v = s.v.vec();
    for (const auto& p : s.poly) {
      // Project from -v onto the tangent plane at v.
      const Vec3 q = p.vec() + v;
      const Vec3 bar = (2.0 / q.dot(v)) * q;
      const double theta = std::acos(std::clamp(p.dot(s.v), -1.0, 1.0));
      const double d = (bar - 2.0 * v).norm();
      worst = std::max(worst, std::abs(d - 2.0 * std::tan(0.5 * theta)) / std::max(1.0, d));
      worst = std::max(worst, std::abs((1.0 + std::cos(theta)) * std::tan(0.5 * theta) - std::sin(theta)));
      ++evaluations;
    }
    library = std::max(library, smvc_stereographic(s.v, s.poly).diagnostics.bridge_error);
  }
  return {worst <= 1e-9 && library <= 1e-9,
          fmt("%ld vertex evaluations; oracle residual %.3g; pipeline residual %.3g", evaluations, worst, library)};
}

Verdict rotation_suite() {
  std::mt19937_64 rng(3);
  double map = 0.0, ortho = 0.0, det = 0.0, north = 0.0, min_gap = 1e300;
  int differing = 0, eligible = 0;
  for (int i = 0; i < 1000; ++i) {
    const UnitVector vs = random_non_polar(rng, 0.02), vt = random_non_polar(rng, 0.02);
    const Rotation r = two_step_rotation(vs, vt);
    const Mat3 m = r.matrix();
    map = std::max(map, (m * vs.vec() - vt.vec()).norm());
    ortho = std::max(ortho, (m.transpose() * m - Mat3::Identity()).norm());
    det = std::max(det, std::abs(m.determinant() - 1.0));
    north = std::max(north, (m * north_oracle(vs) - north_oracle(vt)).norm());
    if (std::abs(vs.z() - vt.z()) > 1e-9) {
      ++eligible;
      const double gap = (naive_rotation(vs, vt).matrix() - m).norm();
      min_gap = std::min(min_gap, gap);
      differing += gap > 1e-6;
    }
  }
  const bool pass = map <= 1e-12 && ortho <= 1e-10 && det <= 1e-10 && north <= 1e-10 && differing == eligible;
  return {pass, fmt("1000 pairs; map %.2g; orthonormality %.2g; det %.2g; north %.2g; naive differs on %d/%d "
                    "(min Frobenius %.3g)",
                    map, ortho, det, north, differing, eligible, min_gap)};
}

Verdict overflow_reproduction() {
  const AdaptiveMesh mesh = build_adaptive_mesh(band_patch(deg(150), deg(10), deg(1.5)));
  const SphericalPolygon full = mesh.boundary();
  int overflowing = 0;
  double max_tilde = 0.0;
  for (std::size_t v = mesh.boundary_count; v < mesh.size(); ++v) {
    const CoordinateDiagnostics d = diagnose(mesh.vertices[v], full);
    if (d.antipodal) continue;
    max_tilde = std::max(max_tilde, d.sum_tilde);
    overflowing += d.sum_tilde > 2.0 && d.lambda_min < -1.0;
  }
  const SplitPlan plan = split_path_median_azimuth(mesh);
  const auto rows = composed_coordinates(mesh, plan);
  double max_abs = 0.0;
  for (const auto& r : rows) {
    for (double w : r.weights) max_abs = std::max(max_abs, std::abs(w));
  }
  const bool pass = overflowing >= 1 && max_abs < 3.0 && plan.span1 < kPi && plan.span2 < kPi;
  return {pass, fmt("300 deg band, %zu vertices; unsplit: %d vertices with sum~ > 2 and min < -1 (max sum~ %.4f); "
                    "split: max|lambda| %.3f, spans %.1f / %.1f deg",
                    mesh.size(), overflowing, max_tilde, max_abs, plan.span1 * 180 / kPi, plan.span2 * 180 / kPi)};
}

std::array<double, 3> smooth_difference(const UnitVector& v) {
  return {0.12 + 0.08 * std::sin(2.0 * v.x() + v.z()), -0.05 + 0.1 * v.y(), 0.2 * std::cos(1.5 * v.z()) - 0.1};
}

Verdict composed_suite() {
  double sum = 0.0, repro = 0.0;
  std::size_t rows_total = 0, unit = 0;
  auto check = [&](const AdaptiveMesh& mesh, const std::vector<CoordinateRow>& rows) {
    const SphericalPolygon full = mesh.boundary();
    for (std::size_t v = 0; v < mesh.size(); ++v) {
      const double e = std::abs(rows[v].sum() - 1.0);
      sum = std::max(sum, e);
      unit += e <= 1e-9;
      ++rows_total;
      Vec3 r = Vec3::Zero();
      for (std::size_t i = 0; i < full.size(); ++i) r += rows[v][i] * full[i].vec();
      repro = std::max(repro, (r - mesh.vertices[v].vec()).norm());
    }
  };
  const AdaptiveMesh band = build_adaptive_mesh(band_patch(deg(150), deg(10), deg(1.5)));
  check(band, composed_coordinates(band, split_path_median_azimuth(band)));

  // 60 degree span: split and unsplit membranes for a smooth difference.
  std::vector<UnitVector> ring;
  const UnitVector c = sph_to_unit({0.4, 1.2});
  for (int i = 0; i < 400; ++i) ring.push_back(offset_point(c, kTwoPi * i / 400, deg(30)));
  const AdaptiveMesh cap = build_adaptive_mesh(SphericalPolygon(ring));
  const auto composed = composed_coordinates(cap, split_path_median_azimuth(cap));
  check(cap, composed);
  const SphericalPolygon full = cap.boundary();
  std::array<double, 3> mad{0, 0, 0};
  for (std::size_t v = 0; v < cap.size(); ++v) {
    const CoordinateRow direct = cap.is_boundary(v) ? CoordinateRow::indicator(full.size(), v)
                                                    : smvc_direct(cap.vertices[v], full);
    std::array<double, 3> ms{0, 0, 0}, md{0, 0, 0};
    for (std::size_t i = 0; i < full.size(); ++i) {
      const auto d = smooth_difference(full[i]);
      for (int k = 0; k < 3; ++k) {
        ms[k] += composed[v][i] * d[k];
        md[k] += direct[i] * d[k];
      }
    }
    for (int k = 0; k < 3; ++k) mad[k] += std::abs(ms[k] - md[k]);
  }
  for (auto& m : mad) m /= double(cap.size());
  const double worst_mad = *std::max_element(mad.begin(), mad.end());
  const bool pass = sum <= 1e-9 && repro <= 1e-6 && worst_mad <= 2.0 / 255.0;
  return {pass, fmt("%zu composed rows; max|sum-1| = %.3g (%zu within 1e-9); reproduction %.3g; "
                    "60 deg patch split vs unsplit membrane mean abs %.4f/255",
                    rows_total, sum, unit, repro, worst_mad * 255.0)};
}

Verdict split_comparison() {
  const AdaptiveMesh mesh = build_adaptive_mesh(slanted_strip(deg(150), deg(38), deg(8), deg(1.5)));
  const SplitPlan alt1 = split_path_pca_sphere(mesh);
  const SplitPlan alt2 = split_path_pca_projected(mesh);
  const SplitPlan med = split_path_median_azimuth(mesh);
  auto span = [](const SplitPlan& p) { return std::max(p.span1, p.span2); };
  const bool pass = span(alt1) > kPi && span(alt2) < kPi && span(med) < kPi;
  return {pass, fmt("slanted 300 deg strip; largest sub-span (margin flag): pca-sphere %.1f deg (%d), "
                    "pca-projected %.1f deg (%d), median %.1f deg (%d)",
                    span(alt1) * 180 / kPi, int(alt1.flagged), span(alt2) * 180 / kPi, int(alt2.flagged),
                    span(med) * 180 / kPi, int(med.flagged))};
}

Panorama rolled(const Panorama& p, int dx) {
  Panorama out(p.width(), p.height());
  const int w = p.width();
  for (int y = 0; y < p.height(); ++y) {
    for (int x = 0; x < w; ++x) out.set(((x + dx) % w + w) % w, y, p.at(x, y));
  }
  return out;
}

Verdict end_to_end(const std::string& data) {
  int worst_boundary = 0, worst_identity = 0, worst_seam = 0, worst_jump = 0;
  const SphericalCoord patches[5] = {{1.0, 1.4}, {2.2, 1.9}, {4.0, 1.2}, {5.1, 1.6}, {3.0, 1.0}};
  for (int k = 0; k < 5; ++k) {
    const Panorama src = load_panorama(data + "/pano_" + std::to_string(k) + ".jpg");
    const Panorama tgt = load_panorama(data + "/pano_" + std::to_string(k + 1) + ".jpg");
    const CloneSession s = preprocess(src, cap_polyline(sph_to_unit(patches[k]), deg(12)));

    const SphericalCoord anchor{3.3 - 0.4 * k, 1.3 + 0.12 * k};
    const MembraneField m = compute_membrane(s, tgt, anchor);
    for (const auto& v : s.boundary.vertices()) {
      const UnitVector u = m.rotation * slerp(v, s.datum, 1e-5);
      worst_boundary = std::max(worst_boundary, quantized_gap(composite_at(s, tgt, m, u), tgt.sample(u)));
    }

    RenderOptions one;
    one.supersampling = 1;
    worst_identity = std::max(worst_identity, max_quantized_difference(clone_at(s, src, datum_anchor(s), one), src));

    // Across the seam versus the same clone shifted half a turn onto a rolled target.
    const int w = tgt.width();
    const SphericalCoord at_seam{0.01, anchor.theta};
    const Panorama a = clone_at(s, tgt, at_seam, one);
    const Panorama b = clone_at(s, rolled(tgt, w / 2), {at_seam.phi + kPi, at_seam.theta}, one);
    for (int y = 0; y < a.height(); ++y) {
      if (a.at(0, y) == tgt.at(0, y) && a.at(w - 1, y) == tgt.at(w - 1, y)) continue;
      for (int c = 0; c < 3; ++c) {
        const int jump_a = int(quantize(a.at(0, y)[c])) - int(quantize(a.at(w - 1, y)[c]));
        const int jump_b = int(quantize(b.at(w / 2, y)[c])) - int(quantize(b.at(w / 2 - 1, y)[c]));
        worst_seam = std::max(worst_seam, std::abs(jump_a - jump_b));
        worst_jump = std::max(worst_jump, std::abs(jump_a));
      }
    }
  }
  const bool pass = worst_boundary <= 2 && worst_identity <= 1 && worst_seam <= 2;
  return {pass, fmt("5 pairs at 2048x1024; boundary %d/255; identity %d/255; seam excess over interior %d/255 "
                    "(largest raw seam step %d/255)",
                    worst_boundary, worst_identity, worst_seam, worst_jump)};
}

Verdict planar_divergence(const std::string& data) {
  const Panorama src = load_panorama(data + "/pano_0.jpg");
  const Panorama tgt = load_panorama(data + "/pano_3.jpg");
  const int w = src.width(), h = src.height();
  const auto poly = cap_polyline(sph_to_unit({1.5, kPi / 2}), deg(10));
  const CloneSession s = preprocess(src, poly);
  std::vector<PixelCoord> mask;
  for (const auto& v : s.boundary.vertices()) mask.push_back(unit_to_pixel(v, w, h));
  const PixelCoord from = unit_to_pixel(s.datum, w, h);
  std::vector<double> mad;
  RenderOptions one;
  one.supersampling = 1;
  for (double lat : {0.0, 30.0, 60.0}) {
    const SphericalCoord anchor{4.0, kPi / 2 - deg(lat)};
    const PixelCoord to = unit_to_pixel(sph_to_unit(anchor), w, h);
    const Panorama planar = planar_clone_baseline(src, tgt, mask, {to.x - from.x, to.y - from.y});
    const Panorama sph = clone_at(s, tgt, anchor, one);
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (planar.at(x, y) == tgt.at(x, y) && sph.at(x, y) == tgt.at(x, y)) continue;
        ++n;
        for (int c = 0; c < 3; ++c) sum += std::abs(planar.at(x, y)[c] - sph.at(x, y)[c]);
      }
    }
    mad.push_back(n ? sum / (3.0 * n) : 0.0);
  }
  const bool pass = mad[0] < mad[1] && mad[1] < mad[2];
  return {pass, fmt("mean abs planar vs spherical at latitude 0/30/60: %.2f / %.2f / %.2f (x1/255)",
                    mad[0] * 255, mad[1] * 255, mad[2] * 255)};
}

Verdict performance(const std::string& data) {
  const Panorama src = load_panorama(data + "/pano_1.jpg");
  const Panorama tgt = load_panorama(data + "/pano_2.jpg");
  const UnitVector c = sph_to_unit({2.0, 1.5});
  const double r = deg(14.8);
  const CloneSession s = preprocess(src, cap_polyline(c, r, 96));
  const double pre = s.stats.total_ms;
  auto clone_ms = [&](int n) {
    RenderOptions opt;
    opt.supersampling = n;
    std::vector<double> t;
    const int reps = n == 1 ? 7 : 3;
    for (int i = 0; i < reps; ++i) {
      CloneTiming timing;
      clone_at(s, tgt, {0.5 + 0.6 * i, 1.2 + 0.05 * i}, opt, &timing);
      t.push_back(timing.membrane_ms + timing.raster_ms);
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
  };
  const double t1 = clone_ms(1), t16 = clone_ms(16);
  const double ratio = t16 / t1;
  const bool pass = pre <= 2000.0 && t1 <= 100.0 && ratio >= 4.0 && ratio <= 40.0;
  return {pass, fmt("%zu boundary samples, %zu vertices; preprocess %.0f ms; clone 1x1 %.1f ms; 16x16 %.1f ms "
                    "(ratio %.1f)",
                    s.mesh.boundary_count, s.mesh.size(), pre, t1, t16, ratio)};
}

Verdict mesh_density() {
  std::vector<UnitVector> ring;
  const UnitVector c = sph_to_unit({0.3, 1.6});
  for (int i = 0; i < 279; ++i) ring.push_back(offset_point(c, kTwoPi * i / 279, deg(20)));
  const AdaptiveMesh m = build_adaptive_mesh(SphericalPolygon(ring));
  const bool pass = m.boundary_count == 279 && m.size() >= 700 && m.size() <= 1600;
  return {pass, fmt("279 boundary samples -> %zu vertices", m.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string data = argc > 1 ? argv[1] : PANOCLONE_TEST_DATA;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"SMVC correctness suite", smvc_suite},
      {"Dual-derivation identity", bridge_identity},
      {"Rotation suite", rotation_suite},
      {"Overflow reproduction", overflow_reproduction},
      {"Composed-coordinate suite", composed_suite},
      {"Splitting-path comparison", split_comparison},
      {"End-to-end seamlessness", [&] { return end_to_end(data); }},
      {"Planar-vs-spherical divergence", [&] { return planar_divergence(data); }},
      {"Performance structure", [&] { return performance(data); }},
      {"Mesh density band", mesh_density},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed;
}
