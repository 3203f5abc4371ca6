#pragma once

// Splitting of wide patches and composed coordinates.
//
// A patch whose span approaches pi is cut along a mesh path P_c into two
// sub-regions. Path vertices get coordinates against the full boundary P;
// every other vertex gets coordinates against its own sub-boundary, and the
// path entries are expanded through the path rows.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "panoclone/errors.hpp"
#include "panoclone/mesh.hpp"
#include "panoclone/parallel.hpp"
#include "panoclone/smvc.hpp"
#include "panoclone/sphere_geom.hpp"
#include "panoclone/spherical_polygon.hpp"

namespace panoclone {

inline constexpr double kSplitMargin = kPi / 18;

enum class SplitMethod { MedianAzimuth, PcaSphere, PcaProjected };

inline const char* to_string(SplitMethod m) {
  switch (m) {
    case SplitMethod::MedianAzimuth: return "median";
    case SplitMethod::PcaSphere: return "pca-sphere";
    case SplitMethod::PcaProjected: return "pca-projected";
  }
  return "unknown";
}

struct SpanReport {
  double span = 0.0;
  double threshold = 0.0;
  bool split = false;
};

/// Split when the span exceeds pi (1 - margin / pi), or when an earlier
/// coordinate evaluation on this patch failed.
inline SpanReport needs_split(const SphericalPolygon& poly, double margin = kSplitMargin,
                              bool prior_failure = false) {
  SpanReport r;
  r.span = poly.span();
  r.threshold = kPi - margin;
  r.split = prior_failure || r.span > r.threshold;
  return r;
}

/// Which side of the path a mesh vertex falls on.
enum class Region : std::uint8_t { Path, A, B };

struct SplitPlan {
  SplitMethod method = SplitMethod::MedianAzimuth;
  /// Normal of the cutting great circle.
  Vec3 normal = Vec3::UnitY();
  /// Mesh vertex ids from the first to the second endpoint.
  std::vector<int> path;
  /// Boundary indices from path.front() to path.back() in boundary order
  /// (both endpoints included), and the complementary closed arc.
  std::vector<int> left, right;
  std::vector<Region> tags;
  /// Sub-boundaries as mesh vertex ids, in the orientation of P.
  std::vector<int> sub1, sub2;
  double span1 = 0.0, span2 = 0.0;
  /// A sub-region still spans at least pi - margin.
  bool flagged = false;
  /// Some path vertex overflows against the full boundary.
  bool path_overflow = false;
};

namespace detail {

inline double wrap_pi(double a) {
  a = std::fmod(a + kPi, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a - kPi;
}

struct CutPoint {
  Vec3 point;
  int vertex;
};

inline std::vector<CutPoint> cut_points(const AdaptiveMesh& mesh, const Vec3& n) {
  const int nb = int(mesh.boundary_count);
  std::vector<CutPoint> out;
  for (int i = 0; i < nb; ++i) {
    const UnitVector& a = mesh.vertices[i];
    const UnitVector& b = mesh.vertices[(i + 1) % nb];
    const double sa = n.dot(a.vec()), sb = n.dot(b.vec());
    if (sa == 0.0) {
      out.push_back({a.vec(), i});
      continue;
    }
    if ((sa > 0) == (sb > 0) || sb == 0.0) continue;
    const Vec3 x = (std::abs(sb) * a.vec() + std::abs(sa) * b.vec()).normalized();
    const int near = (a.vec() - x).norm() <= (b.vec() - x).norm() ? i : (i + 1) % nb;
    out.push_back({x, near});
  }
  return out;
}

inline std::vector<int> boundary_arc(int from, int to, int nb) {
  std::vector<int> arc;
  for (int i = from;; i = (i + 1) % nb) {
    arc.push_back(i);
    if (i == to) break;
  }
  return arc;
}

// Dijkstra over interior vertices plus the two endpoints.
inline std::vector<int> shortest_path(const AdaptiveMesh& mesh, int s, int t) {
  const int n = int(mesh.size());
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[s] = 0.0;
  pq.push({0.0, s});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == t) break;
    if (u != s && mesh.is_boundary(u)) continue;
    for (int w : mesh.neighbors[u]) {
      if (mesh.is_boundary(w) && w != t) continue;
      const double nd = d + angle_between(mesh.vertices[u], mesh.vertices[w]);
      if (nd < dist[w]) {
        dist[w] = nd;
        prev[w] = u;
        pq.push({nd, w});
      }
    }
  }
  if (prev[t] < 0) return {};
  std::vector<int> path;
  for (int v = t; v >= 0; v = prev[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

// Greedy shortcut so no two non-consecutive path vertices share an edge.
inline std::vector<int> chordless(const AdaptiveMesh& mesh, const std::vector<int>& path) {
  std::vector<int> out{path.front()};
  std::size_t i = 0;
  while (i + 1 < path.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = path.size() - 1; j > i + 1; --j) {
      if (std::binary_search(mesh.neighbors[path[i]].begin(), mesh.neighbors[path[i]].end(), path[j])) {
        next = j;
        break;
      }
    }
    out.push_back(path[next]);
    i = next;
  }
  return out;
}

inline SplitPlan plan_from_normal(const AdaptiveMesh& mesh, const Vec3& normal, SplitMethod method, double margin) {
  const int nb = int(mesh.boundary_count);
  const std::vector<CutPoint> cuts = cut_points(mesh, normal);
  std::vector<int> verts;
  for (const auto& c : cuts) {
    if (std::find(verts.begin(), verts.end(), c.vertex) == verts.end()) verts.push_back(c.vertex);
  }
  if (verts.size() < 2) throw Error(ErrorCode::NoIntersection, "cutting great circle misses the boundary");
  // More than two crossings: keep the pair furthest apart.
  int e1 = -1, e2 = -1;
  double best = -1.0;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    for (std::size_t j = i + 1; j < verts.size(); ++j) {
      const int a = verts[i], b = verts[j];
      const int gap = std::min((a - b + nb) % nb, (b - a + nb) % nb);
      if (gap < 2) continue;
      const double d = angle_between(mesh.vertices[a], mesh.vertices[b]);
      if (d > best) {
        best = d;
        e1 = std::min(a, b);
        e2 = std::max(a, b);
      }
    }
  }
  if (e1 < 0) throw Error(ErrorCode::NoIntersection, "cut endpoints are adjacent boundary samples");

  SplitPlan plan;
  plan.method = method;
  plan.normal = normal.normalized();
  const std::vector<int> raw = shortest_path(mesh, e1, e2);
  if (raw.empty()) throw Error(ErrorCode::NoIntersection, "no interior mesh path joins the cut endpoints");
  plan.path = chordless(mesh, raw);
  plan.left = boundary_arc(e1, e2, nb);
  plan.right = boundary_arc(e2, e1, nb);

  // P_1: left arc then the path back from e2 to e1. P_2: right arc then the
  // path forward.
  plan.sub1 = plan.left;
  for (std::size_t k = plan.path.size() - 2; k >= 1; --k) plan.sub1.push_back(plan.path[k]);
  plan.sub2 = plan.right;
  for (std::size_t k = 1; k + 1 < plan.path.size(); ++k) plan.sub2.push_back(plan.path[k]);

  // Flood triangles from each side without crossing path edges.
  std::vector<char> on_path(mesh.size(), 0);
  for (int v : plan.path) on_path[v] = 1;
  std::unordered_set<std::uint64_t> path_edges;
  for (std::size_t k = 0; k + 1 < plan.path.size(); ++k) {
    path_edges.insert(Cdt::key(std::min(plan.path[k], plan.path[k + 1]), std::max(plan.path[k], plan.path[k + 1])));
  }
  std::unordered_map<std::uint64_t, std::vector<int>> edge_tris;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = mesh.triangles[t][k], b = mesh.triangles[t][(k + 1) % 3];
      edge_tris[Cdt::key(std::min(a, b), std::max(a, b))].push_back(int(t));
    }
  }
  std::vector<int> side(mesh.triangles.size(), 0);
  auto flood = [&](const std::vector<int>& arc, int label) {
    std::vector<int> stack;
    for (std::size_t k = 0; k + 1 < arc.size(); ++k) {
      const int a = arc[k], b = arc[k + 1];
      for (int t : edge_tris[Cdt::key(std::min(a, b), std::max(a, b))]) stack.push_back(t);
    }
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      if (side[t] == label) continue;
      if (side[t] != 0) throw Error(ErrorCode::TriangulationFailure, "splitting path does not separate the mesh");
      side[t] = label;
      for (int k = 0; k < 3; ++k) {
        const int a = mesh.triangles[t][k], b = mesh.triangles[t][(k + 1) % 3];
        const auto key = Cdt::key(std::min(a, b), std::max(a, b));
        if (path_edges.count(key)) continue;
        for (int u : edge_tris[key]) {
          if (u != t) stack.push_back(u);
        }
      }
    }
  };
  flood(plan.left, 1);
  flood(plan.right, 2);
  plan.tags.assign(mesh.size(), Region::Path);
  std::vector<char> tagged(mesh.size(), 0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (side[t] == 0) throw Error(ErrorCode::TriangulationFailure, "mesh region left unassigned by the split");
    for (int v : mesh.triangles[t]) {
      if (on_path[v]) continue;
      const Region r = side[t] == 1 ? Region::A : Region::B;
      if (tagged[v] && plan.tags[v] != r) {
        throw Error(ErrorCode::TriangulationFailure, "vertex lies on both sides of the path", std::size_t(v));
      }
      plan.tags[v] = r;
      tagged[v] = 1;
    }
  }

  auto span_of = [&](const std::vector<int>& ids) {
    std::vector<UnitVector> pts;
    for (int i : ids) pts.push_back(mesh.vertices[i]);
    const UnitVector c = spherical_centroid(pts);
    double m = 0.0;
    for (const auto& p : pts) m = std::max(m, angle_between(c, p));
    return 2.0 * m;
  };
  plan.span1 = span_of(plan.sub1);
  plan.span2 = span_of(plan.sub2);
  plan.flagged = std::max(plan.span1, plan.span2) >= kPi - margin;

  const SphericalPolygon full = mesh.boundary();
  for (std::size_t k = 1; k + 1 < plan.path.size(); ++k) {
    if (diagnose(mesh.vertices[plan.path[k]], full).overflow) plan.path_overflow = true;
  }
  return plan;
}

inline Vec3 principal_axis(const std::vector<Vec3>& pts) {
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= double(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  Vec3 v = es.eigenvectors().col(2);
  // Fix the sign for determinism.
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(v[i]) > std::abs(v[k])) k = i;
  }
  return v[k] < 0 ? Vec3(-v) : v;
}

}  // namespace detail

/// Median azimuth of the boundary samples, measured relative to the
/// centroid azimuth so the seam does not split the distribution.
inline double median_boundary_azimuth(const AdaptiveMesh& mesh) {
  const SphericalPolygon poly = mesh.boundary();
  const double phi_c = unit_to_sph(poly.centroid()).phi;
  std::vector<double> rel;
  for (const auto& p : poly) rel.push_back(detail::wrap_pi(unit_to_sph(p).phi - phi_c));
  std::sort(rel.begin(), rel.end());
  const std::size_t n = rel.size();
  const double m = n % 2 ? rel[n / 2] : 0.5 * (rel[n / 2 - 1] + rel[n / 2]);
  return SphericalCoord::make(phi_c + m, kPi / 2).phi;
}

inline SplitPlan split_path_median_azimuth(const AdaptiveMesh& mesh, double margin = kSplitMargin) {
  const double phi = median_boundary_azimuth(mesh);
  return detail::plan_from_normal(mesh, Vec3(-std::sin(phi), std::cos(phi), 0.0), SplitMethod::MedianAzimuth, margin);
}

/// Cut great circle whose normal is the first principal component of the
/// boundary samples in space.
inline SplitPlan split_path_pca_sphere(const AdaptiveMesh& mesh, double margin = kSplitMargin) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < mesh.boundary_count; ++i) pts.push_back(mesh.vertices[i].vec());
  return detail::plan_from_normal(mesh, detail::principal_axis(pts), SplitMethod::PcaSphere, margin);
}

/// PCA of the boundary in the patch projection; the cut is the great
/// circle through the lifted 2D mean, orthogonal to the first component.
inline SplitPlan split_path_pca_projected(const AdaptiveMesh& mesh, double margin = kSplitMargin) {
  const PatchProjection& proj = mesh.projection;
  std::vector<Vec3> pts;
  Vec2 mean = Vec2::Zero();
  for (std::size_t i = 0; i < mesh.boundary_count; ++i) {
    const Vec2 q = proj.project(mesh.vertices[i]);
    pts.emplace_back(q.x(), q.y(), 0.0);
    mean += q;
  }
  mean /= double(mesh.boundary_count);
  const Vec3 axis3 = detail::principal_axis(pts);
  const Vec2 axis(axis3.x(), axis3.y());
  // Lift the line through the mean along the minor direction.
  const Vec2 along(-axis.y(), axis.x());
  const double h = 1e-3 * std::max(1.0, mean.norm());
  const Vec3 p = proj.unproject(mean).vec();
  const Vec3 t = proj.unproject(mean + h * along).vec() - proj.unproject(mean - h * along).vec();
  return detail::plan_from_normal(mesh, p.cross(t), SplitMethod::PcaProjected, margin);
}

inline SplitPlan split_path(const AdaptiveMesh& mesh, SplitMethod method, double margin = kSplitMargin) {
  switch (method) {
    case SplitMethod::MedianAzimuth: return split_path_median_azimuth(mesh, margin);
    case SplitMethod::PcaSphere: return split_path_pca_sphere(mesh, margin);
    case SplitMethod::PcaProjected: return split_path_pca_projected(mesh, margin);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown split method");
}

namespace detail {

inline CoordinateRow smvc_for_vertex(const UnitVector& v, const SphericalPolygon& poly, int vertex) {
  try {
    return smvc_direct(v, poly);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " (mesh vertex " + std::to_string(vertex) + ")", std::size_t(vertex));
  }
}

}  // namespace detail

/// Full-boundary rows for every mesh vertex, composed through the path.
inline std::vector<CoordinateRow> composed_coordinates(const AdaptiveMesh& mesh, const SplitPlan& plan) {
  const std::size_t nb = mesh.boundary_count;
  const SphericalPolygon full = mesh.boundary();
  std::vector<CoordinateRow> rows(mesh.size());
  std::vector<int> path_slot(mesh.size(), -1);
  for (std::size_t k = 0; k < plan.path.size(); ++k) path_slot[plan.path[k]] = int(k);
  parallel_for(plan.path.size(), [&](std::size_t k) {
    const int v = plan.path[k];
    rows[v] = mesh.is_boundary(v) ? CoordinateRow::indicator(nb, std::size_t(v))
                                  : detail::smvc_for_vertex(mesh.vertices[v], full, v);
  }, 4);
  auto sub_polygon = [&](const std::vector<int>& ids) {
    std::vector<UnitVector> pts;
    for (int i : ids) pts.push_back(mesh.vertices[i]);
    return SphericalPolygon(std::move(pts));
  };
  const SphericalPolygon p1 = sub_polygon(plan.sub1), p2 = sub_polygon(plan.sub2);
  parallel_for(mesh.size(), [&](std::size_t v) {
    if (plan.tags[v] == Region::Path) return;
    if (mesh.is_boundary(v)) {
      rows[v] = CoordinateRow::indicator(nb, v);
      return;
    }
    const bool in_a = plan.tags[v] == Region::A;
    const std::vector<int>& ids = in_a ? plan.sub1 : plan.sub2;
    const CoordinateRow bar = detail::smvc_for_vertex(mesh.vertices[v], in_a ? p1 : p2, int(v));
    CoordinateRow row;
    row.weights.assign(nb, 0.0);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const int id = ids[k];
      if (path_slot[id] >= 0) {
        const CoordinateRow& pr = rows[id];
        for (std::size_t i = 0; i < nb; ++i) row.weights[i] += bar[k] * pr[i];
      } else {
        row.weights[id] += bar[k];
      }
    }
    rows[v] = std::move(row);
  });
  return rows;
}

inline nlohmann::json plan_to_json(const SplitPlan& plan) {
  nlohmann::json j;
  j["method"] = to_string(plan.method);
  j["normal"] = {plan.normal.x(), plan.normal.y(), plan.normal.z()};
  j["path"] = plan.path;
  j["left"] = plan.left;
  j["right"] = plan.right;
  j["span1"] = plan.span1;
  j["span2"] = plan.span2;
  j["flagged"] = plan.flagged;
  j["path_overflow"] = plan.path_overflow;
  std::size_t a = 0, b = 0;
  for (Region r : plan.tags) {
    a += r == Region::A;
    b += r == Region::B;
  }
  j["region_sizes"] = {{"path", plan.path.size()}, {"a", a}, {"b", b}};
  return j;
}

}  // namespace panoclone
