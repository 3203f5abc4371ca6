#pragma once

// Adaptive triangulation of a spherical polygon.
//
// The polygon is mapped to the plane by the stereographic projection from
// the antipode of its centroid, which is bijective on the patch for any
// span below 2 pi. Interior sites come from a quadtree graded by distance to
// the boundary, the sites are Delaunay-triangulated with the boundary edges
// enforced, and the result is lifted back to the sphere.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <deque>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "panoclone/errors.hpp"
#include "panoclone/sphere_geom.hpp"
#include "panoclone/spherical_polygon.hpp"

namespace panoclone {

struct MeshOptions {
  /// Growth of the target edge length with distance to the boundary.
  double kappa = 0.5;
  /// Smallest target edge length (radians). Zero means the median boundary
  /// sample spacing.
  double min_size = 0.0;
  double max_size = kPi / 8;
  /// Interior sites closer than this many boundary spacings to the boundary
  /// are dropped.
  double boundary_clearance = 0.7;
  /// Quadtree leaves may grow to this multiple of the target edge length.
  double cell_factor = 1.4;
};

struct MeshEdge {
  int a = 0, b = 0;
  double length = 0.0;
};

struct BarycentricHit {
  int triangle = -1;
  std::array<double, 3> weights{};
};

class AdaptiveMesh {
 public:
  std::vector<UnitVector> vertices;
  /// Vertices [0, boundary_count) are the polygon samples in polygon order.
  std::size_t boundary_count = 0;
  std::vector<std::array<int, 3>> triangles;
  std::vector<MeshEdge> edges;
  /// Sorted neighbor lists, parallel to `vertices`.
  std::vector<std::vector<int>> neighbors;
  PatchProjection projection;

  std::size_t size() const { return vertices.size(); }
  bool is_boundary(std::size_t i) const { return i < boundary_count; }
  std::size_t interior_count() const { return vertices.size() - boundary_count; }

  SphericalPolygon boundary() const {
    return SphericalPolygon(std::vector<UnitVector>(vertices.begin(), vertices.begin() + boundary_count));
  }

  /// Rebuilds edges, neighbor lists and the lookup grid from vertices and
  /// triangles.
  void finalize();

  std::optional<BarycentricHit> try_locate(const UnitVector& v) const;
  BarycentricHit locate(const UnitVector& v) const {
    auto hit = try_locate(v);
    if (!hit) throw Error(ErrorCode::OutsidePatch, "point lies outside the meshed patch");
    return *hit;
  }

  /// Cone around the projection center containing every vertex.
  double bounding_radius() const { return radius_; }

 private:
  struct Grid {
    Vec2 lo = Vec2::Zero();
    double cell = 1.0;
    int nx = 0, ny = 0;
    std::vector<std::uint32_t> start;
    std::vector<std::uint32_t> items;
  };
  Grid grid_;
  std::vector<Mat3> inv_;
  double radius_ = 0.0;
};

namespace detail {

inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

inline double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

inline bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
  const double o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
  return ((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0));
}

/// Incremental constrained Delaunay triangulation. Triangles are kept
/// counter-clockwise; a directed-edge map gives adjacency.
class Cdt {
 public:
  explicit Cdt(std::vector<Vec2> pts) : p_(std::move(pts)) {}

  void make_super(const Vec2& lo, const Vec2& hi) {
    const Vec2 c = 0.5 * (lo + hi);
    const double r = 50.0 * std::max((hi - lo).maxCoeff(), 1e-6);
    super_ = int(p_.size());
    p_.push_back(c + Vec2(-2.0 * r, -r));
    p_.push_back(c + Vec2(2.0 * r, -r));
    p_.push_back(c + Vec2(0.0, 2.0 * r));
    add(super_, super_ + 1, super_ + 2);
  }

  int super_index() const { return super_; }
  const std::vector<Vec2>& points() const { return p_; }

  /// Returns false when the point duplicates an existing vertex.
  bool insert(int v) {
    const Vec2& q = p_[v];
    const int t0 = locate(q);
    for (int k = 0; k < 3; ++k) {
      if ((p_[tri_[t0][k]] - q).squaredNorm() < 1e-24) return false;
    }
    std::vector<int> cavity{t0};
    std::unordered_set<int> in{t0};
    for (std::size_t i = 0; i < cavity.size(); ++i) {
      const auto& t = tri_[cavity[i]];
      for (int k = 0; k < 3; ++k) {
        const int n = twin(t[k], t[(k + 1) % 3]);
        if (n < 0 || in.count(n)) continue;
        const auto& u = tri_[n];
        if (incircle(p_[u[0]], p_[u[1]], p_[u[2]], q) > 0.0) {
          cavity.push_back(n);
          in.insert(n);
        }
      }
    }
    std::vector<std::pair<int, int>> rim;
    for (int c : cavity) {
      const auto t = tri_[c];
      for (int k = 0; k < 3; ++k) {
        const int n = twin(t[k], t[(k + 1) % 3]);
        if (n < 0 || !in.count(n)) rim.emplace_back(t[k], t[(k + 1) % 3]);
      }
    }
    for (const auto& [a, b] : rim) {
      if (orient2d(p_[a], p_[b], q) <= 0.0) {
        // Not star-shaped in floating point; skip the site.
        return false;
      }
    }
    for (int c : cavity) remove(c);
    for (const auto& [a, b] : rim) last_ = add(a, b, v);
    return true;
  }

  bool has_edge(int a, int b) const { return emap_.count(key(a, b)) || emap_.count(key(b, a)); }

  /// Enforces segment a-b by flipping the edges crossing it.
  bool recover(int a, int b) {
    if (has_edge(a, b)) return true;
    std::deque<std::pair<int, int>> q;
    for (const auto& [k, t] : emap_) {
      const int u = int(k >> 32), w = int(k & 0xffffffffu);
      if (u < w && u != a && u != b && w != a && w != b && segments_cross(p_[a], p_[b], p_[u], p_[w])) {
        q.emplace_back(u, w);
      }
    }
    std::size_t guard = 0;
    const std::size_t limit = 200 * (q.size() + 10);
    while (!q.empty()) {
      if (++guard > limit) return false;
      const auto [u, w] = q.front();
      q.pop_front();
      const int t1 = tri_at(u, w), t2 = tri_at(w, u);
      if (t1 < 0 || t2 < 0) return false;
      const int pv = third(t1, u, w), qv = third(t2, w, u);
      if (!segments_cross(p_[pv], p_[qv], p_[u], p_[w])) {
        q.emplace_back(u, w);
        continue;
      }
      remove(t1);
      remove(t2);
      add(u, qv, pv);
      add(qv, w, pv);
      if (pv != a && pv != b && qv != a && qv != b && segments_cross(p_[a], p_[b], p_[pv], p_[qv])) {
        q.emplace_back(pv, qv);
      }
    }
    return has_edge(a, b);
  }

  /// Alive triangles reachable from `seed` without crossing a constrained
  /// edge.
  std::vector<std::array<int, 3>> region(const std::unordered_set<std::uint64_t>& constrained, int inside_vertex_a,
                                         int inside_vertex_b) const {
    // Seed with the triangle left of the directed constrained edge a->b.
    const int seed = tri_at(inside_vertex_a, inside_vertex_b);
    std::vector<std::array<int, 3>> out;
    if (seed < 0) return out;
    std::vector<int> stack{seed};
    std::unordered_set<int> seen{seed};
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      out.push_back(tri_[t]);
      for (int k = 0; k < 3; ++k) {
        const int a = tri_[t][k], b = tri_[t][(k + 1) % 3];
        if (constrained.count(key(a, b)) || constrained.count(key(b, a))) continue;
        const int n = twin(a, b);
        if (n >= 0 && !seen.count(n)) {
          seen.insert(n);
          stack.push_back(n);
        }
      }
    }
    return out;
  }

  static std::uint64_t key(int a, int b) { return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b); }

 private:
  int add(int a, int b, int c) {
    int id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
      tri_[id] = {a, b, c};
      alive_[id] = true;
    } else {
      id = int(tri_.size());
      tri_.push_back({a, b, c});
      alive_.push_back(true);
    }
    emap_[key(a, b)] = id;
    emap_[key(b, c)] = id;
    emap_[key(c, a)] = id;
    return id;
  }

  void remove(int t) {
    const auto& v = tri_[t];
    emap_.erase(key(v[0], v[1]));
    emap_.erase(key(v[1], v[2]));
    emap_.erase(key(v[2], v[0]));
    alive_[t] = false;
    free_.push_back(t);
  }

  int tri_at(int a, int b) const {
    auto it = emap_.find(key(a, b));
    return it == emap_.end() ? -1 : it->second;
  }
  int twin(int a, int b) const { return tri_at(b, a); }

  int third(int t, int a, int b) const {
    for (int v : tri_[t]) {
      if (v != a && v != b) return v;
    }
    return -1;
  }

  int locate(const Vec2& q) {
    int t = (last_ >= 0 && alive_[last_]) ? last_ : -1;
    if (t < 0) {
      for (std::size_t i = 0; i < tri_.size(); ++i) {
        if (alive_[i]) {
          t = int(i);
          break;
        }
      }
    }
    for (std::size_t step = 0; step < 4 * tri_.size() + 16; ++step) {
      const auto& v = tri_[t];
      int next = -1;
      for (int k = 0; k < 3; ++k) {
        if (orient2d(p_[v[k]], p_[v[(k + 1) % 3]], q) < 0.0) {
          next = twin(v[k], v[(k + 1) % 3]);
          if (next >= 0) break;
        }
      }
      if (next < 0) return t;
      t = next;
    }
    // Walk cycled on a degenerate configuration; fall back to a scan.
    int best = t;
    double best_score = -1e300;
    for (std::size_t i = 0; i < tri_.size(); ++i) {
      if (!alive_[i]) continue;
      const auto& v = tri_[i];
      const double s = std::min({orient2d(p_[v[0]], p_[v[1]], q), orient2d(p_[v[1]], p_[v[2]], q),
                                 orient2d(p_[v[2]], p_[v[0]], q)});
      if (s > best_score) {
        best_score = s;
        best = int(i);
      }
    }
    return best;
  }

  std::vector<Vec2> p_;
  std::vector<std::array<int, 3>> tri_;
  std::vector<bool> alive_;
  std::vector<int> free_;
  std::unordered_map<std::uint64_t, int> emap_;
  int super_ = -1;
  int last_ = -1;
};

/// Deterministic jitter in [-0.5, 0.5) from an integer seed.
inline double hash_jitter(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  x ^= x >> 31;
  return double(x >> 11) * (1.0 / 9007199254740992.0) - 0.5;
}

/// Geodesic distance from v to the great-circle arc a -> b.
inline double arc_distance(const Vec3& v, const Vec3& a, const Vec3& b, const Vec3& n) {
  const double s = v.dot(n);
  const Vec3 p = v - s * n;
  if (a.cross(p).dot(n) >= 0.0 && p.cross(b).dot(n) >= 0.0 && p.squaredNorm() > 0.0) {
    return std::asin(std::min(1.0, std::abs(s)));
  }
  return std::acos(std::clamp(std::max(v.dot(a), v.dot(b)), -1.0, 1.0));
}

struct SiteGenerator {
  const SphericalPolygon& poly;
  const PatchProjection& proj;
  const std::vector<Vec2>& ring;
  MeshOptions opt;
  double h0;
  std::vector<Vec2> sites;
  std::vector<Vec3> normals = {};

  void prepare() {
    normals.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      normals.push_back(poly[i].vec().cross(poly[(i + 1) % poly.size()].vec()).normalized());
    }
  }

  // Geodesic distance to the nearest boundary edge.
  double boundary_distance(const UnitVector& v) const {
    double best = kPi;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      best = std::min(best, arc_distance(v.vec(), poly[i].vec(), poly[(i + 1) % poly.size()].vec(), normals[i]));
    }
    return best;
  }

  double target_size(double d) const { return std::clamp(opt.kappa * d, h0, opt.max_size); }

  void run(const Vec2& center, double half, int depth, std::uint64_t id) {
    const UnitVector v = proj.unproject(center);
    const double scale = PatchProjection::scale(center);
    const double side = 2.0 * half / scale;
    const double d = boundary_distance(v);
    const bool inside = winding_number(ring, center) != 0;
    const double reach = 1.5 * half * std::sqrt(2.0) / scale;
    if (!inside && d > reach) return;
    const double limit = opt.cell_factor * target_size(d);
    if (depth < 24 && (side > limit || d < reach)) {
      if (!(depth >= 3 && side <= opt.cell_factor * h0 && d < reach)) {
        const double q = 0.5 * half;
        run(center + Vec2(-q, -q), q, depth + 1, id * 4 + 0);
        run(center + Vec2(q, -q), q, depth + 1, id * 4 + 1);
        run(center + Vec2(-q, q), q, depth + 1, id * 4 + 2);
        run(center + Vec2(q, q), q, depth + 1, id * 4 + 3);
        return;
      }
    }
    const Vec2 jitter(hash_jitter(2 * id), hash_jitter(2 * id + 1));
    const Vec2 site = center + 0.5 * half * jitter;
    const UnitVector sv = proj.unproject(site);
    if (winding_number(ring, site) == 0) return;
    if (boundary_distance(sv) < opt.boundary_clearance * h0) return;
    sites.push_back(site);
  }
};

}  // namespace detail

inline void AdaptiveMesh::finalize() {
  std::unordered_map<std::uint64_t, int> seen;
  edges.clear();
  neighbors.assign(vertices.size(), {});
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      const auto key = detail::Cdt::key(a, b);
      if (seen.emplace(key, int(edges.size())).second) {
        edges.push_back({a, b, angle_between(vertices[a], vertices[b])});
        neighbors[a].push_back(b);
        neighbors[b].push_back(a);
      }
    }
  }
  for (auto& n : neighbors) std::sort(n.begin(), n.end());

  radius_ = 0.0;
  for (const auto& v : vertices) radius_ = std::max(radius_, angle_between(projection.center(), v));

  inv_.resize(triangles.size());
  std::vector<std::array<Vec2, 2>> box(triangles.size());
  Vec2 lo = Vec2::Constant(1e300), hi = Vec2::Constant(-1e300);
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    Mat3 m;
    for (int k = 0; k < 3; ++k) m.col(k) = vertices[triangles[t][k]].vec();
    inv_[t] = m.inverse();
    Vec2 blo = Vec2::Constant(1e300), bhi = Vec2::Constant(-1e300);
    for (int k = 0; k < 3; ++k) {
      const Vec2 q = projection.project(vertices[triangles[t][k]]);
      blo = blo.cwiseMin(q);
      bhi = bhi.cwiseMax(q);
    }
    // Great-circle edges bow away from the straight chords in the plane.
    const double pad = 0.15 * (bhi - blo).maxCoeff() + 1e-9;
    blo.array() -= pad;
    bhi.array() += pad;
    box[t] = {blo, bhi};
    lo = lo.cwiseMin(blo);
    hi = hi.cwiseMax(bhi);
  }
  const double area = std::max((hi - lo).prod(), 1e-30);
  grid_.lo = lo;
  grid_.cell = std::sqrt(area / std::max<std::size_t>(triangles.size(), 1));
  grid_.nx = std::max(1, int(std::ceil((hi.x() - lo.x()) / grid_.cell)));
  grid_.ny = std::max(1, int(std::ceil((hi.y() - lo.y()) / grid_.cell)));
  std::vector<std::uint32_t> count(std::size_t(grid_.nx) * grid_.ny + 1, 0);
  auto cells = [&](std::size_t t, auto&& fn) {
    const int x0 = std::clamp(int((box[t][0].x() - lo.x()) / grid_.cell), 0, grid_.nx - 1);
    const int x1 = std::clamp(int((box[t][1].x() - lo.x()) / grid_.cell), 0, grid_.nx - 1);
    const int y0 = std::clamp(int((box[t][0].y() - lo.y()) / grid_.cell), 0, grid_.ny - 1);
    const int y1 = std::clamp(int((box[t][1].y() - lo.y()) / grid_.cell), 0, grid_.ny - 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) fn(std::size_t(y) * grid_.nx + x);
  };
  for (std::size_t t = 0; t < triangles.size(); ++t) cells(t, [&](std::size_t c) { ++count[c + 1]; });
  for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
  grid_.start = count;
  grid_.items.assign(count.back(), 0);
  std::vector<std::uint32_t> fill(count.begin(), count.end() - 1);
  for (std::size_t t = 0; t < triangles.size(); ++t) cells(t, [&](std::size_t c) { grid_.items[fill[c]++] = std::uint32_t(t); });
}

inline std::optional<BarycentricHit> AdaptiveMesh::try_locate(const UnitVector& v) const {
  if (triangles.empty() || v.dot(projection.center()) < -1.0 + 1e-9) return std::nullopt;
  const Vec2 q = projection.project(v);
  const int x = int(std::floor((q.x() - grid_.lo.x()) / grid_.cell));
  const int y = int(std::floor((q.y() - grid_.lo.y()) / grid_.cell));
  if (x < 0 || y < 0 || x >= grid_.nx || y >= grid_.ny) return std::nullopt;
  const std::size_t c = std::size_t(y) * grid_.nx + x;
  BarycentricHit best;
  double best_min = -1e300;
  for (std::uint32_t i = grid_.start[c]; i < grid_.start[c + 1]; ++i) {
    const std::uint32_t t = grid_.items[i];
    const Vec3 a = inv_[t] * v.vec();
    const double s = a.sum();
    if (s <= 0.0) continue;
    const Vec3 w = a / s;
    const double m = w.minCoeff();
    if (m > best_min) {
      best_min = m;
      best.triangle = int(t);
      best.weights = {w[0], w[1], w[2]};
      if (m >= 0.0) break;
    }
  }
  if (best.triangle < 0 || best_min < -1e-9) return std::nullopt;
  return best;
}

/// Median geodesic length of the polygon edges.
inline double median_edge_length(const SphericalPolygon& poly) {
  std::vector<double> len;
  for (std::size_t i = 0; i < poly.size(); ++i) len.push_back(angle_between(poly[i], poly.wrapped(i + 1)));
  std::nth_element(len.begin(), len.begin() + len.size() / 2, len.end());
  return len[len.size() / 2];
}

inline AdaptiveMesh build_adaptive_mesh(const SphericalPolygon& poly, const MeshOptions& opt = {}) {
  AdaptiveMesh mesh;
  mesh.projection = poly.projection();
  const PatchProjection& proj = mesh.projection;
  const std::size_t nb = poly.size();
  for (const auto& p : poly) {
    if (p.dot(proj.center()) < -1.0 + 1e-9) {
      throw Error(ErrorCode::TriangulationFailure, "boundary passes through the projection pole");
    }
  }
  const std::vector<Vec2> ring = poly.projected(proj);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = i + 2; j < nb; ++j) {
      if (i == 0 && j == nb - 1) continue;
      if (detail::segments_cross(ring[i], ring[i + 1], ring[j], ring[(j + 1) % nb])) {
        throw Error(ErrorCode::DegeneratePolyline, "boundary self-intersects", i);
      }
    }
  }

  detail::SiteGenerator gen{poly, proj, ring, opt, opt.min_size > 0.0 ? opt.min_size : median_edge_length(poly), {}};
  gen.prepare();
  Vec2 lo = ring[0], hi = ring[0];
  for (const auto& q : ring) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  // Align the quadtree so the boundary layer gets leaves of a fixed size
  // regardless of the patch extent.
  double s_ref = 0.0;
  for (const auto& q : ring) s_ref += PatchProjection::scale(q);
  s_ref /= double(nb);
  double half = 0.5 * 0.75 * opt.cell_factor * gen.h0 * s_ref;
  while (half < 0.5 * (hi - lo).maxCoeff() * 1.0001) half *= 2.0;
  gen.run(0.5 * (lo + hi), half, 0, 1);

  std::vector<Vec2> pts = ring;
  pts.insert(pts.end(), gen.sites.begin(), gen.sites.end());
  detail::Cdt cdt(pts);
  cdt.make_super(lo, hi);
  std::vector<int> kept;
  for (std::size_t i = 0; i < nb; ++i) {
    if (!cdt.insert(int(i))) {
      throw Error(ErrorCode::TriangulationFailure, "boundary sample could not be inserted", i);
    }
  }
  for (std::size_t i = nb; i < pts.size(); ++i) {
    if (cdt.insert(int(i))) kept.push_back(int(i));
  }
  std::unordered_set<std::uint64_t> constrained;
  for (std::size_t i = 0; i < nb; ++i) {
    const int a = int(i), b = int((i + 1) % nb);
    if (!cdt.recover(a, b)) {
      throw Error(ErrorCode::TriangulationFailure, "boundary edge could not be recovered", i);
    }
    constrained.insert(detail::Cdt::key(a, b));
  }
  // The interior lies left of the ring when it runs counter-clockwise.
  const bool ccw = signed_area(ring) > 0.0;
  auto tris = ccw ? cdt.region(constrained, 0, 1) : cdt.region(constrained, 1, 0);

  std::vector<int> remap(pts.size(), -1);
  for (std::size_t i = 0; i < nb; ++i) remap[i] = int(i);
  mesh.vertices = poly.vertices();
  mesh.boundary_count = nb;
  for (int i : kept) {
    remap[i] = int(mesh.vertices.size());
    mesh.vertices.push_back(proj.unproject(pts[i]));
  }
  std::sort(tris.begin(), tris.end());
  for (const auto& t : tris) {
    std::array<int, 3> m{};
    for (int k = 0; k < 3; ++k) {
      if (t[k] >= cdt.super_index() || remap[t[k]] < 0) {
        throw Error(ErrorCode::TriangulationFailure, "patch region leaks outside the boundary", std::size_t(t[k]));
      }
      m[k] = remap[t[k]];
    }
    const Vec3& a = mesh.vertices[m[0]].vec();
    const Vec3& b = mesh.vertices[m[1]].vec();
    const Vec3& c = mesh.vertices[m[2]].vec();
    if (a.dot(b.cross(c)) <= 0.0) {
      throw Error(ErrorCode::TriangulationFailure, "lifted triangle is not positively oriented", std::size_t(m[0]));
    }
    mesh.triangles.push_back(m);
  }
  const std::size_t expected = nb + 2 * kept.size() - 2;
  if (mesh.triangles.size() != expected) {
    throw Error(ErrorCode::TriangulationFailure,
                "triangle count " + std::to_string(mesh.triangles.size()) + " does not match " + std::to_string(expected));
  }
  mesh.finalize();
  return mesh;
}

/// Wavefront OBJ dump (unit-sphere positions, 1-based faces).
inline void write_obj(const AdaptiveMesh& mesh, std::ostream& os) {
  os << "# panoclone mesh: " << mesh.vertices.size() << " vertices, " << mesh.boundary_count << " boundary\n";
  os.precision(17);
  for (const auto& v : mesh.vertices) os << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace panoclone
