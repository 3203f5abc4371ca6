#pragma once

// Versioned binary session format (portable byte order). Timings are not
// stored, so identical inputs serialize to identical bytes.

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/array.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>

#include "panoclone/clone.hpp"
#include "panoclone/errors.hpp"

namespace panoclone {

inline constexpr std::uint32_t kSessionFormatVersion = 1;
inline constexpr char kSessionMagic[] = "PANOCLONE-SESSION";

namespace detail {

inline std::vector<double> flatten(const std::vector<UnitVector>& v) {
  std::vector<double> out;
  out.reserve(v.size() * 3);
  for (const auto& u : v) {
    out.push_back(u.x());
    out.push_back(u.y());
    out.push_back(u.z());
  }
  return out;
}

inline std::vector<UnitVector> unflatten(const std::vector<double>& d) {
  if (d.size() % 3 != 0) throw Error(ErrorCode::FormatError, "session: bad vector block");
  std::vector<UnitVector> out;
  out.reserve(d.size() / 3);
  for (std::size_t i = 0; i < d.size(); i += 3) out.push_back(UnitVector::restore(Vec3(d[i], d[i + 1], d[i + 2])));
  return out;
}

}  // namespace detail

inline void write_session(const CloneSession& s, std::ostream& os) {
  cereal::PortableBinaryOutputArchive ar(os);
  ar(std::string(kSessionMagic), kSessionFormatVersion);

  ar(std::int32_t(s.source.width()), std::int32_t(s.source.height()), s.source.data(), s.source.alpha());
  ar(detail::flatten(s.boundary.vertices()));

  const AdaptiveMesh& m = s.mesh;
  ar(detail::flatten(m.vertices), std::uint64_t(m.boundary_count), m.triangles);
  const UnitVector& c = m.projection.center();
  ar(c.x(), c.y(), c.z());

  ar(std::uint64_t(s.rows.size()));
  for (const auto& r : s.rows) {
    ar(r.weights, bool(r.snapped_to), std::uint64_t(r.snapped_to.value_or(0)));
  }

  ar(bool(s.split));
  if (s.split) {
    const SplitPlan& p = *s.split;
    std::vector<std::uint8_t> tags;
    for (Region r : p.tags) tags.push_back(std::uint8_t(r));
    ar(std::int32_t(p.method), p.normal.x(), p.normal.y(), p.normal.z(), p.path, p.left, p.right, tags, p.sub1, p.sub2,
       p.span1, p.span2, p.flagged, p.path_overflow);
  }
  ar(s.datum.x(), s.datum.y(), s.datum.z(), std::int32_t(s.supersampling), s.matte, s.overflow_vertices);
}

inline CloneSession read_session(std::istream& is) {
  CloneSession s;
  try {
    cereal::PortableBinaryInputArchive ar(is);
    std::string magic;
    std::uint32_t version = 0;
    ar(magic, version);
    if (magic != kSessionMagic) throw Error(ErrorCode::FormatError, "not a session file");
    if (version != kSessionFormatVersion) {
      throw Error(ErrorCode::FormatError, "unsupported session format version " + std::to_string(version));
    }

    std::int32_t w = 0, h = 0;
    std::vector<float> rgb, alpha;
    ar(w, h, rgb, alpha);
    s.source = Panorama(w, h);
    if (rgb.size() != s.source.data().size()) throw Error(ErrorCode::FormatError, "session: bad source block");
    s.source.data() = std::move(rgb);
    s.source.set_alpha_plane(std::move(alpha));

    std::vector<double> boundary;
    ar(boundary);
    s.boundary = SphericalPolygon(detail::unflatten(boundary));

    std::vector<double> verts;
    std::uint64_t nb = 0;
    ar(verts, nb, s.mesh.triangles);
    s.mesh.vertices = detail::unflatten(verts);
    s.mesh.boundary_count = std::size_t(nb);
    double cx = 0, cy = 0, cz = 0;
    ar(cx, cy, cz);
    s.mesh.projection = PatchProjection(UnitVector::restore(Vec3(cx, cy, cz)));
    for (const auto& t : s.mesh.triangles) {
      for (int k : t) {
        if (k < 0 || std::size_t(k) >= s.mesh.vertices.size()) {
          throw Error(ErrorCode::FormatError, "session: triangle index out of range");
        }
      }
    }
    s.mesh.finalize();

    std::uint64_t nrows = 0;
    ar(nrows);
    if (nrows != s.mesh.size()) throw Error(ErrorCode::FormatError, "session: row count mismatch");
    s.rows.resize(std::size_t(nrows));
    for (auto& r : s.rows) {
      bool snapped = false;
      std::uint64_t idx = 0;
      ar(r.weights, snapped, idx);
      if (snapped) r.snapped_to = std::size_t(idx);
    }

    bool has_split = false;
    ar(has_split);
    if (has_split) {
      SplitPlan p;
      std::int32_t method = 0;
      double nx = 0, ny = 0, nz = 0;
      std::vector<std::uint8_t> tags;
      ar(method, nx, ny, nz, p.path, p.left, p.right, tags, p.sub1, p.sub2, p.span1, p.span2, p.flagged,
         p.path_overflow);
      p.method = SplitMethod(method);
      p.normal = Vec3(nx, ny, nz);
      for (auto t : tags) p.tags.push_back(Region(t));
      s.split = std::move(p);
    }
    double dx = 0, dy = 0, dz = 0;
    std::int32_t ss = 1;
    ar(dx, dy, dz, ss, s.matte, s.overflow_vertices);
    s.datum = UnitVector::restore(Vec3(dx, dy, dz));
    s.supersampling = ss;
  } catch (const cereal::Exception& e) {
    throw Error(ErrorCode::FormatError, std::string("session file truncated or corrupt: ") + e.what());
  }
  return s;
}

inline std::string serialize_session(const CloneSession& s) {
  std::ostringstream os(std::ios::binary);
  write_session(s, os);
  return os.str();
}

inline CloneSession deserialize_session(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  return read_session(is);
}

}  // namespace panoclone
