#pragma once

// Equirectangular raster with spherical sampling semantics.
//
// Column x maps to azimuth phi = 2 pi x / w, row y to polar angle
// theta = pi y / h; pixel (i, j) has its center at (i + 0.5, j + 0.5).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "panoclone/errors.hpp"
#include "panoclone/sphere_geom.hpp"

namespace panoclone {

struct Rgb {
  double r = 0.0, g = 0.0, b = 0.0;

  double& operator[](int c) { return c == 0 ? r : (c == 1 ? g : b); }
  double operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }
  Rgb operator+(const Rgb& o) const { return {r + o.r, g + o.g, b + o.b}; }
  Rgb operator-(const Rgb& o) const { return {r - o.r, g - o.g, b - o.b}; }
  Rgb operator*(double s) const { return {r * s, g * s, b * s}; }
  Rgb& operator+=(const Rgb& o) {
    r += o.r;
    g += o.g;
    b += o.b;
    return *this;
  }
  friend bool operator==(const Rgb&, const Rgb&) = default;
  Rgb clamped() const { return {std::clamp(r, 0.0, 1.0), std::clamp(g, 0.0, 1.0), std::clamp(b, 0.0, 1.0)}; }
};

struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
};

inline UnitVector pixel_to_unit(PixelCoord p, int w, int h) {
  return sph_to_unit({kTwoPi * p.x / w, kPi * p.y / h});
}

inline PixelCoord unit_to_pixel(const UnitVector& v, int w, int h) {
  const SphericalCoord c = unit_to_sph(v);
  return {c.phi / kTwoPi * w, c.theta / kPi * h};
}

/// RGB panorama, float storage in [0, 1], optional alpha plane. Width must be
/// twice the height.
class Panorama {
 public:
  Panorama() = default;
  Panorama(int width, int height, Rgb fill = {}) : w_(width), h_(height) {
    if (width <= 0 || height <= 0 || width != 2 * height) {
      throw Error(ErrorCode::AspectError, "equirectangular panorama must have width = 2 * height");
    }
    rgb_.resize(std::size_t(w_) * h_ * 3);
    for (std::size_t i = 0; i < rgb_.size(); i += 3) {
      rgb_[i] = float(fill.r);
      rgb_[i + 1] = float(fill.g);
      rgb_[i + 2] = float(fill.b);
    }
  }

  int width() const { return w_; }
  int height() const { return h_; }
  bool empty() const { return rgb_.empty(); }
  bool has_alpha() const { return !alpha_.empty(); }

  Rgb at(int x, int y) const {
    const float* p = &rgb_[index(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, const Rgb& c) {
    float* p = &rgb_[index(x, y)];
    p[0] = float(std::clamp(c.r, 0.0, 1.0));
    p[1] = float(std::clamp(c.g, 0.0, 1.0));
    p[2] = float(std::clamp(c.b, 0.0, 1.0));
  }
  float alpha_at(int x, int y) const { return alpha_.empty() ? 1.0f : alpha_[std::size_t(y) * w_ + x]; }
  void set_alpha_plane(std::vector<float> a) {
    if (!a.empty() && a.size() != std::size_t(w_) * h_) {
      throw Error(ErrorCode::InvalidArgument, "alpha plane size mismatch");
    }
    alpha_ = std::move(a);
  }

  const std::vector<float>& data() const { return rgb_; }
  std::vector<float>& data() { return rgb_; }
  const std::vector<float>& alpha() const { return alpha_; }

  /// Maps a possibly out-of-range integer pixel to its spherical neighbor:
  /// columns wrap, rows beyond a pole reflect through it with a half-turn in
  /// azimuth.
  void wrap(int& x, int& y) const {
    if (y < 0) {
      y = -y - 1;
      x += w_ / 2;
    } else if (y >= h_) {
      y = 2 * h_ - y - 1;
      x += w_ / 2;
    }
    y = std::clamp(y, 0, h_ - 1);
    x %= w_;
    if (x < 0) x += w_;
  }

  /// Bilinear sample at a continuous pixel position.
  Rgb sample_pixel(double px, double py) const {
    const double fx = px - 0.5;
    const double fy = py - 0.5;
    const double x0f = std::floor(fx);
    const double y0f = std::floor(fy);
    const double tx = fx - x0f;
    const double ty = fy - y0f;
    const int x0 = int(x0f);
    const int y0 = int(y0f);
    Rgb out;
    const double wts[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    const int dx[4] = {0, 1, 0, 1};
    const int dy[4] = {0, 0, 1, 1};
    for (int k = 0; k < 4; ++k) {
      if (wts[k] == 0.0) continue;
      int x = x0 + dx[k];
      int y = y0 + dy[k];
      wrap(x, y);
      const float* p = &rgb_[(std::size_t(y) * w_ + x) * 3];
      out.r += wts[k] * p[0];
      out.g += wts[k] * p[1];
      out.b += wts[k] * p[2];
    }
    return out;
  }

  double sample_alpha_pixel(double px, double py) const {
    if (alpha_.empty()) return 1.0;
    const double fx = px - 0.5;
    const double fy = py - 0.5;
    const double x0f = std::floor(fx);
    const double y0f = std::floor(fy);
    const double tx = fx - x0f;
    const double ty = fy - y0f;
    double out = 0.0;
    const double wts[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    for (int k = 0; k < 4; ++k) {
      if (wts[k] == 0.0) continue;
      int x = int(x0f) + (k & 1);
      int y = int(y0f) + (k >> 1);
      wrap(x, y);
      out += wts[k] * alpha_[std::size_t(y) * w_ + x];
    }
    return out;
  }

  Rgb sample(const UnitVector& v) const {
    const PixelCoord p = unit_to_pixel(v, w_, h_);
    return sample_pixel(p.x, p.y);
  }
  double sample_alpha(const UnitVector& v) const {
    const PixelCoord p = unit_to_pixel(v, w_, h_);
    return sample_alpha_pixel(p.x, p.y);
  }

  friend bool operator==(const Panorama& a, const Panorama& b) {
    return a.w_ == b.w_ && a.h_ == b.h_ && a.rgb_ == b.rgb_ && a.alpha_ == b.alpha_;
  }

 private:
  std::size_t index(int x, int y) const { return (std::size_t(y) * w_ + x) * 3; }

  int w_ = 0;
  int h_ = 0;
  std::vector<float> rgb_;
  std::vector<float> alpha_;
};

inline Rgb sample_bilinear(const Panorama& pano, const UnitVector& v) { return pano.sample(v); }

inline std::uint8_t quantize(double v) {
  return std::uint8_t(std::clamp(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5), 0.0, 255.0));
}

/// Largest per-channel difference after 8-bit quantization of both images.
inline int max_quantized_difference(const Panorama& a, const Panorama& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::InvalidArgument, "panorama size mismatch");
  }
  int worst = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(int(quantize(a.data()[i])) - int(quantize(b.data()[i]))));
  }
  return worst;
}

}  // namespace panoclone
