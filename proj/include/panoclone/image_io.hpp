#pragma once

// PNG/JPEG load and 8-bit PNG save. Requires linking libpng and libjpeg.

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>

#include "panoclone/errors.hpp"
#include "panoclone/panorama.hpp"

namespace panoclone {

/// Decoded 8-bit image, 1..4 interleaved channels.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};

namespace detail {

inline bool has_png_signature(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

inline bool has_jpeg_signature(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

inline RawImage decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::FormatError, std::string("PNG decode failed: ") + img.message);
  }
  const bool alpha = (img.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  img.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  RawImage out;
  out.width = int(img.width);
  out.height = int(img.height);
  out.channels = alpha ? 4 : 3;
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::FormatError, std::string("PNG decode failed: ") + img.message);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

inline RawImage decode_jpeg(const std::vector<std::uint8_t>& bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  RawImage out;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::FormatError, std::string("JPEG decode failed: ") + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = int(cinfo.output_width);
  out.height = int(cinfo.output_height);
  out.channels = 3;
  out.pixels.resize(std::size_t(out.width) * out.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.pixels.data() + std::size_t(cinfo.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FormatError, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

inline RawImage decode_image(const std::vector<std::uint8_t>& bytes) {
  if (detail::has_png_signature(bytes)) return detail::decode_png(bytes);
  if (detail::has_jpeg_signature(bytes)) return detail::decode_jpeg(bytes);
  throw Error(ErrorCode::FormatError, "unsupported image format (expected PNG or JPEG)");
}

/// Builds a panorama from decoded pixels; an alpha channel, if present, is
/// kept as the alpha plane.
inline Panorama to_panorama(const RawImage& raw) {
  if (raw.width != 2 * raw.height) {
    throw Error(ErrorCode::AspectError, "image is " + std::to_string(raw.width) + "x" +
                                            std::to_string(raw.height) + ", expected width = 2 * height");
  }
  Panorama pano(raw.width, raw.height);
  auto& data = pano.data();
  const std::size_t n = std::size_t(raw.width) * raw.height;
  std::vector<float> alpha;
  if (raw.channels == 4) alpha.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* p = &raw.pixels[i * raw.channels];
    for (int c = 0; c < 3; ++c) data[i * 3 + c] = float(p[raw.channels >= 3 ? c : 0] / 255.0);
    if (raw.channels == 4) alpha[i] = float(p[3] / 255.0);
  }
  pano.set_alpha_plane(std::move(alpha));
  return pano;
}

inline Panorama decode_panorama(const std::vector<std::uint8_t>& bytes) { return to_panorama(decode_image(bytes)); }

inline Panorama load_panorama(const std::string& path) { return decode_panorama(detail::read_file(path)); }

/// Decodes a matte image: alpha channel when present, otherwise luminance of RGB.
inline std::vector<float> decode_matte(const std::vector<std::uint8_t>& bytes, int width, int height) {
  const RawImage raw = decode_image(bytes);
  if (raw.width != width || raw.height != height) {
    throw Error(ErrorCode::AspectError, "matte size must match the source panorama");
  }
  std::vector<float> alpha(std::size_t(width) * height);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const std::uint8_t* p = &raw.pixels[i * raw.channels];
    if (raw.channels == 4) {
      alpha[i] = float(p[3] / 255.0);
    } else {
      alpha[i] = float((0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0);
    }
  }
  return alpha;
}

inline std::vector<float> load_matte(const std::string& path, int width, int height) {
  return decode_matte(detail::read_file(path), width, height);
}

namespace detail {

inline std::vector<std::uint8_t> encode_rgb8(const std::vector<std::uint8_t>& px, int width, int height) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(width);
  img.height = png_uint_32(height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(img, size, 0, px.data(), 0, nullptr)) {
    throw Error(ErrorCode::FormatError, std::string("PNG encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, px.data(), 0, nullptr)) {
    throw Error(ErrorCode::FormatError, std::string("PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

}  // namespace detail

/// Encodes RGB (ignoring alpha) as an 8-bit PNG with round-half-up quantization.
inline std::vector<std::uint8_t> encode_png(const Panorama& pano) {
  std::vector<std::uint8_t> px(std::size_t(pano.width()) * pano.height() * 3);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = quantize(pano.data()[i]);
  return detail::encode_rgb8(px, pano.width(), pano.height());
}

/// Encodes the pixel rectangle [x, x + width) x [y, y + height).
inline std::vector<std::uint8_t> encode_png(const Panorama& pano, int x, int y, int width, int height) {
  if (width <= 0 || height <= 0 || x < 0 || y < 0 || x + width > pano.width() || y + height > pano.height()) {
    throw Error(ErrorCode::InvalidArgument, "crop rectangle outside the panorama");
  }
  std::vector<std::uint8_t> px(std::size_t(width) * height * 3);
  std::size_t k = 0;
  for (int r = y; r < y + height; ++r) {
    for (int c = x; c < x + width; ++c) {
      const Rgb v = pano.at(c, r);
      px[k++] = quantize(v.r);
      px[k++] = quantize(v.g);
      px[k++] = quantize(v.b);
    }
  }
  return detail::encode_rgb8(px, width, height);
}

inline void save_png(const Panorama& pano, const std::string& path) {
  const auto bytes = encode_png(pano);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FormatError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw Error(ErrorCode::FormatError, "write failed for " + path);
}

}  // namespace panoclone
