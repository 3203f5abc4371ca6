#include "panoclone/panorama.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "panoclone/image_io.hpp"
#include "test_util.hpp"

using namespace panoclone;

TEST(PixelToUnit, Convention) {
  const UnitVector v = pixel_to_unit({1.0, 1.0}, 4, 2);
  EXPECT_NEAR(v.x(), 0.0, 1e-15);
  EXPECT_NEAR(v.y(), 1.0, 1e-15);
  EXPECT_NEAR(v.z(), 0.0, 1e-15);
  const UnitVector n = pixel_to_unit({0.0, 0.0}, 4, 2);
  EXPECT_EQ(n.z(), 1.0);
}

TEST(PixelToUnit, RoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(1e-6, 2048 - 1e-6), uy(1e-3, 1024 - 1e-3);
  for (int i = 0; i < 2000; ++i) {
    const PixelCoord p{ux(rng), uy(rng)};
    const PixelCoord q = unit_to_pixel(pixel_to_unit(p, 2048, 1024), 2048, 1024);
    EXPECT_NEAR(q.x, p.x, 1e-9);
    EXPECT_NEAR(q.y, p.y, 1e-9);
  }
}

TEST(Panorama, RejectsBadAspect) {
  try {
    Panorama p(1000, 600);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AspectError);
  }
}

TEST(SampleBilinear, ConstantAndPixelCenters) {
  Panorama c(64, 32, {0.25, 0.5, 0.75});
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const Rgb s = sample_bilinear(c, fixtures::random_unit(rng));
    EXPECT_NEAR(s.r, 0.25, 1e-7);
    EXPECT_NEAR(s.g, 0.5, 1e-7);
    EXPECT_NEAR(s.b, 0.75, 1e-7);
  }
  const Panorama t = fixtures::textured_panorama(32);
  for (int y = 0; y < 32; y += 3) {
    for (int x = 0; x < 64; x += 5) {
      const Rgb s = t.sample_pixel(x + 0.5, y + 0.5);
      EXPECT_EQ(s.r, t.at(x, y).r);
      EXPECT_EQ(s.b, t.at(x, y).b);
    }
  }
}

TEST(SampleBilinear, SeamContinuity) {
  const Panorama t = fixtures::textured_panorama(64);
  for (int k = 0; k < 50; ++k) {
    const double theta = 0.05 + k * 0.06;
    const double eps = 1e-9;
    const Rgb a = sample_bilinear(t, sph_to_unit({kTwoPi - eps, theta}));
    const Rgb b = sample_bilinear(t, sph_to_unit({eps, theta}));
    EXPECT_NEAR(a.r, b.r, 1e-6);
    EXPECT_NEAR(a.g, b.g, 1e-6);
    // Halfway between the last and first column equals their average.
    const Rgb mid = t.sample_pixel(0.0, k % 64 + 0.5);
    EXPECT_NEAR(mid.r, 0.5 * (t.at(0, k % 64).r + t.at(127, k % 64).r), 1e-6);
  }
}

TEST(SampleBilinear, ReflectsThroughPole) {
  Panorama p(8, 4, {0, 0, 0});
  p.set(1, 0, {1, 0, 0});  // phi ~ pi/4 + , top row
  p.set(5, 0, {0, 1, 0});  // opposite side of the pole
  // Above the first row center, column 1 blends with column 5.
  const Rgb s = p.sample_pixel(1.5, 0.25);
  EXPECT_NEAR(s.r, 0.75, 1e-6);
  EXPECT_NEAR(s.g, 0.25, 1e-6);
}

TEST(ImageIo, SaveLoadQuantizationBound) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Panorama p(128, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 128; ++x) p.set(x, y, {u(rng), u(rng), u(rng)});
  const auto path = std::filesystem::temp_directory_path() / "panoclone_io_test.png";
  save_png(p, path.string());
  const Panorama q = load_panorama(path.string());
  ASSERT_EQ(q.width(), 128);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.data().size(); ++i) worst = std::max(worst, double(std::abs(p.data()[i] - q.data()[i])));
  EXPECT_LE(worst, 1.0 / 255.0 + 1e-7);
  // Reloading what was saved is lossless.
  save_png(q, path.string());
  EXPECT_EQ(load_panorama(path.string()), q);
  std::filesystem::remove(path);
}

TEST(ImageIo, RoundHalfUp) {
  EXPECT_EQ(quantize(0.5 / 255.0), 1);
  EXPECT_EQ(quantize(0.49 / 255.0), 0);
  EXPECT_EQ(quantize(1.5), 255);
  EXPECT_EQ(quantize(-0.5), 0);
}

TEST(ImageIo, AspectAndFormatErrors) {
  RawImage raw{1000, 600, 3, std::vector<std::uint8_t>(1000 * 600 * 3, 0)};
  try {
    to_panorama(raw);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AspectError);
  }
  try {
    decode_image({'n', 'o', 'p', 'e'});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
  }
  // An accepted desk-size panorama.
  const Panorama big(2048, 1024, {0.1, 0.2, 0.3});
  const auto bytes = encode_png(big);
  const Panorama back = decode_panorama(bytes);
  EXPECT_EQ(back.width(), 2048);
  EXPECT_EQ(back.height(), 1024);
}

TEST(ImageIo, LoadsJpegFixture) {
  const Panorama p = load_panorama(std::string(PANOCLONE_TEST_DATA) + "/pano_0.jpg");
  EXPECT_EQ(p.width(), 2 * p.height());
}
