#include <gtest/gtest.h>

#include <fstream>
#include <iterator>

#include <png.h>

#include "edoks/errors.hpp"
#include "edoks/image_io.hpp"
#include "support/synthetic.hpp"

using namespace edoks;
namespace fs = std::filesystem;
namespace synth = edoks::testing;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_rgba_png(const fs::path& path, std::size_t w, std::size_t h) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = PNG_FORMAT_RGBA;
  std::vector<unsigned char> px(w * h * 4, 200);
  for (std::size_t i = 3; i < px.size(); i += 4) px[i] = 10;
  ASSERT_TRUE(png_image_write_to_file(&img, path.string().c_str(), 0, px.data(), 0, nullptr));
}

}  // namespace

TEST(ImageIo, PngRoundTripIsLossless) {
  const fs::path dir = synth::scratch_dir("io_png");
  const RgbImage img = synth::random_image(37, 21, 3);
  save_png(dir / "a.png", img);
  const LoadedImage back = load_image(dir / "a.png");
  EXPECT_EQ(back.image.width, 37u);
  EXPECT_EQ(back.image.height, 21u);
  EXPECT_EQ(back.image.data, img.data);
  EXPECT_TRUE(back.warnings.empty());
}

TEST(ImageIo, PngOutputIsDeterministic) {
  const fs::path dir = synth::scratch_dir("io_det");
  const RgbImage img = synth::natural_image(64, 48, 1);
  save_png(dir / "a.png", img);
  save_png(dir / "b.png", img);
  EXPECT_EQ(slurp(dir / "a.png"), slurp(dir / "b.png"));
}

TEST(ImageIo, AlphaIsDroppedWithWarning) {
  const fs::path dir = synth::scratch_dir("io_alpha");
  write_rgba_png(dir / "rgba.png", 5, 4);
  const LoadedImage img = load_image(dir / "rgba.png");
  ASSERT_EQ(img.warnings.size(), 1u);
  EXPECT_EQ(img.image.data[0], (Rgb8{200, 200, 200}));
}

TEST(ImageIo, JpegDecodes) {
  const fs::path dir = synth::scratch_dir("io_jpeg");
  const fs::path jpg = dir / "x.jpg";
  {
    // 8x8 mid-gray baseline JPEG encoded by Pillow.
    static const unsigned char kJpeg[] = {
#include "data/gray8x8.jpg.inc"
    };
    std::ofstream(jpg, std::ios::binary).write(reinterpret_cast<const char*>(kJpeg), sizeof(kJpeg));
  }
  const LoadedImage img = load_image(jpg);
  EXPECT_EQ(img.image.width, 8u);
  EXPECT_EQ(img.image.height, 8u);
  for (const Rgb8& px : img.image.data) {
    EXPECT_NEAR(px.r, 128, 2);
    EXPECT_NEAR(px.g, 128, 2);
    EXPECT_NEAR(px.b, 128, 2);
  }
}

TEST(ImageIo, MissingAndGarbageFilesThrow) {
  const fs::path dir = synth::scratch_dir("io_bad");
  EXPECT_THROW(load_image(dir / "missing.png"), DecodeError);
  std::ofstream(dir / "junk.png") << "definitely not an image";
  EXPECT_THROW(load_image(dir / "junk.png"), DecodeError);
  std::ofstream(dir / "trunc.png", std::ios::binary) << "\x89PNG\r\n\x1a\n";
  EXPECT_THROW(load_image(dir / "trunc.png"), DecodeError);
}

TEST(ImageIo, GrayMapAndHeatRamp) {
  const fs::path dir = synth::scratch_dir("io_gray");
  GrayImage map(3, 1);
  map.data = {0.0, 0.5, 1.0};
  save_png_gray(dir / "g.png", map);
  const LoadedImage g = load_image(dir / "g.png");
  EXPECT_EQ(g.image.data[0], (Rgb8{0, 0, 0}));
  EXPECT_EQ(g.image.data[1].r, 128);
  EXPECT_EQ(g.image.data[2], (Rgb8{255, 255, 255}));

  const RgbImage heat = apply_heat_ramp(map);
  EXPECT_LE(heat.data[0].r + heat.data[0].g + heat.data[0].b, 8);
  const auto brightness = [](Rgb8 p) { return p.r + p.g + p.b; };
  EXPECT_LT(brightness(heat.data[0]), brightness(heat.data[1]));
  EXPECT_LT(brightness(heat.data[1]), brightness(heat.data[2]));
}

TEST(ImageIo, PfmRoundTrip) {
  const fs::path dir = synth::scratch_dir("io_pfm");
  GrayImage map(4, 3);
  for (std::size_t i = 0; i < map.size(); ++i) map.data[i] = 0.125 * static_cast<double>(i);
  save_pfm(dir / "m.pfm", map);
  const GrayImage back = load_pfm(dir / "m.pfm");
  EXPECT_EQ(back.width, 4u);
  EXPECT_EQ(back.height, 3u);
  EXPECT_EQ(back.data, map.data);
  EXPECT_EQ(slurp(dir / "m.pfm").substr(0, 3), "Pf\n");
}
