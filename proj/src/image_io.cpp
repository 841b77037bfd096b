#include "edoks/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "edoks/errors.hpp"

namespace edoks {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

LoadedImage load_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw DecodeError(path.string() + ": " + png.message);
  }
  const bool had_alpha = (png.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  png.format = PNG_FORMAT_RGBA;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw DecodeError(path.string() + ": " + msg);
  }
  LoadedImage out;
  out.image = RgbImage(png.width, png.height);
  for (std::size_t i = 0; i < out.image.data.size(); ++i) {
    out.image.data[i] = {buffer[4 * i], buffer[4 * i + 1], buffer[4 * i + 2]};
  }
  if (had_alpha) out.warnings.push_back(path.string() + ": alpha channel ignored");
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Kept free of C++ objects with destructors between setjmp and longjmp.
bool decode_jpeg(std::FILE* file, std::vector<unsigned char>& pixels, unsigned& width,
                 unsigned& height, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    std::strncpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = cinfo.output_width;
  height = cinfo.output_height;
  pixels.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = &pixels[static_cast<std::size_t>(cinfo.output_scanline) * width * 3];
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

LoadedImage load_jpeg(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DecodeError(path.string() + ": cannot open");
  std::vector<unsigned char> pixels;
  unsigned width = 0;
  unsigned height = 0;
  char message[JMSG_LENGTH_MAX] = {};
  if (!decode_jpeg(file.get(), pixels, width, height, message)) {
    throw DecodeError(path.string() + ": " + message);
  }
  LoadedImage out;
  out.image = RgbImage(width, height);
  for (std::size_t i = 0; i < out.image.data.size(); ++i) {
    out.image.data[i] = {pixels[3 * i], pixels[3 * i + 1], pixels[3 * i + 2]};
  }
  return out;
}

void write_png(const std::filesystem::path& path, const void* data, std::size_t width,
               std::size_t height, png_uint_32 format) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(width);
  png.height = static_cast<png_uint_32>(height);
  png.format = format;
  if (!png_image_write_to_file(&png, path.c_str(), 0, data, 0, nullptr)) {
    throw std::runtime_error(path.string() + ": " + png.message);
  }
}

}  // namespace

LoadedImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError(path.string() + ": cannot open");
  std::array<unsigned char, 8> magic{};
  in.read(reinterpret_cast<char*>(magic.data()), magic.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  static constexpr std::array<unsigned char, 8> kPng{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  LoadedImage out;
  if (got == 8 && magic == kPng) {
    out = load_png(path);
  } else if (got >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) {
    out = load_jpeg(path);
  } else {
    throw DecodeError(path.string() + ": not a PNG or JPEG file");
  }
  if (out.image.empty()) throw DecodeError(path.string() + ": image has no pixels");
  return out;
}

void save_png(const std::filesystem::path& path, const RgbImage& image) {
  std::vector<unsigned char> bytes;
  bytes.reserve(image.data.size() * 3);
  for (const auto& p : image.data) {
    bytes.push_back(p.r);
    bytes.push_back(p.g);
    bytes.push_back(p.b);
  }
  write_png(path, bytes.data(), image.width, image.height, PNG_FORMAT_RGB);
}

void save_png_gray(const std::filesystem::path& path, const GrayImage& map) {
  std::vector<unsigned char> bytes(map.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(map.data[i], 0.0, 1.0) * 255.0));
  }
  write_png(path, bytes.data(), map.width, map.height, PNG_FORMAT_GRAY);
}

RgbImage apply_heat_ramp(const GrayImage& map) {
  struct Stop {
    double at;
    double r, g, b;
  };
  static constexpr std::array<Stop, 6> kRamp{{{0.00, 0, 0, 4},
                                              {0.25, 87, 16, 110},
                                              {0.50, 188, 55, 84},
                                              {0.70, 240, 112, 32},
                                              {0.85, 250, 180, 30},
                                              {1.00, 252, 255, 164}}};
  RgbImage out(map.width, map.height);
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    const double v = std::clamp(map.data[i], 0.0, 1.0);
    std::size_t k = 1;
    while (k + 1 < kRamp.size() && v > kRamp[k].at) ++k;
    const Stop& lo = kRamp[k - 1];
    const Stop& hi = kRamp[k];
    const double t = (v - lo.at) / (hi.at - lo.at);
    auto mix = [t](double a, double b) {
      return static_cast<std::uint8_t>(std::lround(a + (b - a) * t));
    };
    out.data[i] = {mix(lo.r, hi.r), mix(lo.g, hi.g), mix(lo.b, hi.b)};
  }
  return out;
}

void save_pfm(const std::filesystem::path& path, const GrayImage& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  out << "Pf\n" << map.width << ' ' << map.height << "\n-1.0\n";
  for (std::size_t row = map.height; row-- > 0;) {
    for (std::size_t x = 0; x < map.width; ++x) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(map(x, row)));
      if constexpr (std::endian::native == std::endian::big) {
        bits = ((bits & 0xFF) << 24) | ((bits & 0xFF00) << 8) | ((bits >> 8) & 0xFF00) | (bits >> 24);
      }
      out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  }
}

GrayImage load_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  std::size_t width = 0;
  std::size_t height = 0;
  double scale = 0.0;
  if (!(in >> magic >> width >> height >> scale) || magic != "Pf" || scale >= 0.0) {
    throw DecodeError(path.string() + ": not a little-endian grayscale PFM");
  }
  in.get();
  GrayImage map(width, height);
  for (std::size_t row = height; row-- > 0;) {
    for (std::size_t x = 0; x < width; ++x) {
      std::uint32_t bits = 0;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof(bits))) {
        throw DecodeError(path.string() + ": truncated PFM");
      }
      map(x, row) = std::bit_cast<float>(bits);
    }
  }
  return map;
}

}  // namespace edoks
