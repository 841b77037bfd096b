#include "edoks/color.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "edoks/errors.hpp"

namespace edoks {
namespace {

const std::array<double, 256>& decode_table() {
  static const std::array<double, 256> table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) {
      const double c = i / 255.0;
      t[i] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    }
    return t;
  }();
  return table;
}

void require_nonempty(std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) {
    throw InvalidInput("image has no pixels");
  }
}

}  // namespace

double srgb_to_linear(std::uint8_t code) { return decode_table()[code]; }

double linear_to_srgb(double linear) {
  const double c = std::clamp(linear, 0.0, 1.0);
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

OklabPixel srgb_to_oklab(Rgb8 pixel) {
  const double r = srgb_to_linear(pixel.r);
  const double g = srgb_to_linear(pixel.g);
  const double b = srgb_to_linear(pixel.b);

  const double l = 0.4122214708 * r + 0.5363325363 * g + 0.0514459929 * b;
  const double m = 0.2119034982 * r + 0.6806995451 * g + 0.1073969566 * b;
  const double s = 0.0883024619 * r + 0.2817188376 * g + 0.6299787005 * b;

  const double l_ = std::cbrt(l);
  const double m_ = std::cbrt(m);
  const double s_ = std::cbrt(s);

  return {0.2104542553 * l_ + 0.7936177850 * m_ - 0.0040720468 * s_,
          1.9779984951 * l_ - 2.4285922050 * m_ + 0.4505937099 * s_,
          0.0259040371 * l_ + 0.7827717662 * m_ - 0.8086757660 * s_};
}

Rgb8 oklab_to_srgb(const OklabPixel& p) {
  const double l_ = p.L + 0.3963377774 * p.a + 0.2158037573 * p.b;
  const double m_ = p.L - 0.1055613458 * p.a - 0.0638541728 * p.b;
  const double s_ = p.L - 0.0894841775 * p.a - 1.2914855480 * p.b;

  const double l = l_ * l_ * l_;
  const double m = m_ * m_ * m_;
  const double s = s_ * s_ * s_;

  const double r = +4.0767416621 * l - 3.3077115913 * m + 0.2309699292 * s;
  const double g = -1.2684380046 * l + 2.6097574011 * m - 0.3413193965 * s;
  const double b = -0.0041960863 * l - 0.7034186147 * m + 1.7076147010 * s;

  auto to_code = [](double linear) {
    return static_cast<std::uint8_t>(std::lround(linear_to_srgb(linear) * 255.0));
  };
  return {to_code(r), to_code(g), to_code(b)};
}

OklabImage rgb_to_oklab(const RgbImage& image) {
  require_nonempty(image.width, image.height);
  OklabImage out(image.width, image.height);
  std::transform(image.data.begin(), image.data.end(), out.data.begin(), srgb_to_oklab);
  return out;
}

double delta_e(const OklabPixel& p1, const OklabPixel& p2) {
  const double dl = p1.L - p2.L;
  const double da = p1.a - p2.a;
  const double db = p1.b - p2.b;
  return std::sqrt(dl * dl + da * da + db * db);
}

DeltaEMap delta_e_map(const OklabImage& x, const OklabImage& y) {
  if (!x.same_shape(y)) {
    throw DimensionMismatch("delta_e_map: images differ in size");
  }
  DeltaEMap out(x.width, x.height);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    out.data[i] = delta_e(x.data[i], y.data[i]);
  }
  return out;
}

double ok_term(const OklabImage& x, const OklabImage& y) {
  if (!x.same_shape(y)) {
    throw DimensionMismatch("ok_term: images differ in size");
  }
  require_nonempty(x.width, x.height);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    sum += delta_e(x.data[i], y.data[i]);
  }
  return sum / static_cast<double>(x.data.size());
}

GrayImage to_luminance(const RgbImage& image) {
  require_nonempty(image.width, image.height);
  GrayImage out(image.width, image.height);
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    const Rgb8 p = image.data[i];
    out.data[i] = 0.2126 * srgb_to_linear(p.r) + 0.7152 * srgb_to_linear(p.g) +
                  0.0722 * srgb_to_linear(p.b);
  }
  return out;
}

}  // namespace edoks
