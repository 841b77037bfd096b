#pragma once

#include "edoks/raster.hpp"

namespace edoks {

struct OklabPixel {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const OklabPixel&, const OklabPixel&) = default;
};

using OklabImage = Raster<OklabPixel>;
using DeltaEMap = Raster<double>;

/// sRGB transfer function, 8-bit code value to linear light in [0, 1].
double srgb_to_linear(std::uint8_t code);
/// Inverse transfer function; input is clamped to [0, 1] first.
double linear_to_srgb(double linear);

OklabPixel srgb_to_oklab(Rgb8 pixel);
/// Inverse conversion, rounded to the nearest code value and clamped to gamut.
Rgb8 oklab_to_srgb(const OklabPixel& pixel);

/// Converts every pixel of a gamma-encoded sRGB image to Oklab.
/// Throws InvalidInput for an empty image.
OklabImage rgb_to_oklab(const RgbImage& image);

/// Euclidean distance between two Oklab colors.
double delta_e(const OklabPixel& p1, const OklabPixel& p2);

/// Per-pixel delta_e. Throws DimensionMismatch when shapes differ.
DeltaEMap delta_e_map(const OklabImage& x, const OklabImage& y);

/// Mean per-pixel delta_e over the whole image. Not clamped: sRGB extremes
/// can push individual distances slightly above 1.
double ok_term(const OklabImage& x, const OklabImage& y);

/// Relative luminance of linear RGB (Rec. 709 weights), one value per pixel.
GrayImage to_luminance(const RgbImage& image);

}  // namespace edoks
