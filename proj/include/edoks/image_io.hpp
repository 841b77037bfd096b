#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "edoks/raster.hpp"

namespace edoks {

struct LoadedImage {
  RgbImage image;
  std::vector<std::string> warnings;  // e.g. dropped alpha channel
};

/// Decodes a PNG or JPEG file (detected from its magic bytes) to 8-bit RGB.
/// Alpha is dropped, grayscale is replicated. Throws DecodeError.
LoadedImage load_image(const std::filesystem::path& path);

/// 8-bit PNG writers; deterministic output for identical input.
void save_png(const std::filesystem::path& path, const RgbImage& image);
/// Values are clamped to [0, 1] and scaled to 0..255.
void save_png_gray(const std::filesystem::path& path, const GrayImage& map);

/// Maps [0, 1] through a fixed dark-to-bright perceptual ramp
/// (black, purple, red, orange, pale yellow).
RgbImage apply_heat_ramp(const GrayImage& map);

/// Portable float map ("Pf", little-endian, bottom row first).
void save_pfm(const std::filesystem::path& path, const GrayImage& map);
GrayImage load_pfm(const std::filesystem::path& path);

}  // namespace edoks
