#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace edoks {

// Row-major 2-D grid. Index with (x, y) = (column, row).
template <typename T>
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<T> data;

  Raster() = default;
  Raster(std::size_t w, std::size_t h, const T& fill = T{})
      : width(w), height(h), data(w * h, fill) {}

  [[nodiscard]] bool empty() const { return width == 0 || height == 0; }
  [[nodiscard]] std::size_t size() const { return data.size(); }

  T& operator()(std::size_t x, std::size_t y) { return data[y * width + x]; }
  const T& operator()(std::size_t x, std::size_t y) const { return data[y * width + x]; }

  [[nodiscard]] bool same_shape(const Raster& other) const {
    return width == other.width && height == other.height;
  }
  template <typename U>
  [[nodiscard]] bool same_shape(const Raster<U>& other) const {
    return width == other.width && height == other.height;
  }
};

struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

using RgbImage = Raster<Rgb8>;
using GrayImage = Raster<double>;

}  // namespace edoks
