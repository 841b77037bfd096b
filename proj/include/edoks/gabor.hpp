#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "edoks/raster.hpp"

namespace edoks {

inline constexpr double kDefaultSigmaFactor = 0.56;

inline const std::vector<double>& default_scales() {
  static const std::vector<double> scales{0.1, 0.2, 0.3, 0.4};
  return scales;
}

inline const std::vector<double>& default_orientations() {
  static const std::vector<double> orientations{0.0, 30.0, 60.0, 90.0, 120.0, 150.0};
  return orientations;
}

// One filter of the bank. scale is a spatial frequency in cycles per pixel
// (wavelength 1/scale); orientation is the direction of the wave vector in
// degrees, measured from the +x (column) axis towards +y (row).
struct GaborParams {
  double scale = 0.0;
  double orientation = 0.0;
  int kernel_size = 0;  // odd, >= 3
  double sigma = 0.0;   // Gaussian envelope std-dev in pixels
};

// Cartesian product of scales x orientations, scale-major.
struct GaborDictionary {
  std::vector<double> scales;
  std::vector<double> orientations;
  std::vector<GaborParams> filters;

  [[nodiscard]] std::size_t rows() const { return scales.size(); }
  [[nodiscard]] std::size_t cols() const { return orientations.size(); }
  [[nodiscard]] std::size_t size() const { return filters.size(); }
  [[nodiscard]] int max_kernel_size() const;
};

/// sigma = sigma_factor / scale; kernel_size = smallest odd integer >= 6*sigma + 1.
/// Throws InvalidInput on empty lists or nonpositive scales.
GaborDictionary build_dictionary(const std::vector<double>& scales,
                                 const std::vector<double>& orientations,
                                 double sigma_factor = kDefaultSigmaFactor);

/// Same dictionary with every kernel_size limited to the largest odd value <= max_side.
GaborDictionary cap_kernels(GaborDictionary dictionary, std::size_t max_side);

// Sampled complex kernel. The real (cosine) part carries a Gaussian-shaped DC
// correction so both parts sum to zero, and the whole kernel has unit L2 norm.
struct ComplexKernel {
  int size = 0;
  std::vector<std::complex<double>> taps;  // row-major size x size, center at (size/2, size/2)

  [[nodiscard]] int radius() const { return size / 2; }
  [[nodiscard]] std::complex<double> at(int dx, int dy) const {
    return taps[static_cast<std::size_t>((dy + radius()) * size + (dx + radius()))];
  }
};

ComplexKernel make_kernel(const GaborParams& params);

struct GaborResponse {
  GrayImage real;
  GrayImage imag;
  GrayImage magnitude;
};

// Normalized filter-bank energy of one patch; row = scale, column = orientation.
struct EnergyMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  bool degenerate = false;  // flat patch, uniform fallback

  [[nodiscard]] double at(std::size_t scale, std::size_t orientation) const {
    return values[scale * cols + orientation];
  }
};

// Accumulated energy below this is treated as a flat patch.
inline constexpr double kDegenerateEnergy = 1e-12;

class Spectrum;

// Precomputed kernels plus FFT plans for a fixed input shape. Immutable after
// construction; every const member is safe to call from several threads.
class FilterBank {
 public:
  FilterBank(GaborDictionary dictionary, std::size_t width, std::size_t height);
  ~FilterBank();
  FilterBank(FilterBank&&) noexcept;
  FilterBank& operator=(FilterBank&&) noexcept;
  FilterBank(const FilterBank&) = delete;
  FilterBank& operator=(const FilterBank&) = delete;

  [[nodiscard]] const GaborDictionary& dictionary() const;
  [[nodiscard]] std::size_t width() const;
  [[nodiscard]] std::size_t height() const;

  /// Reflect-pads the image and takes its forward transform.
  [[nodiscard]] Spectrum transform(const GrayImage& image) const;
  [[nodiscard]] GaborResponse respond(const Spectrum& spectrum, std::size_t filter) const;
  [[nodiscard]] GrayImage magnitude(const Spectrum& spectrum, std::size_t filter) const;
  /// Sum of |F|^2 over the image for every filter, divided by the total.
  [[nodiscard]] EnergyMatrix energy(const GrayImage& patch) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class Spectrum {
 public:
  Spectrum() = default;

 private:
  friend class FilterBank;
  std::vector<std::complex<double>> bins_;
};

/// Same-size convolution of the patch with the cosine- and sine-phase kernels
/// (reflective border). Throws InvalidInput if a side is smaller than the kernel.
GaborResponse apply_gabor(const GrayImage& patch, const GaborParams& params);

/// Energy matrix of one patch against a dictionary; shape follows the dictionary.
EnergyMatrix patch_energy(const GrayImage& patch, const GaborDictionary& dictionary);

}  // namespace edoks
