#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include "edoks/errors.hpp"
#include "edoks/gabor.hpp"
#include "support/synthetic.hpp"

using namespace edoks;
using edoks::testing::grating;

namespace {

std::size_t reflect_index(long i, std::size_t n) {
  const long len = static_cast<long>(n);
  while (i < 0 || i >= len) i = i < 0 ? -i - 1 : 2 * len - i - 1;
  return static_cast<std::size_t>(i);
}

// Direct spatial-domain same-size convolution with symmetric reflection.
std::vector<std::complex<double>> direct_convolve(const GrayImage& img, const ComplexKernel& k) {
  std::vector<std::complex<double>> out(img.size());
  const int r = k.radius();
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      std::complex<double> acc = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const auto sx = reflect_index(static_cast<long>(x) - dx, img.width);
          const auto sy = reflect_index(static_cast<long>(y) - dy, img.height);
          acc += k.at(dx, dy) * img(sx, sy);
        }
      }
      out[y * img.width + x] = acc;
    }
  }
  return out;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

GrayImage random_patch(std::size_t w, std::size_t h, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrayImage g(w, h);
  for (auto& v : g.data) v = u(rng);
  return g;
}

}  // namespace

TEST(Dictionary, DefaultHasTwentyFourScaleMajorFilters) {
  const GaborDictionary d = build_dictionary(default_scales(), default_orientations());
  ASSERT_EQ(d.size(), 24u);
  EXPECT_EQ(d.rows(), 4u);
  EXPECT_EQ(d.cols(), 6u);
  EXPECT_DOUBLE_EQ(d.filters.front().scale, 0.1);
  EXPECT_DOUBLE_EQ(d.filters.front().orientation, 0.0);
  EXPECT_DOUBLE_EQ(d.filters.back().scale, 0.4);
  EXPECT_DOUBLE_EQ(d.filters.back().orientation, 150.0);
  EXPECT_DOUBLE_EQ(d.filters[7].scale, 0.2);
  EXPECT_DOUBLE_EQ(d.filters[7].orientation, 30.0);
}

TEST(Dictionary, KernelGeometry) {
  const GaborDictionary d = build_dictionary(default_scales(), default_orientations());
  const int expected[] = {35, 19, 13, 11};
  for (std::size_t s = 0; s < 4; ++s) {
    const GaborParams& p = d.filters[s * 6];
    EXPECT_NEAR(p.sigma, 0.56 / p.scale, 1e-12);
    EXPECT_EQ(p.kernel_size, expected[s]);
    EXPECT_EQ(p.kernel_size % 2, 1);
    EXPECT_GE(p.kernel_size, 6.0 * p.sigma + 1.0);
    EXPECT_LT(p.kernel_size - 2, 6.0 * p.sigma + 1.0);
  }
  EXPECT_EQ(d.max_kernel_size(), 35);
}

TEST(Dictionary, SingleEntry) {
  const GaborDictionary d = build_dictionary({0.25}, {45.0});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d.filters[0].scale, 0.25);
  EXPECT_DOUBLE_EQ(d.filters[0].orientation, 45.0);
}

TEST(Dictionary, CartesianOrder) {
  const GaborDictionary d = build_dictionary({0.1, 0.3}, {0.0, 60.0, 120.0});
  ASSERT_EQ(d.size(), 6u);
  const double scales[] = {0.1, 0.1, 0.1, 0.3, 0.3, 0.3};
  const double orients[] = {0, 60, 120, 0, 60, 120};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_DOUBLE_EQ(d.filters[i].scale, scales[i]);
    EXPECT_DOUBLE_EQ(d.filters[i].orientation, orients[i]);
  }
}

TEST(Dictionary, RejectsBadInput) {
  EXPECT_THROW(build_dictionary({}, {0.0}), InvalidInput);
  EXPECT_THROW(build_dictionary({0.1}, {}), InvalidInput);
  EXPECT_THROW(build_dictionary({0.1, 0.0}, {0.0}), InvalidInput);
  EXPECT_THROW(build_dictionary({-0.2}, {0.0}), InvalidInput);
}

TEST(Dictionary, CapKernels) {
  const GaborDictionary d = cap_kernels(build_dictionary(default_scales(), default_orientations()), 16);
  for (const auto& f : d.filters) {
    EXPECT_LE(f.kernel_size, 15);
    EXPECT_EQ(f.kernel_size % 2, 1);
  }
  EXPECT_EQ(d.filters.back().kernel_size, 11);
}

TEST(Kernel, ZeroMeanUnitNorm) {
  for (const auto& p : build_dictionary(default_scales(), default_orientations()).filters) {
    const ComplexKernel k = make_kernel(p);
    ASSERT_EQ(k.taps.size(), static_cast<std::size_t>(p.kernel_size * p.kernel_size));
    std::complex<double> sum = 0.0;
    double norm = 0.0;
    for (const auto& t : k.taps) {
      sum += t;
      norm += std::norm(t);
    }
    EXPECT_NEAR(std::abs(sum), 0.0, 1e-12);
    EXPECT_NEAR(norm, 1.0, 1e-12);
  }
}

TEST(ApplyGabor, MatchesDirectConvolution) {
  const GrayImage patch = random_patch(48, 41, 7);
  for (const auto& p : build_dictionary({0.1, 0.3}, {0.0, 30.0, 120.0}).filters) {
    const GaborResponse r = apply_gabor(patch, p);
    const auto expected = direct_convolve(patch, make_kernel(p));
    for (std::size_t i = 0; i < expected.size(); ++i) {
      ASSERT_NEAR(r.real.data[i], expected[i].real(), 1e-10);
      ASSERT_NEAR(r.imag.data[i], expected[i].imag(), 1e-10);
    }
  }
}

TEST(ApplyGabor, MagnitudeIsModulus) {
  const GrayImage patch = random_patch(32, 32, 3);
  const GaborResponse r = apply_gabor(patch, build_dictionary({0.2}, {60.0}).filters[0]);
  for (std::size_t i = 0; i < patch.size(); ++i) {
    EXPECT_DOUBLE_EQ(r.magnitude.data[i], std::hypot(r.real.data[i], r.imag.data[i]));
  }
}

TEST(ApplyGabor, ConstantPatchIsAnnihilated) {
  const GrayImage patch(64, 64, 0.7);
  double patch_energy_total = 0.0;
  for (double v : patch.data) patch_energy_total += v * v;
  for (const auto& p : build_dictionary(default_scales(), default_orientations()).filters) {
    const GaborResponse r = apply_gabor(patch, p);
    double e = 0.0;
    for (double m : r.magnitude.data) e += m * m;
    EXPECT_LT(e, 1e-6 * patch_energy_total);
  }
}

TEST(ApplyGabor, ImpulseReproducesKernelEnvelope) {
  GrayImage patch(71, 71, 0.0);
  patch(35, 35) = 1.0;
  for (const auto& p : build_dictionary(default_scales(), {0.0, 60.0}).filters) {
    const ComplexKernel k = make_kernel(p);
    const GaborResponse r = apply_gabor(patch, p);
    for (int dy = -k.radius(); dy <= k.radius(); ++dy) {
      for (int dx = -k.radius(); dx <= k.radius(); ++dx) {
        EXPECT_NEAR(r.magnitude(35 + dx, 35 + dy), std::abs(k.at(dx, dy)), 1e-12);
      }
    }
  }
}

TEST(ApplyGabor, PatchSmallerThanKernelThrows) {
  const GrayImage patch(20, 20, 0.5);
  EXPECT_THROW(apply_gabor(patch, build_dictionary({0.1}, {0.0}).filters[0]), InvalidInput);
}

TEST(ApplyGabor, GratingPeaksAtMatchingFilter) {
  const GrayImage patch = grating(128, 128, 0.2, 0.0);
  const GaborDictionary d = build_dictionary(default_scales(), default_orientations());
  std::vector<double> mean_magnitude;
  for (const auto& p : d.filters) {
    const GaborResponse r = apply_gabor(patch, p);
    mean_magnitude.push_back(std::accumulate(r.magnitude.data.begin(), r.magnitude.data.end(), 0.0));
  }
  EXPECT_EQ(argmax(mean_magnitude), 6u);  // (0.2, 0 deg)
}

TEST(Energy, ConstantPatchIsUniform) {
  const EnergyMatrix e =
      patch_energy(GrayImage(128, 128, 0.3), build_dictionary(default_scales(), default_orientations()));
  EXPECT_TRUE(e.degenerate);
  ASSERT_EQ(e.values.size(), 24u);
  for (double v : e.values) EXPECT_DOUBLE_EQ(v, 1.0 / 24.0);
}

TEST(Energy, GratingArgmax) {
  const GaborDictionary d = build_dictionary(default_scales(), default_orientations());
  const EnergyMatrix e = patch_energy(grating(128, 128, 0.2, 0.0), d);
  EXPECT_FALSE(e.degenerate);
  EXPECT_EQ(argmax(e.values), 6u);
  EXPECT_EQ(e.at(1, 0), *std::max_element(e.values.begin(), e.values.end()));
}

TEST(Energy, EveryFilterIsItsOwnArgmax) {
  const GaborDictionary d = build_dictionary(default_scales(), default_orientations());
  for (std::size_t f = 0; f < d.size(); ++f) {
    const EnergyMatrix e = patch_energy(grating(128, 128, d.filters[f].scale, d.filters[f].orientation), d);
    EXPECT_EQ(argmax(e.values), f) << "filter " << f;
  }
}

TEST(Energy, RotationMovesArgmaxByOneColumn) {
  const GaborDictionary d = build_dictionary(default_scales(), default_orientations());
  for (double scale : default_scales()) {
    for (double base : {0.0, 30.0, 90.0, 120.0}) {
      const auto a = argmax(patch_energy(grating(128, 128, scale, base), d).values);
      const auto b = argmax(patch_energy(grating(128, 128, scale, base + 30.0), d).values);
      EXPECT_EQ(a / 6, b / 6);
      EXPECT_EQ((a % 6 + 1) % 6, b % 6) << scale << " " << base;
    }
  }
}

TEST(Energy, SumsToOneAndIsNonnegative) {
  const GaborDictionary d = build_dictionary(default_scales(), default_orientations());
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    const EnergyMatrix e = patch_energy(random_patch(64, 64, seed), d);
    EXPECT_FALSE(e.degenerate);
    EXPECT_NEAR(std::accumulate(e.values.begin(), e.values.end(), 0.0), 1.0, 1e-9);
    for (double v : e.values) EXPECT_GE(v, 0.0);
  }
}

TEST(Energy, Deterministic) {
  const GaborDictionary d = build_dictionary(default_scales(), default_orientations());
  const GrayImage patch = random_patch(128, 128, 11);
  const EnergyMatrix a = patch_energy(patch, d);
  const EnergyMatrix b = patch_energy(patch, d);
  const FilterBank bank(d, 128, 128);
  const EnergyMatrix c = bank.energy(patch);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values, c.values);
}

TEST(FilterBank, RejectsWrongShapeAndSmallInput) {
  const GaborDictionary d = build_dictionary(default_scales(), default_orientations());
  EXPECT_THROW(FilterBank(d, 30, 128), InvalidInput);
  const FilterBank bank(d, 64, 64);
  EXPECT_THROW((void)bank.transform(GrayImage(64, 65)), DimensionMismatch);
}

TEST(FilterBank, MagnitudeMatchesRespond) {
  const GaborDictionary d = build_dictionary({0.3}, {0.0, 90.0});
  const GrayImage img = random_patch(50, 45, 5);
  const FilterBank bank(d, 50, 45);
  const Spectrum s = bank.transform(img);
  for (std::size_t f = 0; f < d.size(); ++f) {
    const GrayImage m = bank.magnitude(s, f);
    const GaborResponse r = bank.respond(s, f);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(m.data[i], r.magnitude.data[i], 1e-14);
  }
}
