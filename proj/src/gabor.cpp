#include "edoks/gabor.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>

#include "edoks/errors.hpp"

namespace edoks {
namespace {

// FFTW planning is not reentrant; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr std::size_t kKernelCacheBytes = std::size_t{64} << 20;

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

// Symmetric reflection: ... c b a | a b c ... ; valid while the overhang is <= n.
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  if (i < 0) return static_cast<std::size_t>(-i - 1);
  if (i >= len) return static_cast<std::size_t>(2 * len - 1 - i);
  return static_cast<std::size_t>(i);
}

int odd_ceil(double v) {
  int k = static_cast<int>(std::ceil(v - 1e-9));
  if (k % 2 == 0) ++k;
  return std::max(k, 3);
}

}  // namespace

int GaborDictionary::max_kernel_size() const {
  int k = 0;
  for (const auto& f : filters) k = std::max(k, f.kernel_size);
  return k;
}

GaborDictionary build_dictionary(const std::vector<double>& scales,
                                 const std::vector<double>& orientations,
                                 double sigma_factor) {
  if (scales.empty() || orientations.empty()) {
    throw InvalidInput("filter dictionary needs at least one scale and one orientation");
  }
  if (!(sigma_factor > 0.0)) {
    throw InvalidInput("sigma factor must be positive");
  }
  GaborDictionary dict;
  dict.scales = scales;
  dict.orientations = orientations;
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidInput("filter scale must be a positive frequency, got " + std::to_string(s));
    }
    for (double o : orientations) {
      if (!std::isfinite(o)) throw InvalidInput("filter orientation must be finite");
      GaborParams p;
      p.scale = s;
      p.orientation = o;
      p.sigma = sigma_factor / s;
      p.kernel_size = odd_ceil(6.0 * p.sigma + 1.0);
      dict.filters.push_back(p);
    }
  }
  return dict;
}

GaborDictionary cap_kernels(GaborDictionary dictionary, std::size_t max_side) {
  if (max_side < 3) throw InvalidInput("kernels cannot be capped below 3 pixels");
  int cap = static_cast<int>(std::min<std::size_t>(max_side, 1u << 20));
  if (cap % 2 == 0) --cap;
  for (auto& f : dictionary.filters) f.kernel_size = std::min(f.kernel_size, cap);
  return dictionary;
}

ComplexKernel make_kernel(const GaborParams& params) {
  if (params.kernel_size < 3 || params.kernel_size % 2 == 0) {
    throw InvalidInput("kernel size must be odd and >= 3");
  }
  if (!(params.scale > 0.0) || !(params.sigma > 0.0)) {
    throw InvalidInput("kernel scale and sigma must be positive");
  }
  ComplexKernel k;
  k.size = params.kernel_size;
  const int r = k.radius();
  const double theta = params.orientation * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double two_sigma2 = 2.0 * params.sigma * params.sigma;
  const double omega = 2.0 * std::numbers::pi * params.scale;

  std::vector<double> envelope;
  envelope.reserve(static_cast<std::size_t>(k.size * k.size));
  k.taps.reserve(envelope.capacity());
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double along = dx * c + dy * s;
      const double across = -dx * s + dy * c;
      const double env = std::exp(-(along * along + across * across) / two_sigma2);
      envelope.push_back(env);
      k.taps.emplace_back(env * std::cos(omega * along), env * std::sin(omega * along));
    }
  }

  // Morlet-style DC removal, then unit energy.
  std::complex<double> tap_sum{};
  double env_sum = 0.0;
  for (std::size_t i = 0; i < k.taps.size(); ++i) {
    tap_sum += k.taps[i];
    env_sum += envelope[i];
  }
  const std::complex<double> dc = tap_sum / env_sum;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < k.taps.size(); ++i) {
    k.taps[i] -= dc * envelope[i];
    norm2 += std::norm(k.taps[i]);
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& t : k.taps) t *= inv;
  return k;
}

struct FilterBank::Impl {
  GaborDictionary dictionary;
  std::vector<ComplexKernel> kernels;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t pad = 0;
  std::size_t padded_width = 0;
  std::size_t padded_height = 0;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  std::vector<std::vector<std::complex<double>>> kernel_spectra;  // empty when not cached

  [[nodiscard]] std::size_t bins() const { return padded_width * padded_height; }

  std::vector<std::complex<double>> kernel_spectrum(std::size_t f) const {
    const ComplexKernel& k = kernels[f];
    const int r = k.radius();
    std::vector<std::complex<double>> buf(bins());
    const auto ph = static_cast<std::ptrdiff_t>(padded_height);
    const auto pw = static_cast<std::ptrdiff_t>(padded_width);
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        const auto row = static_cast<std::size_t>((dy + ph) % ph);
        const auto col = static_cast<std::size_t>((dx + pw) % pw);
        buf[row * padded_width + col] = k.at(dx, dy);
      }
    }
    fftw_execute_dft(forward, as_fftw(buf.data()), as_fftw(buf.data()));
    return buf;
  }

  // Complex response cropped to width x height.
  void filtered(const std::vector<std::complex<double>>& spectrum, std::size_t f,
                std::vector<std::complex<double>>& out) const {
    std::optional<std::vector<std::complex<double>>> local;
    const std::vector<std::complex<double>>* ks = nullptr;
    if (kernel_spectra.empty()) {
      local = kernel_spectrum(f);
      ks = &*local;
    } else {
      ks = &kernel_spectra[f];
    }
    std::vector<std::complex<double>> buf(bins());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = spectrum[i] * (*ks)[i];
    fftw_execute_dft(inverse, as_fftw(buf.data()), as_fftw(buf.data()));
    const double scale = 1.0 / static_cast<double>(bins());
    out.resize(width * height);
    for (std::size_t y = 0; y < height; ++y) {
      const std::complex<double>* src = &buf[(y + pad) * padded_width + pad];
      for (std::size_t x = 0; x < width; ++x) out[y * width + x] = src[x] * scale;
    }
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

FilterBank::FilterBank(GaborDictionary dictionary, std::size_t width, std::size_t height)
    : impl_(std::make_unique<Impl>()) {
  if (width == 0 || height == 0) throw InvalidInput("filter bank needs a nonempty shape");
  if (dictionary.filters.empty()) throw InvalidInput("filter bank needs at least one filter");
  const auto side = static_cast<int>(std::min(width, height));
  for (const auto& f : dictionary.filters) {
    if (f.kernel_size > side) {
      throw InvalidInput("input side " + std::to_string(side) + " is smaller than kernel size " +
                         std::to_string(f.kernel_size));
    }
  }
  Impl& d = *impl_;
  d.dictionary = std::move(dictionary);
  for (const auto& f : d.dictionary.filters) d.kernels.push_back(make_kernel(f));
  d.width = width;
  d.height = height;
  d.pad = static_cast<std::size_t>(d.dictionary.max_kernel_size() / 2);
  d.padded_width = width + 2 * d.pad;
  d.padded_height = height + 2 * d.pad;
  {
    std::lock_guard lock(planner_mutex());
    std::vector<std::complex<double>> scratch(d.bins());
    const auto rows = static_cast<int>(d.padded_height);
    const auto cols = static_cast<int>(d.padded_width);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    d.forward = fftw_plan_dft_2d(rows, cols, as_fftw(scratch.data()), as_fftw(scratch.data()),
                                 FFTW_FORWARD, flags);
    d.inverse = fftw_plan_dft_2d(rows, cols, as_fftw(scratch.data()), as_fftw(scratch.data()),
                                 FFTW_BACKWARD, flags);
  }
  if (!d.forward || !d.inverse) throw std::runtime_error("FFTW planning failed");

  if (d.bins() * d.kernels.size() * sizeof(std::complex<double>) <= kKernelCacheBytes) {
    for (std::size_t f = 0; f < d.kernels.size(); ++f) d.kernel_spectra.push_back(d.kernel_spectrum(f));
  }
}

FilterBank::~FilterBank() = default;
FilterBank::FilterBank(FilterBank&&) noexcept = default;
FilterBank& FilterBank::operator=(FilterBank&&) noexcept = default;

const GaborDictionary& FilterBank::dictionary() const { return impl_->dictionary; }
std::size_t FilterBank::width() const { return impl_->width; }
std::size_t FilterBank::height() const { return impl_->height; }

Spectrum FilterBank::transform(const GrayImage& image) const {
  const Impl& d = *impl_;
  if (image.width != d.width || image.height != d.height) {
    throw DimensionMismatch("image shape does not match the filter bank");
  }
  Spectrum s;
  s.bins_.resize(d.bins());
  const auto pad = static_cast<std::ptrdiff_t>(d.pad);
  for (std::size_t py = 0; py < d.padded_height; ++py) {
    const std::size_t sy = reflect(static_cast<std::ptrdiff_t>(py) - pad, d.height);
    for (std::size_t px = 0; px < d.padded_width; ++px) {
      const std::size_t sx = reflect(static_cast<std::ptrdiff_t>(px) - pad, d.width);
      s.bins_[py * d.padded_width + px] = image(sx, sy);
    }
  }
  fftw_execute_dft(d.forward, as_fftw(s.bins_.data()), as_fftw(s.bins_.data()));
  return s;
}

GaborResponse FilterBank::respond(const Spectrum& spectrum, std::size_t filter) const {
  const Impl& d = *impl_;
  std::vector<std::complex<double>> out;
  d.filtered(spectrum.bins_, filter, out);
  GaborResponse r{GrayImage(d.width, d.height), GrayImage(d.width, d.height),
                  GrayImage(d.width, d.height)};
  for (std::size_t i = 0; i < out.size(); ++i) {
    r.real.data[i] = out[i].real();
    r.imag.data[i] = out[i].imag();
    r.magnitude.data[i] = std::sqrt(out[i].real() * out[i].real() + out[i].imag() * out[i].imag());
  }
  return r;
}

GrayImage FilterBank::magnitude(const Spectrum& spectrum, std::size_t filter) const {
  const Impl& d = *impl_;
  std::vector<std::complex<double>> out;
  d.filtered(spectrum.bins_, filter, out);
  GrayImage m(d.width, d.height);
  for (std::size_t i = 0; i < out.size(); ++i) m.data[i] = std::abs(out[i]);
  return m;
}

EnergyMatrix FilterBank::energy(const GrayImage& patch) const {
  const Impl& d = *impl_;
  const Spectrum spectrum = transform(patch);
  EnergyMatrix e;
  e.rows = d.dictionary.rows();
  e.cols = d.dictionary.cols();
  e.values.resize(d.kernels.size());
  double accumulator = 0.0;
  std::vector<std::complex<double>> out;
  for (std::size_t f = 0; f < d.kernels.size(); ++f) {
    d.filtered(spectrum.bins_, f, out);
    double sum = 0.0;
    for (const auto& v : out) sum += v.real() * v.real() + v.imag() * v.imag();
    e.values[f] = sum;
    accumulator += sum;
  }
  if (accumulator < kDegenerateEnergy) {
    std::fill(e.values.begin(), e.values.end(), 1.0 / static_cast<double>(e.values.size()));
    e.degenerate = true;
  } else {
    for (auto& v : e.values) v /= accumulator;
  }
  return e;
}

GaborResponse apply_gabor(const GrayImage& patch, const GaborParams& params) {
  if (patch.empty()) throw InvalidInput("apply_gabor: empty patch");
  if (static_cast<std::size_t>(params.kernel_size) > std::min(patch.width, patch.height)) {
    throw InvalidInput("apply_gabor: patch is smaller than the kernel");
  }
  GaborDictionary single;
  single.scales = {params.scale};
  single.orientations = {params.orientation};
  single.filters = {params};
  FilterBank bank(std::move(single), patch.width, patch.height);
  return bank.respond(bank.transform(patch), 0);
}

EnergyMatrix patch_energy(const GrayImage& patch, const GaborDictionary& dictionary) {
  if (patch.empty()) throw InvalidInput("patch_energy: empty patch");
  FilterBank bank(dictionary, patch.width, patch.height);
  return bank.energy(patch);
}

}  // namespace edoks
