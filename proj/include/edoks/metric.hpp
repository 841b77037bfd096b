#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edoks/color.hpp"
#include "edoks/gabor.hpp"
#include "edoks/raster.hpp"
#include "edoks/signature.hpp"

namespace edoks {

struct MetricConfig {
  double alpha = 0.5;
  std::size_t patch_size = 128;
  double c = 1e-12;
  std::vector<double> scales = default_scales();
  std::vector<double> orientations = default_orientations();
  double sigma_factor = kDefaultSigmaFactor;
  ClusteringOptions clustering{};
  // Threads used inside one comparison (patch energies, concurrent terms).
  std::size_t jobs = 1;

  /// Throws ConfigError when alpha is outside [0, 1], c <= 0, the patch size
  /// is below the minimum kernel size (3) or the dictionary is invalid.
  void validate() const;
};

/// Patch size actually used for a given image shape: the configured value,
/// clamped to the smaller image side.
std::size_t effective_patch_size(const MetricConfig& cfg, std::size_t width, std::size_t height);

/// alpha * emd + (1 - alpha) * ok. Every score path goes through this, so
/// cached terms recombine bit-identically.
double combine_edok(double alpha, double emd_value, double ok_value);
double edoks_from_edok(double edok_value, double c);

struct ExplanationMaps {
  GrayImage texture_diff;  // normalized to [0, 1]
  GrayImage color_diff;    // raw per-pixel delta E
  GrayImage overlay;       // [0, 1]
};

struct MetricReport {
  double emd_value = 0.0;
  double ok_value = 0.0;
  double edok_value = 0.0;
  double edoks_value = 0.0;
  double alpha = 0.5;
  double c = 1e-12;
  std::size_t patch_size = 0;  // effective
  std::size_t clusters_x = 0;
  std::size_t clusters_y = 0;
  std::optional<ExplanationMaps> maps;
  std::vector<std::string> warnings;
};

// Both dissimilarity terms for one pair, before alpha weighting.
struct TermScores {
  double emd = 0.0;
  double ok = 0.0;
  std::size_t clusters_x = 0;
  std::size_t clusters_y = 0;
  std::size_t patch_size = 0;
};

/// Texture (EMD over signatures) and color (OK) terms, computed concurrently
/// when cfg.jobs > 1. Throws DimensionMismatch for differently sized images.
TermScores term_scores(const RgbImage& x, const RgbImage& y, const MetricConfig& cfg);

double edok(const RgbImage& x, const RgbImage& y, const MetricConfig& cfg);

MetricReport edoks(const RgbImage& x, const RgbImage& y, const MetricConfig& cfg,
                   bool with_maps = false);

/// Per-pixel mean over the filter bank of | |F_x| - |F_y| | on whole-image
/// responses (kernels shared with the score path), divided by its maximum.
GrayImage texture_diff_map(const RgbImage& x, const RgbImage& y, const MetricConfig& cfg);

/// Pixelwise max of the two maps after each is divided by its own maximum.
/// All-zero inputs stay zero.
GrayImage overlay_map(const GrayImage& texture, const DeltaEMap& color);

/// Divides by the maximum; an all-zero map is returned unchanged.
GrayImage normalize_by_max(GrayImage map);

// {"emd", "ok", "edok", "edoks", "alpha", "p", "c", "scales", "orientations",
//  "k_x", "k_y"} - key names are stable.
nlohmann::json report_to_json(const MetricReport& report, const MetricConfig& cfg);

}  // namespace edoks
