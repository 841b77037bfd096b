#include "edoks/metric.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "edoks/emd.hpp"
#include "edoks/errors.hpp"

namespace edoks {
namespace {

constexpr double kTextureNoiseFloor = 1e-9;

void require_same_shape(const RgbImage& x, const RgbImage& y) {
  if (x.empty() || y.empty()) throw InvalidInput("cannot compare an empty image");
  if (!x.same_shape(y)) {
    throw DimensionMismatch("image sizes differ: " + std::to_string(x.width) + "x" +
                            std::to_string(x.height) + " vs " + std::to_string(y.width) + "x" +
                            std::to_string(y.height));
  }
}

GaborDictionary dictionary_for(const MetricConfig& cfg, std::size_t patch_size) {
  return cap_kernels(build_dictionary(cfg.scales, cfg.orientations, cfg.sigma_factor), patch_size);
}

}  // namespace

void MetricConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("c must be a positive finite constant");
  if (patch_size < 3) {
    throw ConfigError("patch size must be at least 3 pixels, got " + std::to_string(patch_size));
  }
  if (jobs == 0) throw ConfigError("jobs must be at least 1");
  if (!(clustering.spawn_ratio > 0.0) || clustering.min_split_distance < 0.0 ||
      clustering.max_iterations < 1) {
    throw ConfigError("invalid clustering options");
  }
  try {
    build_dictionary(scales, orientations, sigma_factor);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

std::size_t effective_patch_size(const MetricConfig& cfg, std::size_t width, std::size_t height) {
  return std::min({cfg.patch_size, width, height});
}

double combine_edok(double alpha, double emd_value, double ok_value) {
  return alpha * emd_value + (1.0 - alpha) * ok_value;
}

double edoks_from_edok(double edok_value, double c) { return 1.0 / (edok_value + c); }

TermScores term_scores(const RgbImage& x, const RgbImage& y, const MetricConfig& cfg) {
  cfg.validate();
  require_same_shape(x, y);
  const std::size_t p = effective_patch_size(cfg, x.width, x.height);
  if (p < 3) throw InvalidInput("images are too small for the filter bank (need >= 3x3)");
  const GaborDictionary dictionary = dictionary_for(cfg, p);

  auto color_term = [&] { return ok_term(rgb_to_oklab(x), rgb_to_oklab(y)); };
  auto texture_term = [&] {
    const Signature sx = extract_signature(x, p, dictionary, cfg.clustering, cfg.jobs);
    const Signature sy = extract_signature(y, p, dictionary, cfg.clustering, cfg.jobs);
    return std::tuple{emd(sx, sy).value, sx.size(), sy.size()};
  };

  TermScores scores;
  scores.patch_size = p;
  if (cfg.jobs > 1) {
    auto color = std::async(std::launch::async, color_term);
    std::tie(scores.emd, scores.clusters_x, scores.clusters_y) = texture_term();
    scores.ok = color.get();
  } else {
    std::tie(scores.emd, scores.clusters_x, scores.clusters_y) = texture_term();
    scores.ok = color_term();
  }
  return scores;
}

double edok(const RgbImage& x, const RgbImage& y, const MetricConfig& cfg) {
  const TermScores t = term_scores(x, y, cfg);
  return combine_edok(cfg.alpha, t.emd, t.ok);
}

MetricReport edoks(const RgbImage& x, const RgbImage& y, const MetricConfig& cfg, bool with_maps) {
  const TermScores t = term_scores(x, y, cfg);
  MetricReport r;
  r.emd_value = t.emd;
  r.ok_value = t.ok;
  r.edok_value = combine_edok(cfg.alpha, t.emd, t.ok);
  r.edoks_value = edoks_from_edok(r.edok_value, cfg.c);
  r.alpha = cfg.alpha;
  r.c = cfg.c;
  r.patch_size = t.patch_size;
  r.clusters_x = t.clusters_x;
  r.clusters_y = t.clusters_y;
  if (t.patch_size < cfg.patch_size) {
    r.warnings.push_back("patch size " + std::to_string(cfg.patch_size) + " clamped to " +
                         std::to_string(t.patch_size) + " to fit a " + std::to_string(x.width) +
                         "x" + std::to_string(x.height) + " image");
  }
  if (with_maps) {
    ExplanationMaps maps;
    maps.texture_diff = texture_diff_map(x, y, cfg);
    maps.color_diff = delta_e_map(rgb_to_oklab(x), rgb_to_oklab(y));
    maps.overlay = overlay_map(maps.texture_diff, maps.color_diff);
    r.maps = std::move(maps);
  }
  return r;
}

GrayImage normalize_by_max(GrayImage map) {
  const double peak = map.data.empty() ? 0.0 : *std::max_element(map.data.begin(), map.data.end());
  if (peak > 0.0) {
    for (auto& v : map.data) v /= peak;
  }
  return map;
}

GrayImage texture_diff_map(const RgbImage& x, const RgbImage& y, const MetricConfig& cfg) {
  cfg.validate();
  require_same_shape(x, y);
  const std::size_t p = effective_patch_size(cfg, x.width, x.height);
  if (p < 3) throw InvalidInput("images are too small for the filter bank (need >= 3x3)");
  const FilterBank bank(dictionary_for(cfg, p), x.width, x.height);
  const Spectrum sx = bank.transform(to_luminance(x));
  const Spectrum sy = bank.transform(to_luminance(y));

  GrayImage diff(x.width, x.height, 0.0);
  const std::size_t filters = bank.dictionary().size();
  for (std::size_t f = 0; f < filters; ++f) {
    const GrayImage mx = bank.magnitude(sx, f);
    const GrayImage my = bank.magnitude(sy, f);
    for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] += std::abs(mx.data[i] - my.data[i]);
  }
  for (auto& v : diff.data) v /= static_cast<double>(filters);
  // Differences at FFT round-off level (e.g. two flat images) are not texture.
  const double peak = *std::max_element(diff.data.begin(), diff.data.end());
  if (peak < kTextureNoiseFloor) std::fill(diff.data.begin(), diff.data.end(), 0.0);
  return normalize_by_max(std::move(diff));
}

GrayImage overlay_map(const GrayImage& texture, const DeltaEMap& color) {
  if (!texture.same_shape(color)) throw DimensionMismatch("overlay_map: map sizes differ");
  const GrayImage t = normalize_by_max(texture);
  const GrayImage c = normalize_by_max(color);
  GrayImage out(t.width, t.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = std::max(t.data[i], c.data[i]);
  return out;
}

nlohmann::json report_to_json(const MetricReport& report, const MetricConfig& cfg) {
  return {{"emd", report.emd_value},
          {"ok", report.ok_value},
          {"edok", report.edok_value},
          {"edoks", report.edoks_value},
          {"alpha", report.alpha},
          {"p", report.patch_size},
          {"c", report.c},
          {"scales", cfg.scales},
          {"orientations", cfg.orientations},
          {"k_x", report.clusters_x},
          {"k_y", report.clusters_y}};
}

}  // namespace edoks
