#include "edoks/signature.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "edoks/color.hpp"
#include "edoks/emd.hpp"
#include "edoks/errors.hpp"
#include "edoks/parallel.hpp"

namespace edoks {
namespace {

double l1(const std::vector<double>& u, const std::vector<double>& v) {
  return ground_distance(u, v);
}

}  // namespace

PatchGrid split_patches(const GrayImage& image, std::size_t patch_size) {
  if (patch_size == 0) throw InvalidInput("patch size must be positive");
  if (image.empty()) throw InvalidInput("split_patches: empty image");
  if (patch_size > std::min(image.width, image.height)) {
    throw InvalidInput("patch size " + std::to_string(patch_size) +
                       " exceeds the smaller image side " +
                       std::to_string(std::min(image.width, image.height)));
  }
  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.columns = image.width / patch_size;
  grid.rows = image.height / patch_size;
  grid.patches.reserve(grid.columns * grid.rows);
  for (std::size_t py = 0; py < grid.rows; ++py) {
    for (std::size_t px = 0; px < grid.columns; ++px) {
      GrayImage patch(patch_size, patch_size);
      for (std::size_t y = 0; y < patch_size; ++y) {
        const double* src = &image.data[(py * patch_size + y) * image.width + px * patch_size];
        std::copy(src, src + patch_size, &patch.data[y * patch_size]);
      }
      grid.patches.push_back(std::move(patch));
    }
  }
  return grid;
}

Signature meng_hee_heng(std::span<const std::vector<double>> energies,
                        const ClusteringOptions& options) {
  const std::size_t count = energies.size();
  if (count == 0) throw InvalidInput("meng_hee_heng: no input vectors");
  const std::size_t dim = energies.front().size();
  for (const auto& e : energies) {
    if (e.size() != dim) throw InvalidInput("meng_hee_heng: vectors differ in length");
  }
  if (options.max_iterations < 1) throw InvalidInput("meng_hee_heng: max_iterations must be >= 1");

  auto mean_of_all = [&] {
    std::vector<double> m(dim, 0.0);
    for (const auto& e : energies)
      for (std::size_t d = 0; d < dim; ++d) m[d] += e[d];
    for (auto& v : m) v /= static_cast<double>(count);
    return Signature{{m}, {1.0}};
  };
  if (count == 1) return Signature{{energies.front()}, {1.0}};

  std::size_t seed_a = 0;
  std::size_t seed_b = 0;
  double widest = -1.0;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      const double d = l1(energies[i], energies[j]);
      if (d > widest) {
        widest = d;
        seed_a = i;
        seed_b = j;
      }
    }
  }
  if (widest <= options.min_split_distance) return mean_of_all();

  std::vector<std::vector<double>> centroids{energies[seed_a], energies[seed_b]};
  std::vector<std::size_t> assignment(count, 0);
  std::vector<std::size_t> previous;
  std::vector<std::size_t> members;

  auto assign = [&] {
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = l1(energies[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assignment[i] = best;
    }
  };

  // Drops empty clusters (keeping order) and recomputes means.
  auto update_means = [&] {
    std::vector<std::size_t> counts(centroids.size(), 0);
    for (auto a : assignment) ++counts[a];
    std::vector<std::size_t> remap(centroids.size(), 0);
    std::size_t kept = 0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      if (counts[c] > 0) remap[c] = kept++;
    }
    for (auto& a : assignment) a = remap[a];
    centroids.assign(kept, std::vector<double>(dim, 0.0));
    members.assign(kept, 0);
    for (std::size_t i = 0; i < count; ++i) {
      auto& c = centroids[assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) c[d] += energies[i][d];
      ++members[assignment[i]];
    }
    for (std::size_t c = 0; c < kept; ++c) {
      for (auto& v : centroids[c]) v /= static_cast<double>(members[c]);
    }
  };

  auto try_spawn = [&] {
    if (centroids.size() >= count) return false;
    std::size_t worst = 0;
    double worst_d = -1.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double d = l1(energies[i], centroids[assignment[i]]);
      if (d > worst_d) {
        worst_d = d;
        worst = i;
      }
    }
    double threshold = 0.0;
    if (centroids.size() >= 2) {
      double sum = 0.0;
      std::size_t pairs = 0;
      for (std::size_t a = 0; a < centroids.size(); ++a) {
        for (std::size_t b = a + 1; b < centroids.size(); ++b) {
          sum += l1(centroids[a], centroids[b]);
          ++pairs;
        }
      }
      threshold = options.spawn_ratio * sum / static_cast<double>(pairs);
    }
    if (worst_d > threshold && worst_d > options.min_split_distance) {
      centroids.push_back(energies[worst]);
      return true;
    }
    return false;
  };

  for (int iter = 0;; ++iter) {
    assign();
    update_means();
    const bool stable = assignment == previous;
    previous = assignment;
    if (iter + 1 >= options.max_iterations) break;
    if (try_spawn()) continue;
    if (stable) break;
  }

  Signature s;
  s.centroids = std::move(centroids);
  for (auto m : members) s.weights.push_back(static_cast<double>(m) / static_cast<double>(count));
  return s;
}

Signature extract_signature(const GrayImage& gray, std::size_t patch_size,
                            const GaborDictionary& dictionary, const ClusteringOptions& options,
                            std::size_t jobs) {
  PatchGrid grid = split_patches(gray, patch_size);
  const FilterBank bank(cap_kernels(dictionary, patch_size), patch_size, patch_size);
  std::vector<std::vector<double>> energies(grid.patches.size());
  parallel_for(grid.patches.size(), jobs,
               [&](std::size_t i) { energies[i] = bank.energy(grid.patches[i]).values; });
  return meng_hee_heng(energies, options);
}

Signature extract_signature(const RgbImage& image, std::size_t patch_size,
                            const GaborDictionary& dictionary, const ClusteringOptions& options,
                            std::size_t jobs) {
  return extract_signature(to_luminance(image), patch_size, dictionary, options, jobs);
}

void validate_signature(const Signature& s, double tolerance) {
  if (s.weights.empty()) throw InvalidInput("signature has no clusters");
  if (s.centroids.size() != s.weights.size()) {
    throw InvalidInput("signature has " + std::to_string(s.centroids.size()) + " centroids but " +
                       std::to_string(s.weights.size()) + " weights");
  }
  const std::size_t dim = s.dimension();
  if (dim == 0) throw InvalidInput("signature centroids are empty");
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.centroids[i].size() != dim) throw InvalidInput("signature centroids differ in length");
    for (double v : s.centroids[i]) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("signature centroid entry is negative or not finite");
    }
    if (!(s.weights[i] > 0.0) || !std::isfinite(s.weights[i])) {
      throw InvalidInput("signature weights must be positive");
    }
    total += s.weights[i];
  }
  if (std::abs(total - 1.0) > tolerance) {
    throw InvalidInput("signature weights sum to " + std::to_string(total) + ", expected 1");
  }
}

nlohmann::json signature_to_json(const Signature& s) {
  return {{"k", s.size()},
          {"dimension", s.dimension()},
          {"centroids", s.centroids},
          {"weights", s.weights}};
}

Signature signature_from_json(const nlohmann::json& j) {
  Signature s;
  try {
    s.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    s.weights = j.at("weights").get<std::vector<double>>();
    if (j.contains("k") && j.at("k").get<std::size_t>() != s.weights.size()) {
      throw InvalidInput("signature record: k does not match the weight count");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("signature record: ") + e.what());
  }
  if (s.centroids.size() != s.weights.size()) {
    throw InvalidInput("signature record: centroid and weight counts differ");
  }
  return s;
}

}  // namespace edoks
