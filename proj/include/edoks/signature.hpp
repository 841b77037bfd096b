#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edoks/gabor.hpp"
#include "edoks/raster.hpp"

namespace edoks {

struct PatchGrid {
  std::size_t patch_size = 0;
  std::size_t columns = 0;  // patches per row
  std::size_t rows = 0;     // patches per column
  std::vector<GrayImage> patches;  // row-major over the image
};

/// Non-overlapping p x p tiles; trailing pixels that do not fill a tile are
/// dropped. Throws InvalidInput if p is 0 or exceeds min(width, height).
PatchGrid split_patches(const GrayImage& image, std::size_t patch_size);

// Weighted set of texture centroids. Each centroid is a flattened energy
// matrix (scale-major), each weight the fraction of patches in its cluster.
struct Signature {
  std::vector<std::vector<double>> centroids;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
  [[nodiscard]] std::size_t dimension() const {
    return centroids.empty() ? 0 : centroids.front().size();
  }

  friend bool operator==(const Signature&, const Signature&) = default;
};

struct ClusteringOptions {
  // Spawn a cluster when a point's L1 distance to its centroid exceeds
  // spawn_ratio * (mean pairwise centroid distance).
  double spawn_ratio = 0.5;
  // L1 spread below which points are never split apart.
  double min_split_distance = 0.15;
  int max_iterations = 100;
};

/// Meng-Hee Heng (maximin) clustering under L1 distance. Seeds with the two
/// mutually farthest points, then alternates assignment/mean updates with
/// spawning new clusters from the worst-fitting point. Ties go to the lowest
/// index. Throws InvalidInput for empty input or ragged vectors.
Signature meng_hee_heng(std::span<const std::vector<double>> energies,
                        const ClusteringOptions& options = {});

/// Grayscale (linear luminance) -> split_patches -> patch_energy per patch ->
/// meng_hee_heng. Kernels are capped at the patch side. Patch energies run on
/// up to `jobs` threads; the result does not depend on `jobs`.
Signature extract_signature(const RgbImage& image, std::size_t patch_size,
                            const GaborDictionary& dictionary,
                            const ClusteringOptions& options = {}, std::size_t jobs = 1);

/// Same pipeline on an already-converted grayscale image.
Signature extract_signature(const GrayImage& gray, std::size_t patch_size,
                            const GaborDictionary& dictionary,
                            const ClusteringOptions& options = {}, std::size_t jobs = 1);

/// Throws InvalidInput if the signature breaks its invariants (k >= 1,
/// positive weights summing to 1, equal-length nonnegative centroids).
void validate_signature(const Signature& signature, double tolerance = 1e-9);

// {"k": n, "dimension": d, "centroids": [[...], ...], "weights": [...]}
nlohmann::json signature_to_json(const Signature& signature);
Signature signature_from_json(const nlohmann::json& j);

}  // namespace edoks
