// Wall-clock timing of one comparison at several image sizes. Informational
// only; nothing here is asserted.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <random>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "edoks/metric.hpp"

namespace {

edoks::RgbImage random_image(std::size_t w, std::size_t h, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  edoks::RgbImage img(w, h);
  for (auto& px : img.data) {
    px = {static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng)),
          static_cast<std::uint8_t>(d(rng))};
  }
  return img;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time edoks comparisons on random RGB images"};
  std::vector<std::size_t> sizes{256, 512, 1024};
  std::size_t repeats = 3;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::size_t patch = 128;
  app.add_option("--sizes", sizes, "square image sides")->delimiter(',');
  app.add_option("--repeats", repeats, "runs per size (median reported)")->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs, "threads per comparison")->check(CLI::PositiveNumber);
  app.add_option("-p,--patch-size", patch, "patch side");
  CLI11_PARSE(app, argc, argv);

  edoks::MetricConfig cfg;
  cfg.patch_size = patch;
  cfg.jobs = jobs;
  cfg.validate();

  std::cout << "size,jobs,median_seconds\n";
  for (std::size_t side : sizes) {
    const auto x = random_image(side, side, 1);
    const auto y = random_image(side, side, 2);
    std::vector<double> secs;
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      (void)edoks::edoks(x, y, cfg);
      secs.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(secs.begin(), secs.end());
    std::cout << side << ',' << jobs << ',' << secs[secs.size() / 2] << '\n';
  }
  return 0;
}
