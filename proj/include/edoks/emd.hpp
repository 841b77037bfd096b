#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "edoks/signature.hpp"

namespace edoks {

using GroundDistanceFn = std::function<double(std::span<const double>, std::span<const double>)>;

/// L1 distance. Throws DimensionMismatch when the lengths differ.
double ground_distance(std::span<const double> u, std::span<const double> v);

struct FlowMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> flows;  // row-major rows x cols
  double total_flow = 0.0;

  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return flows[i * cols + j]; }
};

struct TransportSolution {
  FlowMatrix flow;
  double cost = 0.0;  // sum of cost * flow
  std::size_t pivots = 0;
};

/// Minimum-cost transportation plan moving `supply` onto `demand` with
/// row-major costs (supply.size() x demand.size()). Unequal totals are
/// handled by a zero-cost slack row or column, so the plan ships
/// min(sum supply, sum demand). Transportation simplex: northwest-corner
/// start, Bland's rule for entering and leaving cells.
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> costs);

struct EmdResult {
  double value = 0.0;
  FlowMatrix flow;
};

/// Earth Mover's Distance: optimal cost divided by total flow. The argument
/// order is canonicalized internally, so emd(a, b) and emd(b, a) return the
/// same value bit for bit (flows are transposed accordingly).
EmdResult emd(const Signature& sx, const Signature& sy,
              const GroundDistanceFn& distance = ground_distance);

}  // namespace edoks
