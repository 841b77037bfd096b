#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "edoks/emd.hpp"
#include "edoks/errors.hpp"
#include "support/synthetic.hpp"

using namespace edoks;
namespace synth = edoks::testing;

namespace {

void expect_feasible(const FlowMatrix& f, const Signature& a, const Signature& b) {
  ASSERT_EQ(f.rows, a.size());
  ASSERT_EQ(f.cols, b.size());
  double total = 0.0;
  for (std::size_t i = 0; i < f.rows; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < f.cols; ++j) {
      EXPECT_GE(f.at(i, j), 0.0);
      row += f.at(i, j);
    }
    EXPECT_LE(row, a.weights[i] + 1e-9);
    total += row;
  }
  for (std::size_t j = 0; j < f.cols; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < f.rows; ++i) col += f.at(i, j);
    EXPECT_LE(col, b.weights[j] + 1e-9);
  }
  double ta = 0.0, tb = 0.0;
  for (double w : a.weights) ta += w;
  for (double w : b.weights) tb += w;
  EXPECT_NEAR(total, std::min(ta, tb), 1e-9);
  EXPECT_NEAR(f.total_flow, total, 1e-9);
}

double recompute(const EmdResult& r, const Signature& a, const Signature& b) {
  double work = 0.0, total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      work += ground_distance(a.centroids[i], b.centroids[j]) * r.flow.at(i, j);
      total += r.flow.at(i, j);
    }
  }
  return work / total;
}

}  // namespace

TEST(GroundDistance, Identity) {
  const std::vector<double> u{0.1, 0.2, 0.7};
  EXPECT_EQ(ground_distance(u, u), 0.0);
}

TEST(GroundDistance, UnitVectors) {
  std::vector<double> e1(24, 0.0), e2(24, 0.0);
  e1[0] = 1.0;
  e2[1] = 1.0;
  EXPECT_EQ(ground_distance(e1, e2), 2.0);
}

TEST(GroundDistance, MatchesComponentwiseSum) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(24), b(24);
    double expected = 0.0;
    for (std::size_t i = 0; i < 24; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      expected += std::abs(a[i] - b[i]);
    }
    EXPECT_NEAR(ground_distance(a, b), expected, 1e-12);
  }
}

TEST(GroundDistance, LengthMismatchThrows) {
  EXPECT_THROW(ground_distance(std::vector<double>{1, 2}, std::vector<double>{1}), DimensionMismatch);
}

TEST(Emd, EqualSignaturesAreZeroWithDiagonalFlow) {
  std::mt19937 rng(8);
  for (std::size_t k = 1; k <= 4; ++k) {
    const Signature s = synth::random_signature(rng, k);
    const EmdResult r = emd(s, s);
    EXPECT_LT(r.value, 1e-12);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        EXPECT_NEAR(r.flow.at(i, j), i == j ? s.weights[i] : 0.0, 1e-12);
      }
    }
  }
}

TEST(Emd, SingleClustersGiveGroundDistance) {
  std::mt19937 rng(6);
  const Signature a = synth::random_signature(rng, 1);
  const Signature b = synth::random_signature(rng, 1);
  const EmdResult r = emd(a, b);
  EXPECT_NEAR(r.value, ground_distance(a.centroids[0], b.centroids[0]), 1e-12);
  EXPECT_NEAR(r.flow.at(0, 0), 1.0, 1e-12);
}

// Balanced 2x2: the only free variable is f11 in [0.1, 0.5]; grid search it.
TEST(Emd, TwoByTwoMatchesGridSearch) {
  const Signature a{{{0.0, 0.0}, {1.0, 0.0}}, {0.6, 0.4}};
  const Signature b{{{0.2, 0.1}, {0.9, 0.5}}, {0.5, 0.5}};
  auto d = [&](std::size_t i, std::size_t j) { return ground_distance(a.centroids[i], b.centroids[j]); };
  double best = 1e300;
  for (long step = 0; step <= 400000; ++step) {
    const double f11 = 0.1 + 1e-6 * static_cast<double>(step);
    const double f12 = 0.6 - f11;
    const double f21 = 0.5 - f11;
    const double f22 = 0.4 - f21;
    best = std::min(best, f11 * d(0, 0) + f12 * d(0, 1) + f21 * d(1, 0) + f22 * d(1, 1));
  }
  const EmdResult r = emd(a, b);
  EXPECT_NEAR(r.value, best, 1e-6);
  EXPECT_NEAR(r.value, synth::brute_force_emd(a, b), 1e-12);
}

TEST(Emd, MatchesBruteForceOracle) {
  std::mt19937 rng(20240611);
  std::uniform_int_distribution<std::size_t> k(1, 3);
  for (int t = 0; t < 300; ++t) {
    const Signature a = synth::random_signature(rng, k(rng));
    const Signature b = synth::random_signature(rng, k(rng));
    const EmdResult r = emd(a, b);
    EXPECT_NEAR(r.value, synth::brute_force_emd(a, b), 1e-9);
    expect_feasible(r.flow, a, b);
    EXPECT_NEAR(recompute(r, a, b), r.value, 1e-9);
  }
}

TEST(Emd, RectangularMatchesBruteForce) {
  std::mt19937 rng(77);
  for (int t = 0; t < 40; ++t) {
    const Signature a = synth::random_signature(rng, 2 + t % 2, 6);
    const Signature b = synth::random_signature(rng, 4, 6);
    const EmdResult r = emd(a, b);
    EXPECT_NEAR(r.value, synth::brute_force_emd(a, b), 1e-9);
    expect_feasible(r.flow, a, b);
  }
}

TEST(Emd, UnbalancedShipsMinimumTotal) {
  std::mt19937 rng(31);
  for (int t = 0; t < 100; ++t) {
    Signature a = synth::random_signature(rng, 1 + t % 3);
    Signature b = synth::random_signature(rng, 1 + (t / 3) % 3);
    for (auto& w : (t % 2 ? a : b).weights) w *= 0.6;
    const EmdResult r = emd(a, b);
    expect_feasible(r.flow, a, b);
    EXPECT_NEAR(r.value, synth::brute_force_emd(a, b), 1e-9);
    EXPECT_NEAR(recompute(r, a, b), r.value, 1e-9);
  }
}

TEST(Emd, ExactlySymmetric) {
  std::mt19937 rng(12);
  for (int t = 0; t < 200; ++t) {
    const Signature a = synth::random_signature(rng, 1 + t % 4);
    const Signature b = synth::random_signature(rng, 1 + (t / 4) % 4);
    const EmdResult ab = emd(a, b);
    const EmdResult ba = emd(b, a);
    EXPECT_EQ(ab.value, ba.value);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) EXPECT_EQ(ab.flow.at(i, j), ba.flow.at(j, i));
    }
  }
}

TEST(Emd, TriangleInequality) {
  std::mt19937 rng(13);
  for (int t = 0; t < 200; ++t) {
    const Signature a = synth::random_signature(rng, 1 + t % 4);
    const Signature b = synth::random_signature(rng, 1 + (t / 2) % 4);
    const Signature c = synth::random_signature(rng, 1 + (t / 3) % 4);
    EXPECT_LE(emd(a, c).value, emd(a, b).value + emd(b, c).value + 1e-9);
  }
}

TEST(Emd, BoundedByLargestGroundDistance) {
  std::mt19937 rng(14);
  for (int t = 0; t < 100; ++t) {
    const Signature a = synth::random_signature(rng, 3);
    const Signature b = synth::random_signature(rng, 2);
    double worst = 0.0;
    for (const auto& x : a.centroids)
      for (const auto& y : b.centroids) worst = std::max(worst, ground_distance(x, y));
    EXPECT_LE(emd(a, b).value, worst + 1e-12);
  }
}

TEST(Emd, PluggableGroundDistance) {
  const Signature a{{{0.0, 0.0}}, {1.0}};
  const Signature b{{{3.0, 4.0}}, {1.0}};
  const GroundDistanceFn l2 = [](std::span<const double> u, std::span<const double> v) {
    return std::hypot(u[0] - v[0], u[1] - v[1]);
  };
  EXPECT_DOUBLE_EQ(emd(a, b, l2).value, 5.0);
  EXPECT_DOUBLE_EQ(emd(a, b).value, 7.0);
}

TEST(Emd, DegenerateTiesStillOptimal) {
  // Equal costs everywhere and equal weights produce heavy degeneracy.
  const Signature a{{{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  const Signature b{{{0.5, 0.5}, {0.0, 1.0}, {1.0, 0.0}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  const EmdResult r = emd(a, b);
  EXPECT_NEAR(r.value, synth::brute_force_emd(a, b), 1e-12);
  expect_feasible(r.flow, a, b);
}

TEST(SolveTransport, KnownInstance) {
  // Textbook instance (3 plants, 4 sinks) with known optimum 435.
  const std::vector<double> supply{15, 25, 10};
  const std::vector<double> demand{5, 15, 15, 15};
  const std::vector<double> costs{10, 2, 20, 11, 12, 7, 9, 20, 4, 14, 16, 18};
  const TransportSolution s = solve_transport(supply, demand, costs);
  EXPECT_NEAR(s.cost, synth::brute_force_transport(supply, demand, costs), 1e-9);
  EXPECT_NEAR(s.cost, 435.0, 1e-9);
  EXPECT_NEAR(s.flow.total_flow, 50.0, 1e-9);
}

TEST(SolveTransport, RejectsBadInput) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(solve_transport(one, one, std::vector<double>{1.0, 2.0}), InvalidInput);
  EXPECT_THROW(solve_transport(std::vector<double>{}, one, std::vector<double>{}), InvalidInput);
  EXPECT_THROW(solve_transport(std::vector<double>{-1.0}, one, one), InvalidInput);
}

TEST(Emd, RejectsMismatchedDimensions) {
  const Signature a{{{1.0, 0.0}}, {1.0}};
  const Signature b{{{1.0, 0.0, 0.0}}, {1.0}};
  EXPECT_THROW(emd(a, b), DimensionMismatch);
}
