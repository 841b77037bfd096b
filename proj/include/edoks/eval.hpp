#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "edoks/metric.hpp"
#include "edoks/raster.hpp"

namespace edoks {

// Similarity scorer: higher means `distorted` is closer to `ref`.
using Scorer = std::function<double(const RgbImage& ref, const RgbImage& distorted)>;

Scorer edoks_scorer(const MetricConfig& cfg);

struct TripletSample {
  RgbImage ref;
  RgbImage p0;
  RgbImage p1;
  double human_choice = 0.5;  // fraction of judges preferring p1
};

struct JndSample {
  RgbImage ref;
  RgbImage distorted;
  int votes_same = 0;
  int judges = 3;
};

struct MosRecord {
  double mos = 0.0;
  double metric_score = 0.0;
};

/// votes_same / judges. Throws InvalidInput unless 0 <= votes_same <= judges, judges >= 1.
MosRecord mos_record(int votes_same, int judges, double metric_score);

// ---- 2AFC ----------------------------------------------------------------

struct TripletScores {
  double score_p0 = 0.0;
  double score_p1 = 0.0;
  double human_choice = 0.5;
};

/// h if the metric prefers p1, 1 - h if it prefers p0, 0.5 on a tie.
double twoafc_credit(double score_p0, double score_p1, double human_choice);

/// Mean credit. Throws InvalidInput on an empty list or h outside [0, 1].
double twoafc_accuracy(std::span<const TripletScores> triplets);
double twoafc_accuracy(std::span<const TripletSample> samples, const Scorer& metric);

// ---- JND -----------------------------------------------------------------

struct JndScore {
  double score = 0.0;
  int votes_same = 0;
  int judges = 3;
};

struct GroupMeans {
  double same = 0.0;      // mean over unanimous "same" pairs
  double not_same = 0.0;  // mean over unanimous "not same" pairs
  std::size_t same_count = 0;
  std::size_t not_same_count = 0;

  [[nodiscard]] double ratio() const { return same / not_same; }
};

/// Means over the unanimous subsets; discordant pairs are excluded.
/// Throws InvalidInput if either subset is empty.
GroupMeans jnd_group_means(std::span<const JndScore> scores);
GroupMeans jnd_group_means(std::span<const JndSample> samples, const Scorer& metric);

// ---- statistics ----------------------------------------------------------

// f(x) = b1 * (1/2 - 1 / (1 + exp(b2 * (x - b3)))) + b4 * x + b5
struct LogisticFit {
  std::array<double, 5> beta{};
  double residual = 0.0;  // sum of squared errors
  bool degenerate = false;

  [[nodiscard]] double operator()(double x) const;
};

double logistic5(const std::array<double, 5>& beta, double x);

/// Least-squares fit of the 5-parameter logistic by Nelder-Mead simplex
/// descent (five seeded starts, each restarted once), run on standardized
/// scores and mapped back. Throws InvalidInput on length mismatch or fewer
/// than 5 points; constant scores give a flagged constant fit.
LogisticFit fit_logistic(std::span<const double> scores, std::span<const double> mos);

/// Pearson correlation; nullopt when either input is constant.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
/// Spearman rho on average ranks (tie-corrected).
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);
/// Kendall tau-b.
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);

struct Correlations {
  std::optional<double> srocc;
  std::optional<double> krocc;
  std::optional<double> plcc;  // after logistic mapping
  std::optional<LogisticFit> fit;
};

/// SROCC and KROCC on raw scores, PLCC between logistic-mapped scores and
/// mos. With fewer than 5 points or a degenerate fit PLCC uses raw scores.
/// Throws InvalidInput for mismatched lengths or fewer than 3 points.
Correlations correlations(std::span<const double> scores, std::span<const double> mos);

// ---- alpha sweep ---------------------------------------------------------

struct SweepPoint {
  double alpha = 0.0;
  std::optional<double> srocc;
};

/// {0, step, 2 step, ..., 1}; throws InvalidInput unless 0 < step <= 1.
std::vector<double> alpha_grid(double step);

/// SROCC of EDOKS against mos per alpha, recombining cached EMD/OK terms.
std::vector<SweepPoint> alpha_sweep(std::span<const TermScores> terms, std::span<const double> mos,
                                    std::span<const double> alphas, double c);
std::vector<SweepPoint> alpha_sweep(std::span<const JndSample> samples,
                                    std::span<const double> alphas, const MetricConfig& cfg,
                                    std::size_t jobs = 1);

}  // namespace edoks
