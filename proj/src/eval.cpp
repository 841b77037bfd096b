#include "edoks/eval.hpp"

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <string>

#include "edoks/errors.hpp"
#include "edoks/parallel.hpp"

namespace edoks {
namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidInput(std::string(what) + ": inputs differ in length (" + std::to_string(a) +
                       " vs " + std::to_string(b) + ")");
  }
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

struct FitProblem {
  std::span<const double> x;  // standardized scores
  std::span<const double> y;
};

double sse(const std::array<double, 5>& beta, const FitProblem& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    const double r = logistic5(beta, p.x[i]) - p.y[i];
    s += r * r;
  }
  return s;
}

double gsl_objective(const gsl_vector* v, void* params) {
  std::array<double, 5> beta{};
  for (std::size_t k = 0; k < 5; ++k) beta[k] = gsl_vector_get(v, k);
  const double s = sse(beta, *static_cast<const FitProblem*>(params));
  return std::isfinite(s) ? s : GSL_POSINF;
}

struct GslVectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct GslMinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

std::array<double, 5> nelder_mead(const FitProblem& problem, std::array<double, 5> start,
                                  const std::array<double, 5>& step) {
  gsl_multimin_function fn{&gsl_objective, 5, const_cast<FitProblem*>(&problem)};
  std::unique_ptr<gsl_vector, GslVectorDeleter> x(gsl_vector_alloc(5));
  std::unique_ptr<gsl_vector, GslVectorDeleter> ss(gsl_vector_alloc(5));
  for (std::size_t k = 0; k < 5; ++k) {
    gsl_vector_set(x.get(), k, start[k]);
    gsl_vector_set(ss.get(), k, step[k]);
  }
  std::unique_ptr<gsl_multimin_fminimizer, GslMinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 5));
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), ss.get());
  for (int iter = 0; iter < 20000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), 1e-12) == GSL_SUCCESS) break;
  }
  for (std::size_t k = 0; k < 5; ++k) start[k] = gsl_vector_get(m->x, k);
  return start;
}

}  // namespace

Scorer edoks_scorer(const MetricConfig& cfg) {
  cfg.validate();
  return [cfg](const RgbImage& ref, const RgbImage& distorted) {
    return edoks(ref, distorted, cfg).edoks_value;
  };
}

MosRecord mos_record(int votes_same, int judges, double metric_score) {
  if (judges < 1) throw InvalidInput("judge count must be positive");
  if (votes_same < 0 || votes_same > judges) {
    throw InvalidInput("votes_same " + std::to_string(votes_same) + " outside [0, " +
                       std::to_string(judges) + "]");
  }
  return {static_cast<double>(votes_same) / static_cast<double>(judges), metric_score};
}

double twoafc_credit(double score_p0, double score_p1, double human_choice) {
  if (score_p1 > score_p0) return human_choice;
  if (score_p0 > score_p1) return 1.0 - human_choice;
  return 0.5;
}

double twoafc_accuracy(std::span<const TripletScores> triplets) {
  if (triplets.empty()) throw InvalidInput("2AFC accuracy needs at least one triplet");
  double total = 0.0;
  for (const auto& t : triplets) {
    if (!(t.human_choice >= 0.0 && t.human_choice <= 1.0)) {
      throw InvalidInput("human choice must lie in [0, 1]");
    }
    total += twoafc_credit(t.score_p0, t.score_p1, t.human_choice);
  }
  return total / static_cast<double>(triplets.size());
}

double twoafc_accuracy(std::span<const TripletSample> samples, const Scorer& metric) {
  std::vector<TripletScores> scored;
  scored.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.ref.same_shape(s.p0) || !s.ref.same_shape(s.p1)) {
      throw DimensionMismatch("triplet images differ in size");
    }
    scored.push_back({metric(s.ref, s.p0), metric(s.ref, s.p1), s.human_choice});
  }
  return twoafc_accuracy(scored);
}

GroupMeans jnd_group_means(std::span<const JndScore> scores) {
  GroupMeans g;
  double same_sum = 0.0;
  double not_same_sum = 0.0;
  for (const auto& s : scores) {
    mos_record(s.votes_same, s.judges, s.score);
    if (s.votes_same == s.judges) {
      same_sum += s.score;
      ++g.same_count;
    } else if (s.votes_same == 0) {
      not_same_sum += s.score;
      ++g.not_same_count;
    }
  }
  if (g.same_count == 0) throw InvalidInput("no unanimous 'same' pairs to average");
  if (g.not_same_count == 0) throw InvalidInput("no unanimous 'not same' pairs to average");
  g.same = same_sum / static_cast<double>(g.same_count);
  g.not_same = not_same_sum / static_cast<double>(g.not_same_count);
  return g;
}

GroupMeans jnd_group_means(std::span<const JndSample> samples, const Scorer& metric) {
  std::vector<JndScore> scored;
  scored.reserve(samples.size());
  for (const auto& s : samples) scored.push_back({metric(s.ref, s.distorted), s.votes_same, s.judges});
  return jnd_group_means(scored);
}

double logistic5(const std::array<double, 5>& b, double x) {
  return b[0] * (0.5 - 1.0 / (1.0 + std::exp(b[1] * (x - b[2])))) + b[3] * x + b[4];
}

double LogisticFit::operator()(double x) const { return logistic5(beta, x); }

LogisticFit fit_logistic(std::span<const double> scores, std::span<const double> mos) {
  require_same_length(scores.size(), mos.size(), "fit_logistic");
  if (scores.size() < 5) throw InvalidInput("fit_logistic needs at least 5 points");

  const double mu = mean(scores);
  double var = 0.0;
  for (double s : scores) var += (s - mu) * (s - mu);
  const double sd = std::sqrt(var / static_cast<double>(scores.size()));
  const double mos_mean = mean(mos);

  LogisticFit fit;
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    fit.beta = {0.0, 0.0, mu, 0.0, mos_mean};
    for (double m : mos) fit.residual += (m - mos_mean) * (m - mos_mean);
    fit.degenerate = true;
    return fit;
  }

  std::vector<double> z(scores.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (scores[i] - mu) / sd;
  const FitProblem problem{z, mos};

  const auto [lo, hi] = std::minmax_element(mos.begin(), mos.end());
  const double range = *hi - *lo;
  // Standardized-space image of (range, 1/sd, mean(scores), 0, mean(mos)),
  // with the amplitude signed to follow the data's direction.
  double covariance = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) covariance += z[i] * (mos[i] - mos_mean);
  const double amplitude = covariance < 0.0 ? -range : range;
  const std::array<double, 5> seed{amplitude, 1.0, 0.0, 0.0, mos_mean};
  const double unit = range > 0.0 ? range : 1.0;
  const std::array<double, 5> step{0.5 * unit, 0.5, 0.5, 0.2 * unit, 0.2 * unit};

  std::mt19937 rng(20240611u);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::array<double, 5> best = seed;
  double best_sse = sse(seed, problem);
  for (int start = 0; start < 5; ++start) {
    std::array<double, 5> b = seed;
    if (start > 0) {
      for (std::size_t k = 0; k < 5; ++k) b[k] += step[k] * jitter(rng);
    }
    b = nelder_mead(problem, b, step);
    b = nelder_mead(problem, b, step);
    const double s = sse(b, problem);
    if (s < best_sse) {
      best_sse = s;
      best = b;
    }
  }

  // Map back to raw score units.
  fit.beta = {best[0], best[1] / sd, mu + sd * best[2], best[3] / sd, best[4] - best[3] * mu / sd};
  fit.residual = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double r = fit(scores[i]) - mos[i];
    fit.residual += r * r;
  }
  return fit;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size(), "pearson");
  if (x.size() < 2) return std::nullopt;
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size(), "spearman");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size(), "kendall_tau_b");
  const std::size_t n = x.size();
  long long concordant_minus_discordant = 0;
  long long untied_x = 0;
  long long untied_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int sx = (x[i] > x[j]) - (x[i] < x[j]);
      const int sy = (y[i] > y[j]) - (y[i] < y[j]);
      concordant_minus_discordant += sx * sy;
      untied_x += sx != 0;
      untied_y += sy != 0;
    }
  }
  if (untied_x == 0 || untied_y == 0) return std::nullopt;
  return static_cast<double>(concordant_minus_discordant) /
         std::sqrt(static_cast<double>(untied_x) * static_cast<double>(untied_y));
}

Correlations correlations(std::span<const double> scores, std::span<const double> mos) {
  require_same_length(scores.size(), mos.size(), "correlations");
  if (scores.size() < 3) throw InvalidInput("correlations need at least 3 points");
  Correlations c;
  c.srocc = spearman(scores, mos);
  c.krocc = kendall_tau_b(scores, mos);
  if (scores.size() >= 5) {
    LogisticFit fit = fit_logistic(scores, mos);
    if (!fit.degenerate) {
      std::vector<double> mapped(scores.size());
      std::transform(scores.begin(), scores.end(), mapped.begin(), fit);
      c.plcc = pearson(mapped, mos);
    }
    c.fit = fit;
  }
  if (!c.fit || c.fit->degenerate) c.plcc = pearson(scores, mos);
  return c;
}

std::vector<double> alpha_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw InvalidInput("alpha step must lie in (0, 1]");
  const auto intervals = static_cast<std::size_t>(std::llround(1.0 / step));
  std::vector<double> grid;
  if (std::abs(static_cast<double>(intervals) * step - 1.0) < 1e-9) {
    for (std::size_t i = 0; i <= intervals; ++i) {
      grid.push_back(static_cast<double>(i) / static_cast<double>(intervals));
    }
  } else {
    for (std::size_t i = 0; static_cast<double>(i) * step <= 1.0 + 1e-12; ++i) {
      grid.push_back(std::min(1.0, static_cast<double>(i) * step));
    }
  }
  return grid;
}

std::vector<SweepPoint> alpha_sweep(std::span<const TermScores> terms, std::span<const double> mos,
                                    std::span<const double> alphas, double c) {
  require_same_length(terms.size(), mos.size(), "alpha_sweep");
  if (alphas.empty()) throw InvalidInput("alpha grid is empty");
  std::vector<SweepPoint> curve;
  std::vector<double> scores(terms.size());
  for (double alpha : alphas) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha grid must lie within [0, 1]");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      scores[i] = edoks_from_edok(combine_edok(alpha, terms[i].emd, terms[i].ok), c);
    }
    curve.push_back({alpha, spearman(scores, mos)});
  }
  return curve;
}

std::vector<SweepPoint> alpha_sweep(std::span<const JndSample> samples,
                                    std::span<const double> alphas, const MetricConfig& cfg,
                                    std::size_t jobs) {
  if (alphas.empty()) throw InvalidInput("alpha grid is empty");
  std::vector<TermScores> terms(samples.size());
  std::vector<double> mos(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    mos[i] = mos_record(samples[i].votes_same, samples[i].judges, 0.0).mos;
  }
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    terms[i] = term_scores(samples[i].ref, samples[i].distorted, cfg);
  });
  return alpha_sweep(terms, mos, alphas, cfg.c);
}

}  // namespace edoks
