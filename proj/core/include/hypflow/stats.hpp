#pragma once

#include <cstdint>
#include <vector>

#include "hypflow/rng.hpp"

namespace hypflow {

// Welford-free accumulator: (count, sum, sum of squares) merges associatively,
// which is what the replica-sharded estimators rely on.
struct OnlineStats {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sumsq += x * x;
  }
  void merge(const OnlineStats& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double variance() const;
  double std_error() const;
};

// Bernoulli counter with its usual normal-approximation standard error.
struct BinomialEst {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;

  void add(bool hit) {
    hits += hit ? 1 : 0;
    ++trials;
  }
  void merge(const BinomialEst& o) {
    hits += o.hits;
    trials += o.trials;
  }
  double p() const { return trials ? static_cast<double>(hits) / trials : 0.0; }
  double se() const;
};

// Regularized incomplete gamma P(a, x); Q = 1 - P.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-square distribution.
double chi2_sf(double x, int df);

struct Chi2Result {
  double statistic = 0.0;
  int df = 0;
  double pvalue = 1.0;
  bool valid = false;  // false when expected counts are too small
};

// Pearson independence test on a contingency table (rows of equal length).
Chi2Result chi2_independence(const std::vector<std::vector<std::uint64_t>>& table);

// One-sample Kolmogorov-Smirnov test against Uniform(0,1).
struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};
KsResult ks_uniform(std::vector<double> samples);

// Weighted least squares on (x, log p) pairs; weights from binomial variance
// of log p. Points with fewer than `min_hits` hits or x below `x_min` are
// excluded before fitting.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  int points_used = 0;
  bool valid = false;
};
SlopeFit fit_log_slope(const std::vector<double>& xs,
                       const std::vector<std::uint64_t>& hits,
                       std::uint64_t trials, double x_min,
                       std::uint64_t min_hits);

// Replica-level bootstrap of the fitted slope: the integer statistic
// histogram is multinomially resampled, the exceedance curve rebuilt and
// refitted. Returns percentile CI and the bootstrap standard error.
struct SlopeCI {
  double slope = 0.0;
  double se = 0.0;
  double lo = 0.0;  // 2.5%
  double hi = 0.0;  // 97.5%
  int resamples = 0;
};
SlopeCI bootstrap_log_slope(const std::vector<std::uint64_t>& histogram,
                            const std::vector<double>& xs, double x_min,
                            std::uint64_t min_hits, int resamples,
                            StreamRng rng);

double quantile(std::vector<double> values, double q);

}  // namespace hypflow
