#include "hypflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypflow {

double OnlineStats::variance() const {
  if (n < 2) return 0.0;
  const double m = mean();
  double v = (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
  return v > 0.0 ? v : 0.0;
}

double OnlineStats::std_error() const {
  if (n < 2) return 0.0;
  return std::sqrt(variance() / static_cast<double>(n));
}

double BinomialEst::se() const {
  if (trials == 0) return 0.0;
  const double q = p();
  return std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
}

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 800; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  // Lentz continued fraction for Q(a,x), x >= a+1.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 800; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p domain");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double x, int df) {
  if (df <= 0) throw std::invalid_argument("chi2_sf df");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

Chi2Result chi2_independence(const std::vector<std::vector<std::uint64_t>>& table) {
  Chi2Result r;
  const std::size_t rows = table.size();
  if (rows == 0) return r;
  const std::size_t cols = table[0].size();
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = static_cast<double>(table[i][j]);
      row_sum[i] += v;
      col_sum[j] += v;
      total += v;
    }
  }
  if (total == 0.0) return r;
  r.valid = true;
  double stat = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double expect = row_sum[i] * col_sum[j] / total;
      if (expect < 5.0) r.valid = false;
      if (expect > 0.0) {
        const double d = static_cast<double>(table[i][j]) - expect;
        stat += d * d / expect;
      }
    }
  }
  r.statistic = stat;
  r.df = static_cast<int>((rows - 1) * (cols - 1));
  r.pvalue = r.df > 0 ? chi2_sf(stat, r.df) : 1.0;
  return r;
}

namespace {

// Kolmogorov distribution tail Q(t) = 2 sum (-1)^{j-1} exp(-2 j^2 t^2).
double kolmogorov_q(double t) {
  if (t < 1e-8) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * t * t);
    sum += (j % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_uniform(std::vector<double> samples) {
  KsResult r;
  const std::size_t n = samples.size();
  if (n == 0) return r;
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = samples[i];
    d = std::max(d, std::abs((i + 1.0) / n - u));
    d = std::max(d, std::abs(u - static_cast<double>(i) / n));
  }
  r.statistic = d;
  const double sn = std::sqrt(static_cast<double>(n));
  r.pvalue = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

SlopeFit fit_log_slope(const std::vector<double>& xs,
                       const std::vector<std::uint64_t>& hits,
                       std::uint64_t trials, double x_min,
                       std::uint64_t min_hits) {
  SlopeFit f;
  if (xs.size() != hits.size() || trials == 0) return f;
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  int used = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < x_min || hits[i] < min_hits || hits[i] == trials) continue;
    const double p = static_cast<double>(hits[i]) / trials;
    const double y = std::log(p);
    // var(log p_hat) ~ (1-p)/(N p)
    const double var = (1.0 - p) / (static_cast<double>(trials) * p);
    const double w = 1.0 / var;
    sw += w;
    swx += w * xs[i];
    swy += w * y;
    swxx += w * xs[i] * xs[i];
    swxy += w * xs[i] * y;
    ++used;
  }
  if (used < 2) return f;
  const double det = sw * swxx - swx * swx;
  if (det <= 0.0) return f;
  f.slope = (sw * swxy - swx * swy) / det;
  f.intercept = (swxx * swy - swx * swxy) / det;
  f.slope_se = std::sqrt(sw / det);
  f.points_used = used;
  f.valid = true;
  return f;
}

SlopeCI bootstrap_log_slope(const std::vector<std::uint64_t>& histogram,
                            const std::vector<double>& xs, double x_min,
                            std::uint64_t min_hits, int resamples,
                            StreamRng rng) {
  SlopeCI ci;
  std::uint64_t n = 0;
  for (auto c : histogram) n += c;
  if (n == 0 || histogram.size() < xs.size()) return ci;

  std::vector<double> cdf(histogram.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    acc += static_cast<double>(histogram[i]) / static_cast<double>(n);
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  auto slope_of = [&](const std::vector<std::uint64_t>& h) {
    // exceedance counts: hits[j] = #{stat >= j}
    std::vector<std::uint64_t> tail(xs.size(), 0);
    std::uint64_t running = 0;
    for (std::size_t j = h.size(); j-- > 0;) {
      running += h[j];
      if (j < xs.size()) tail[j] = running;
    }
    return fit_log_slope(xs, tail, n, x_min, min_hits);
  };

  const SlopeFit base = slope_of(histogram);
  ci.slope = base.slope;
  if (!base.valid) return ci;

  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<std::uint64_t> resampled(histogram.size());
  for (int b = 0; b < resamples; ++b) {
    std::fill(resampled.begin(), resampled.end(), 0);
    for (std::uint64_t i = 0; i < n; ++i) {
      resampled[rng.categorical(cdf)]++;
    }
    const SlopeFit f = slope_of(resampled);
    if (f.valid) slopes.push_back(f.slope);
  }
  if (slopes.size() < 8) return ci;
  OnlineStats s;
  for (double v : slopes) s.add(v);
  ci.se = std::sqrt(s.variance());
  ci.lo = quantile(slopes, 0.025);
  ci.hi = quantile(slopes, 0.975);
  ci.resamples = static_cast<int>(slopes.size());
  return ci;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(i);
  return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

}  // namespace hypflow
