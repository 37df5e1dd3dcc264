#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypflow/cylinder.hpp"
#include "hypflow/group.hpp"
#include "hypflow/stats.hpp"
#include "hypflow/walk.hpp"

namespace hypflow {

// Exceedance curve with a fitted log-slope; grid in Green-metric units.
struct CurveReport {
  std::vector<double> grid;
  std::vector<double> estimates;
  std::vector<double> std_errors;
  std::vector<std::uint64_t> hits;
  std::uint64_t replicas = 0;
  std::uint64_t undecided = 0;
  SlopeFit fit;
  SlopeCI fit_ci;
  std::uint64_t seed = 0;
  std::string label;
};

struct CurveParams {
  int path_length = 200;       // n
  int grid_points = 6;         // thresholds j * log(2q-1), j = 0..grid_points-1
  std::uint64_t replicas = 100000;
  std::uint64_t seed = 1;
  int threads = 0;
  int bootstrap_resamples = 200;
};

// P[ d_G(Y_n, [o, Y_inf)) >= D ]: the ray proxied by the walk continued to
// 3n steps; undecided when the proxy cannot certify the deviation.
CurveReport deviation_curve(const GroupModel& model, const StepDistribution& mu,
                            CurveParams params = {});

// Same curve conditioned (by partitioning) on the limit landing in the
// cylinder; one report per requested cylinder, all from one sample pass.
std::vector<CurveReport> conditional_deviation_curves(
    const GroupModel& model, const StepDistribution& mu,
    const std::vector<Cylinder>& cylinders, CurveParams params = {});

// P[(Y_n, Z_n)_o^G >= D] and P[(Y_n, Z_inf)_o^G >= D] for two independent
// walks; both slopes should sit near -1.
struct PairGromovReport {
  CurveReport at_time_n;
  CurveReport against_limit;
};
PairGromovReport pair_gromov_curve(const GroupModel& model,
                                   const StepDistribution& mu,
                                   CurveParams params = {});

// Fraction of replica pairs whose limit rays share a prefix of each depth;
// compares against the product-measure recursion on trees.
struct NonsingularityReport {
  std::vector<double> match_fraction;  // index k-1: prefixes agree to depth k
  std::vector<double> std_errors;
  std::vector<double> product_exact;   // sum over depth-k cylinders of nu^2
  std::uint64_t replicas = 0;
  std::uint64_t undecided = 0;
  std::uint64_t seed = 0;
};
NonsingularityReport nonsingularity_scan(const GroupModel& model,
                                         const StepDistribution& mu, int depth,
                                         std::uint64_t replicas,
                                         std::uint64_t seed, int threads = 0);

// Per-replica max over 10 <= |z| <= n of d_G(X_z, [X_-n, X_n]) / log |z|.
struct AlmostGeodesicReport {
  int halfwidth = 0;
  double q50 = 0.0, q90 = 0.0, q95 = 0.0, max = 0.0;
  std::uint64_t replicas = 0;
  std::uint64_t seed = 0;
};
AlmostGeodesicReport almost_geodesic_scan(const GroupModel& model,
                                          const StepDistribution& mu,
                                          int halfwidth, std::uint64_t replicas,
                                          std::uint64_t seed, int threads = 0);

// Finite-window increment functionals for the flow averages.
enum class WindowFunctional {
  FirstIncrementIsA,     // 1{ s_1 = a },   expectation mu(a)
  TwoStepNoCancellation,  // 1{ s_1 s_2 reduced }, expectation 1 - mu-collision
};
double functional_expectation(const GroupModel& model, const StepDistribution& mu,
                              WindowFunctional f);

struct BirkhoffReport {
  WindowFunctional functional;
  std::vector<std::uint64_t> horizons;
  std::vector<double> grand_mean;      // mean over replicas of the T-average
  std::vector<double> spread;          // std dev across replicas
  double direct_expectation = 0.0;     // independent estimate
  double direct_se = 0.0;
  std::uint64_t replicas = 0;
  std::uint64_t seed = 0;
};
BirkhoffReport birkhoff_average(const GroupModel& model, const StepDistribution& mu,
                                WindowFunctional f,
                                std::vector<std::uint64_t> horizons,
                                std::uint64_t replicas, std::uint64_t seed,
                                int threads = 0);

// Chi-square independence of the backward/forward first increments after the
// shift at m, repeated; the p-values are tested for uniformity.
struct ShiftIndependenceReport {
  int m = 0;
  std::vector<double> pvalues;
  KsResult ks;
  std::vector<double> backward_marginal;  // frequency per letter
  std::uint64_t walks_per_repeat = 0;
  std::uint64_t seed = 0;
};
ShiftIndependenceReport shift_independence_test(const GroupModel& model,
                                                const StepDistribution& mu, int m,
                                                int repeats,
                                                std::uint64_t walks_per_repeat,
                                                std::uint64_t seed,
                                                int threads = 0);

// Fraction of bi-windows certified inside / outside the first-closest-
// approach domain.
struct DomainFractionReport {
  double yes_fraction = 0.0;
  double yes_se = 0.0;
  double no_fraction = 0.0;
  double undecided_fraction = 0.0;
  std::uint64_t replicas = 0;
  std::uint64_t seed = 0;
};
DomainFractionReport domain_fraction(const GroupModel& model,
                                     const StepDistribution& mu,
                                     const Word& origin, int halfwidth,
                                     std::uint64_t replicas, std::uint64_t seed,
                                     int threads = 0);

}  // namespace hypflow
