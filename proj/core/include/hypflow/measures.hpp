#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypflow/boundary.hpp"
#include "hypflow/cylinder.hpp"
#include "hypflow/green.hpp"
#include "hypflow/group.hpp"
#include "hypflow/walk.hpp"

namespace hypflow {

struct MeasureTruncation {
  int origin_radius = 0;   // R_max actually visited
  int cesaro_depth = 0;
  int halfwidth = 0;
  double tail_bound = 0.0;
};

struct MeasureReport {
  std::string target;
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t undecided = 0;
  MeasureTruncation truncation;
  std::uint64_t seed = 0;
  // theta2 conditions on the rectangle by rejection; noted on every report.
  bool rejection_proxy = false;
  // origin radius below the rectangle overlap depth: dominating terms missing
  bool dominated_warning = false;
  std::vector<double> shell_mass;  // per-radius origin contributions (theta3)
};

// Exact rectangle integral of e^{2 (xi,eta)_o^G} d(nu_o x nu_o) on trees.
// This is the hBMS mass; by the tree computation it is also the Theta_1 mass.
double hbms_mass(const GroupModel& model, const Rectangle& rect);

struct Theta1Result {
  double value = 0.0;         // Cesaro partial at the requested depth
  double limit = 0.0;         // e^{2 (xi,eta)_o^G}, the exact tree limit
  std::vector<double> trace;  // Cesaro partials for N' = 0..N
};

// Density of the ray-averaged measure at the boundary pair given by the two
// cylinder roots' canonical rays. Exact on trees.
Theta1Result theta1_density(const GroupModel& model, const Rectangle& rect,
                            int cesaro_depth);

struct Theta2Params {
  std::uint64_t windows = 100000;
  int cesaro_depth = 25;
  int halfwidth = 0;  // 0: 2 * cesaro_depth (every summand fully observed)
  std::uint64_t seed = 1;
  int threads = 0;
  double cert_tol = 1e-9;
};

struct Theta2Report {
  MeasureReport report;
  std::uint64_t bound_violations = 0;  // per-sample f <= e^{2(xi,eta)} failures
  double max_f_over_bound = 0.0;
};

// Disintegrated mass: mean over bi-windows from o of the Cesaro density
// functional, restricted to windows whose boundary pair lands in the
// rectangle (rejection proxy for the conditional measures).
Theta2Report theta2_mass(const GroupModel& model, const StepDistribution& mu,
                         const Rectangle& rect, Theta2Params params = {});

struct QhatParams {
  int origin_radius = 8;          // shell enumeration bound
  std::uint64_t replicas = 100000;  // per contributing origin
  int halfwidth = 128;
  std::uint64_t seed = 1;
  int threads = 0;
  double cert_tol = 1e-9;
  double shell_epsilon = 1e-4;    // early-termination threshold
};

// Theta_3 on the rectangle: the origin-summed bi-walk measure restricted to
// the first-closest-approach domain, pushed to the double boundary.
MeasureReport qhat_mass(const GroupModel& model, const StepDistribution& mu,
                        const Rectangle& rect, QhatParams params = {});

// Structural support of qhat on trees: origins with a radius-respecting
// route into both sides. Exposed for tests.
bool qhat_origin_feasible(const GroupModel& model, const Rectangle& rect,
                          const Word& g);

enum class MeasureTarget { Theta1, Theta3 };

struct RatioReport {
  double ratio = 0.0;
  double std_error = 0.0;  // 0 for exact mode
  double numerator = 0.0;
  double denominator = 0.0;
  bool exact = false;
};

RatioReport g_invariance_check(MeasureTarget target, const GroupModel& model,
                               const StepDistribution& mu, const Word& g,
                               const Rectangle& rect, QhatParams params = {});

struct InterlacementOrigin {
  Word origin;
  int dist_to_target = 0;   // d(g, k)
  int dist_to_base = 0;     // d(o, g)
  double c1 = 0.0, c1_se = 0.0;
  double c2 = 0.0, c2_se = 0.0;
  double hit_prob = 0.0, hit_se = 0.0;
  std::uint64_t undecided = 0;
};

struct InterlacementReport {
  std::vector<InterlacementOrigin> origins;
  double qhat_hit = 0.0;       // sum over [o,k] of (c1+c2)(2F - F^2), F exact
  double qhat_hit_se = 0.0;
  double qstar_hit = 0.0;      // no-return probability, Monte Carlo
  double qstar_hit_se = 0.0;
  double qstar_exact = 0.0;    // 1 - F(d=1)
  std::uint64_t seed = 0;
};

// Hitting-intensity comparison between the origin-summed bi-walk measure and
// the base-point-free trajectory measure on the tree.
InterlacementReport interlacement_compare(const GroupModel& model,
                                          const StepDistribution& mu,
                                          const Word& k, std::uint64_t replicas,
                                          std::uint64_t seed, int threads = 0,
                                          int horizon = 0);

// An event reading finitely many chain increments s_{offset+1}..s_{offset+n}.
struct IncrementEvent {
  int offset = 0;
  std::vector<Letter> pattern;
};

struct QShiftReport {
  double mass = 0.0;          // per-origin event probability estimate
  double shifted_mass = 0.0;
  double ratio = 0.0;
  double std_error = 0.0;     // of the ratio
  int origins = 0;
};

// Z-shift invariance of the origin-summed measure restricted to a finite
// origin ball: the event mass and its shift-by-z mass should agree.
QShiftReport q_shift_invariance(const GroupModel& model, const StepDistribution& mu,
                                const IncrementEvent& event, int z,
                                int ball_radius, std::uint64_t replicas,
                                std::uint64_t seed, int threads = 0);

}  // namespace hypflow
