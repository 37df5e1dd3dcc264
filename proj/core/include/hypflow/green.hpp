#pragma once

#include <cstdint>

#include "hypflow/cylinder.hpp"
#include "hypflow/group.hpp"
#include "hypflow/walk.hpp"

namespace hypflow {

enum class Provenance { ExactTree, MonteCarlo, DpTruncated };
enum class Method { Auto, Exact, MonteCarlo };

struct GreenEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  Provenance provenance = Provenance::ExactTree;
  // One-sided truncation bias bound for the mass beyond the horizon.
  double tail_bound = 0.0;
  bool horizon_warning = false;
  bool infinite = false;   // F estimated as 0 under green_metric
  bool flagged = false;    // precondition fallback (value by convention)
};

struct McParams {
  std::uint64_t replicas = 100000;
  int horizon = 0;  // 0: default 50*d + 200
  std::uint64_t seed = 1;
  int threads = 0;  // 0: HYPFLOW_THREADS or hardware
};

// Probability that the walk from x ever visits y. Exact (2q-1)^{-d} on the
// free-group SRW; Monte Carlo with the reported horizon elsewhere.
GreenEstimate first_passage(const GroupModel& model, const StepDistribution& mu,
                            const Word& x, const Word& y,
                            Method method = Method::Auto, McParams params = {});

// Expected visits to y from x; G(x,y) = F(x,y) G(e,e).
GreenEstimate green_function(const GroupModel& model, const StepDistribution& mu,
                             const Word& x, const Word& y,
                             Method method = Method::Auto, McParams params = {});

// d_G(x,y) = -log F(x,y), in nats.
GreenEstimate green_metric(const GroupModel& model, const StepDistribution& mu,
                           const Word& x, const Word& y,
                           Method method = Method::Auto, McParams params = {});

struct BallSpec {
  Word center;
  double radius = 0.0;
  Metric metric = Metric::Word;
};

bool in_ball(const GroupModel& model, const BallSpec& ball, const Word& v);

// Which interior times are forbidden from the avoided set. The source text
// spells X_2,...,X_{n-1}; excluding X_1 as well matches the first-hitting
// decompositions, so FromOne is the default and FromTwo sits behind a flag.
enum class InteriorTimes { FromOne, FromTwo };

// Restricted Green's function: expected visits to b from a along walks whose
// interior positions stay outside the ball.
GreenEstimate restricted_green(const GroupModel& model, const StepDistribution& mu,
                               const Word& a, const Word& b, const BallSpec& avoid,
                               McParams params = {},
                               InteriorTimes interior = InteriorTimes::FromOne);

// Gromov product in the Green metric: exact on the F_q SRW, otherwise
// composed from three Monte Carlo metric estimates.
GreenEstimate gromov_product_green(const GroupModel& model,
                                   const StepDistribution& mu, const Word& x,
                                   const Word& y, const Word& w,
                                   Method method = Method::Auto,
                                   McParams params = {});

// Boundary Gromov product of two cylinders at the base point o:
// log(2q-1) * |common prefix| on the tree SRW. Throws when nested.
double gromov_product_boundary(const GroupModel& model, const StepDistribution& mu,
                               const Cylinder& xi, const Cylinder& eta);

struct BusemannResult {
  double value = 0.0;      // Green-metric units
  bool stabilized = false;
  double std_error = 0.0;  // 0 in exact mode
  double band = 0.0;       // spread over the sampled tail (Monte Carlo mode)
};

// Busemann function beta_xi(p, q) along the canonical ray of the cylinder.
// Exact on the tree SRW, stabilized once the root is deeper than
// d(o,p) + d(o,q). Elsewhere the max over a sampled ray tail, stabilized
// when the tail spread fits inside 2 delta plus the estimator noise.
BusemannResult busemann(const GroupModel& model, const StepDistribution& mu,
                        const Cylinder& xi, const Word& p, const Word& q,
                        Method method = Method::Auto, McParams params = {});

// d nu_x / d nu_o (xi) = exp(-beta_xi(x, o)).
struct MartinDensity {
  double value = 1.0;
  bool stabilized = false;
  double std_error = 0.0;
};
MartinDensity martin_density(const GroupModel& model, const StepDistribution& mu,
                             const Word& x, const Cylinder& xi,
                             Method method = Method::Auto, McParams params = {});

// F(x,y) / (F(x,v) F(v,y)); exactly 1 on trees when v lies on [x,y].
GreenEstimate ancona_ratio(const GroupModel& model, const StepDistribution& mu,
                           const Word& x, const Word& v, const Word& y,
                           Method method = Method::Auto, McParams params = {});

// Exact tree constants for the simple random walk on F_q.
double tree_first_passage(const GroupModel& model, int distance);
double tree_green_at_identity(const GroupModel& model);

}  // namespace hypflow
