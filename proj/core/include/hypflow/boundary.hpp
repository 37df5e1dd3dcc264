#pragma once

#include <cstdint>

#include "hypflow/cylinder.hpp"
#include "hypflow/green.hpp"
#include "hypflow/group.hpp"
#include "hypflow/walk.hpp"

namespace hypflow {

// Exact hitting mass of a branch set for the simple random walk on F_q,
// from an arbitrary basepoint. For v outside the branch of w:
//   nu_v(cyl(w)) = F(v,w) (2q-1)/(2q);
// inside, the complementary mass flows through the parent edge.
double harmonic_exact(const GroupModel& model, const BranchSet& b,
                      const Word& basepoint);
double harmonic_exact(const GroupModel& model, const BoundarySet& s,
                      const Word& basepoint);

// Monte Carlo / exact hitting mass nu_basepoint(set).
GreenEstimate harmonic_measure(const GroupModel& model, const StepDistribution& mu,
                               const BoundarySet& set, const Word& basepoint,
                               Method method = Method::Auto, McParams params = {});

struct Shadow {
  Word viewpoint;
  Word target;
  double thickness = 0.0;  // Green-metric units
};

// The shadow as a finite union of cylinders seen from the viewpoint (trees).
BoundarySet shadow_set(const GroupModel& model, const Shadow& s);
GreenEstimate shadow_mass(const GroupModel& model, const StepDistribution& mu,
                          const Shadow& s, Method method = Method::Auto,
                          McParams params = {});

struct ConformalReport {
  double max_abs_log_dev = 0.0;  // max |log(ratio) + beta|
  int cells_checked = 0;
  int cells_undecided = 0;
};

// Compares nu_x(c)/nu_o(c) against exp(-beta_xi(x,o)) at each cylinder's
// canonical ray (conformal dimension 1).
ConformalReport conformal_density_check(const GroupModel& model,
                                        const StepDistribution& mu, const Word& x,
                                        const std::vector<Cylinder>& family);

// Certified membership of a walk's boundary limit in a branch set, given the
// deepest observed position of that half. On trees the unseen backtrack
// probability is exactly (2q-1)^{-margin}; the decision is Yes/No only when
// that residual falls below cert_tol.
struct LimitMembership {
  Ternary decision = Ternary::Undecided;
  double residual_bound = 1.0;
};
LimitMembership limit_in(const GroupModel& model, const BoundarySet& set,
                         const Word& deep_position, double cert_tol = 1e-9);

// Depth-margin equivalent of cert_tol on this model.
int membership_margin(const GroupModel& model, double cert_tol);

}  // namespace hypflow
