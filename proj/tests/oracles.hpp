#pragma once

// Test-only oracles, independent of the library's estimator paths.
//
// The distance-to-origin process of the simple random walk on F_q is a birth-
// death chain on {0, 1, 2, ...}: from 0 it steps up with probability 1, from
// k >= 1 it steps up with probability (2q-1)/(2q) and down with 1/(2q).
// Everything here is computed by direct dynamic programming or closed ruin
// formulas over that chain.

#include <cmath>
#include <cstdint>
#include <vector>

#include "hypflow/group.hpp"

namespace oracle {

struct RadialChain {
  int q;  // free rank
  double up() const { return (2.0 * q - 1.0) / (2.0 * q); }
  double down() const { return 1.0 / (2.0 * q); }
  // Ruin probability: ever stepping from k to k-1 (k >= 1).
  double rho() const { return 1.0 / (2.0 * q - 1.0); }
};

// Distribution of the radius after n steps, started at radius r0.
inline std::vector<double> radius_distribution(const RadialChain& c, int r0,
                                               int steps) {
  std::vector<double> p(r0 + steps + 2, 0.0);
  p[r0] = 1.0;
  std::vector<double> next(p.size(), 0.0);
  for (int t = 0; t < steps; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < p.size(); ++r) {
      if (p[r] == 0.0) continue;
      if (r == 0) {
        next[1] += p[0];
      } else {
        next[r + 1] += p[r] * c.up();
        if (r >= 1) next[r - 1] += p[r] * c.down();
      }
    }
    std::swap(p, next);
  }
  return p;
}

// Expected radius after n steps from the identity.
inline double expected_radius(const RadialChain& c, int steps) {
  const auto p = radius_distribution(c, 0, steps);
  double e = 0.0;
  for (std::size_t r = 0; r < p.size(); ++r) e += p[r] * static_cast<double>(r);
  return e;
}

// Joint distribution (survived, radius) where "survived" means the chain
// never reached `floor` during steps 1..n. Entry [r] is the surviving mass
// now at radius r; the complement was absorbed.
inline std::vector<double> surviving_radius_distribution(const RadialChain& c,
                                                         int r0, int floor,
                                                         int steps) {
  std::vector<double> p(r0 + steps + 2, 0.0);
  p[r0] = 1.0;
  std::vector<double> next(p.size(), 0.0);
  for (int t = 0; t < steps; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < p.size(); ++r) {
      if (p[r] == 0.0) continue;
      if (r == 0) {
        if (floor < 1) next[1] += p[0];
      } else {
        next[r + 1] += p[r] * c.up();
        if (static_cast<int>(r) - 1 > floor) {
          next[r - 1] += p[r] * c.down();
        }
        // stepping onto or below the floor absorbs (violation)
      }
    }
    std::swap(p, next);
  }
  return p;
}

// P[the walk from radius r0 never comes back to radius <= floor], the
// infinite-horizon escape probability via the ruin formula.
inline double escape_probability(const RadialChain& c, int r0, int floor) {
  if (floor < r0) {
    // must avoid floor forever: first reach is from floor+1 downward
    return 1.0 - std::pow(c.rho(), r0 - floor);
  }
  if (floor == r0) {
    if (r0 == 0) {
      // forced step up, then never return to 0
      return 1.0 - c.rho();
    }
    // first step must go up, then never come back down to r0
    return c.up() * (1.0 - c.rho());
  }
  return 0.0;
}

// Certified fraction of the first-closest-approach test for windows of
// halfwidth n at a basepoint of radius r0, with the library's residual rule
// rho^{m_b} + rho^{m_f + 1} <= tol. Backward needs strict escape (> r0),
// forward weak escape (>= r0, i.e. never below).
inline double certified_domain_fraction(const RadialChain& c, int r0, int n,
                                        double tol) {
  const auto bwd = surviving_radius_distribution(c, r0, r0, n);
  const auto fwd = surviving_radius_distribution(c, r0, r0 - 1, n);
  const double rho = c.rho();
  double total = 0.0;
  for (std::size_t rb = 0; rb < bwd.size(); ++rb) {
    if (bwd[rb] == 0.0) continue;
    const double res_b = std::pow(rho, static_cast<double>(rb) - r0);
    for (std::size_t rf = 0; rf < fwd.size(); ++rf) {
      if (fwd[rf] == 0.0) continue;
      const double res_f = std::pow(rho, static_cast<double>(rf) - r0 + 1);
      if (res_b + res_f <= tol) total += bwd[rb] * fwd[rf];
    }
  }
  return total;
}

// Naive reduction for the free group: repeated full scans, no stack tricks.
inline hypflow::Word naive_free_reduce(const hypflow::GroupModel& model,
                                       std::vector<hypflow::Letter> letters) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < letters.size(); ++i) {
      if (model.alphabet().inverse(letters[i]) == letters[i + 1]) {
        letters.erase(letters.begin() + i, letters.begin() + i + 2);
        changed = true;
        break;
      }
    }
  }
  return hypflow::Word{std::move(letters)};
}

}  // namespace oracle
