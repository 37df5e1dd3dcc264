#include "hypflow/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hypflow/parallel.hpp"
#include "hypflow/stats.hpp"

namespace hypflow {

namespace {

int default_horizon(int distance) { return 50 * distance + 200; }

// Distance beyond which the remaining hit probability on the tree is below
// 1e-12; walks past it are settled early and the exact residual is booked
// into the tail bound.
int escape_cut(const GroupModel& model, int start_distance) {
  const double scale = tree_green_scale(model);
  return start_distance + static_cast<int>(std::ceil(12.0 * std::log(10.0) / scale)) + 1;
}

struct HitAccum {
  BinomialEst est;
  double residual = 0.0;  // summed certified tail mass of unfinished walks
  std::uint64_t unfinished = 0;
  void merge(const HitAccum& o) {
    est.merge(o.est);
    residual += o.residual;
    unfinished += o.unfinished;
  }
};

GreenEstimate first_passage_mc(const GroupModel& model, const StepDistribution& mu,
                               const Word& x, const Word& y, McParams params) {
  const int d = model.word_distance(x, y);
  const int horizon = params.horizon > 0 ? params.horizon : default_horizon(d);
  const bool tree = model.is_tree();
  const double rho = tree ? 1.0 / (2.0 * model.free_rank() - 1.0) : 0.0;
  const int cut = tree ? escape_cut(model, d) : -1;

  auto body = [&](std::uint64_t i, HitAccum& acc) {
    StreamRng rng(params.seed, i);
    if (tree) {
      FreeWalker walker(model, x);
      const int target = walker.add_target(y);
      bool hit = walker.distance(target) == 0;
      int t = 0;
      while (!hit && t < horizon) {
        walker.step(mu.sample(rng));
        ++t;
        const int dist = walker.distance(target);
        if (dist == 0) {
          hit = true;
        } else if (dist >= cut) {
          acc.residual += std::pow(rho, dist);
          ++acc.unfinished;
          break;
        }
      }
      if (!hit && t >= horizon) {
        const int dist = walker.distance(target);
        if (dist > 0) {
          acc.residual += std::pow(rho, dist);
          ++acc.unfinished;
        }
      }
      acc.est.add(hit);
    } else {
      GenericWalker walker(model, x);
      bool hit = walker.at(y);
      for (int t = 0; !hit && t < horizon; ++t) {
        walker.step(mu.sample(rng));
        hit = walker.at(y);
      }
      if (!hit) {
        acc.residual += 1.0;  // no exact tail bound off trees
        ++acc.unfinished;
      }
      acc.est.add(hit);
    }
  };

  const HitAccum acc = parallel_accumulate<HitAccum>(
      params.replicas, body, resolve_threads(params.threads));
  GreenEstimate est;
  est.value = acc.est.p();
  est.std_error = acc.est.se();
  est.samples = acc.est.trials;
  est.provenance = Provenance::MonteCarlo;
  est.tail_bound = acc.est.trials ? acc.residual / acc.est.trials : 0.0;
  est.horizon_warning = est.tail_bound > std::max(est.std_error, 1e-12);
  return est;
}

}  // namespace

double tree_first_passage(const GroupModel& model, int distance) {
  return std::exp(-tree_green_scale(model) * distance);
}

double tree_green_at_identity(const GroupModel& model) {
  const double q2 = 2.0 * model.free_rank();
  return (q2 - 1.0) / (q2 - 2.0);
}

GreenEstimate first_passage(const GroupModel& model, const StepDistribution& mu,
                            const Word& x, const Word& y, Method method,
                            McParams params) {
  const bool exact_ok = exact_tree_available(model, mu);
  if (method == Method::Exact && !exact_ok) {
    throw std::invalid_argument("exact first passage needs the free-group SRW");
  }
  if (method != Method::MonteCarlo && exact_ok) {
    GreenEstimate est;
    est.value = tree_first_passage(model, model.word_distance(x, y));
    est.samples = 0;
    est.provenance = Provenance::ExactTree;
    return est;
  }
  return first_passage_mc(model, mu, x, y, params);
}

GreenEstimate green_function(const GroupModel& model, const StepDistribution& mu,
                             const Word& x, const Word& y, Method method,
                             McParams params) {
  const bool exact_ok = exact_tree_available(model, mu);
  if (method != Method::MonteCarlo && exact_ok) {
    GreenEstimate est;
    est.value = tree_first_passage(model, model.word_distance(x, y)) *
                tree_green_at_identity(model);
    est.provenance = Provenance::ExactTree;
    return est;
  }
  if (method == Method::Exact) {
    throw std::invalid_argument("exact green function needs the free-group SRW");
  }
  // Direct visit counting: an estimator route independent of F * G(e,e).
  const int d = model.word_distance(x, y);
  const int horizon = params.horizon > 0 ? params.horizon : default_horizon(d);
  const bool tree = model.is_tree();
  const int cut = tree ? escape_cut(model, d) : -1;
  const double gee = tree ? tree_green_at_identity(model) : 1.0;
  const double rho = tree ? 1.0 / (2.0 * model.free_rank() - 1.0) : 0.0;

  struct VisitAccum {
    OnlineStats stats;
    double residual = 0.0;
    void merge(const VisitAccum& o) {
      stats.merge(o.stats);
      residual += o.residual;
    }
  };
  auto body = [&](std::uint64_t i, VisitAccum& acc) {
    StreamRng rng(params.seed, i);
    double visits = 0.0;
    if (tree) {
      FreeWalker walker(model, x);
      const int target = walker.add_target(y);
      if (walker.distance(target) == 0) visits += 1.0;
      for (int t = 0; t < horizon; ++t) {
        walker.step(mu.sample(rng));
        const int dist = walker.distance(target);
        if (dist == 0) visits += 1.0;
        if (dist >= cut) {
          acc.residual += std::pow(rho, dist) * gee;
          break;
        }
      }
    } else {
      GenericWalker walker(model, x);
      if (walker.at(y)) visits += 1.0;
      for (int t = 0; t < horizon; ++t) {
        walker.step(mu.sample(rng));
        if (walker.at(y)) visits += 1.0;
      }
    }
    acc.stats.add(visits);
  };
  const auto acc = parallel_accumulate<VisitAccum>(
      params.replicas, body, resolve_threads(params.threads));
  GreenEstimate est;
  est.value = acc.stats.mean();
  est.std_error = acc.stats.std_error();
  est.samples = acc.stats.n;
  est.provenance = Provenance::MonteCarlo;
  est.tail_bound = acc.stats.n ? acc.residual / acc.stats.n : 0.0;
  est.horizon_warning = est.tail_bound > std::max(est.std_error, 1e-12);
  return est;
}

GreenEstimate green_metric(const GroupModel& model, const StepDistribution& mu,
                           const Word& x, const Word& y, Method method,
                           McParams params) {
  const bool exact_ok = exact_tree_available(model, mu);
  if (method != Method::MonteCarlo && exact_ok) {
    GreenEstimate est;
    est.value = tree_green_scale(model) * model.word_distance(x, y);
    est.provenance = Provenance::ExactTree;
    return est;
  }
  GreenEstimate f = first_passage(model, mu, x, y, method, params);
  GreenEstimate est;
  est.samples = f.samples;
  est.provenance = f.provenance;
  est.tail_bound = f.tail_bound;
  est.horizon_warning = f.horizon_warning;
  if (f.value <= 0.0) {
    est.infinite = true;
    est.value = std::numeric_limits<double>::infinity();
    est.flagged = true;
    return est;
  }
  est.value = -std::log(f.value);
  est.std_error = f.std_error / f.value;
  return est;
}

bool in_ball(const GroupModel& model, const BallSpec& ball, const Word& v) {
  if (ball.radius < 0.0) {
    throw std::invalid_argument("ball radius must be >= 0");
  }
  const int d = model.word_distance(ball.center, v);
  if (ball.metric == Metric::Word) return d <= ball.radius;
  return tree_green_scale(model) * d <= ball.radius;
}

GreenEstimate restricted_green(const GroupModel& model, const StepDistribution& mu,
                               const Word& a, const Word& b, const BallSpec& avoid,
                               McParams params, InteriorTimes interior) {
  if (in_ball(model, avoid, a) || in_ball(model, avoid, b)) {
    GreenEstimate est;
    est.value = 0.0;
    est.flagged = true;
    est.provenance = Provenance::ExactTree;
    return est;
  }
  if (model.is_tree()) {
    // Separation: every a-to-b path in a tree passes the geodesic; if the
    // geodesic meets the ball the restricted mass is exactly zero.
    bool separated = false;
    for (const Word& v : model.geodesic(a, b)) {
      if (in_ball(model, avoid, v)) {
        separated = true;
        break;
      }
    }
    if (separated) {
      GreenEstimate est;
      est.value = 0.0;
      est.provenance = Provenance::ExactTree;
      return est;
    }
  }
  const int d = model.word_distance(a, b);
  const int horizon = params.horizon > 0 ? params.horizon : default_horizon(d);
  const bool tree = model.is_tree();
  const int cut = tree ? escape_cut(model, d + avoid.center.length() + b.length()) : -1;
  const double rho = tree ? 1.0 / (2.0 * model.free_rank() - 1.0) : 0.0;
  const double gee = tree ? tree_green_at_identity(model) : 1.0;
  const int first_checked = interior == InteriorTimes::FromOne ? 1 : 2;

  struct VisitAccum {
    OnlineStats stats;
    double residual = 0.0;
    void merge(const VisitAccum& o) {
      stats.merge(o.stats);
      residual += o.residual;
    }
  };
  auto body = [&](std::uint64_t i, VisitAccum& acc) {
    StreamRng rng(params.seed, i);
    double visits = 0.0;
    if (tree) {
      FreeWalker walker(model, a);
      const int tgt_b = walker.add_target(b);
      const int tgt_c = walker.add_target(avoid.center);
      for (int t = 1; t <= horizon; ++t) {
        walker.step(mu.sample(rng));
        const int db = walker.distance(tgt_b);
        if (db == 0) visits += 1.0;
        if (t >= first_checked) {
          const int dc = walker.distance(tgt_c);
          const bool inside = avoid.metric == Metric::Word
                                  ? dc <= avoid.radius
                                  : tree_green_scale(model) * dc <= avoid.radius;
          if (inside) break;  // all later visits to b are disallowed
        }
        if (db >= cut) {
          acc.residual += std::pow(rho, db) * gee;
          break;
        }
      }
    } else {
      GenericWalker walker(model, a);
      for (int t = 1; t <= horizon; ++t) {
        walker.step(mu.sample(rng));
        if (walker.at(b)) visits += 1.0;
        if (t >= first_checked && in_ball(model, avoid, walker.word())) break;
      }
    }
    acc.stats.add(visits);
  };
  const auto acc = parallel_accumulate<VisitAccum>(
      params.replicas, body, resolve_threads(params.threads));
  GreenEstimate est;
  est.value = acc.stats.mean();
  est.std_error = acc.stats.std_error();
  est.samples = acc.stats.n;
  est.provenance = Provenance::MonteCarlo;
  est.tail_bound = acc.stats.n ? acc.residual / acc.stats.n : 0.0;
  est.horizon_warning = est.tail_bound > std::max(est.std_error, 1e-12);
  return est;
}

GreenEstimate gromov_product_green(const GroupModel& model,
                                   const StepDistribution& mu, const Word& x,
                                   const Word& y, const Word& w, Method method,
                                   McParams params) {
  const bool exact_ok = exact_tree_available(model, mu);
  if (method == Method::Exact && !exact_ok) {
    throw std::invalid_argument("exact green gromov product needs the F_q SRW");
  }
  if (method != Method::MonteCarlo && exact_ok) {
    GreenEstimate est;
    est.value = tree_green_scale(model) * model.gromov_product_word(x, y, w);
    est.provenance = Provenance::ExactTree;
    return est;
  }
  McParams sub = params;
  const GreenEstimate dxw = green_metric(model, mu, x, w, Method::MonteCarlo, sub);
  sub.seed += 0x9e3779b9;
  const GreenEstimate dyw = green_metric(model, mu, y, w, Method::MonteCarlo, sub);
  sub.seed += 0x9e3779b9;
  const GreenEstimate dxy = green_metric(model, mu, x, y, Method::MonteCarlo, sub);
  GreenEstimate est;
  est.provenance = Provenance::MonteCarlo;
  est.samples = dxw.samples;
  if (dxw.infinite || dyw.infinite || dxy.infinite) {
    est.flagged = true;
    est.infinite = true;
    return est;
  }
  est.value = 0.5 * (dxw.value + dyw.value - dxy.value);
  est.std_error = 0.5 * std::sqrt(dxw.std_error * dxw.std_error +
                                  dyw.std_error * dyw.std_error +
                                  dxy.std_error * dxy.std_error);
  return est;
}

double gromov_product_boundary(const GroupModel& model, const StepDistribution& mu,
                               const Cylinder& xi, const Cylinder& eta) {
  validate_cylinder(model, xi);
  validate_cylinder(model, eta);
  if (!exact_tree_available(model, mu)) {
    throw std::invalid_argument("boundary gromov product requires the tree SRW");
  }
  if (roots_nested(xi.root, eta.root)) {
    throw std::invalid_argument("boundary gromov product undefined for nested cylinders");
  }
  return tree_green_scale(model) * GroupModel::common_prefix(xi.root, eta.root);
}

BusemannResult busemann(const GroupModel& model, const StepDistribution& mu,
                        const Cylinder& xi, const Word& p, const Word& q,
                        Method method, McParams params) {
  validate_cylinder(model, xi);
  const bool exact_ok = exact_tree_available(model, mu);
  if (method == Method::Exact && !exact_ok) {
    throw std::invalid_argument("exact busemann needs the F_q SRW");
  }
  BusemannResult r;
  if (method != Method::MonteCarlo && exact_ok) {
    const int need = p.length() + q.length();
    r.stabilized = xi.root.length() > need;
    const Word deep = extend_ray(model, xi.root, need + 2);
    r.value = tree_green_scale(model) *
              (model.word_distance(p, deep) - model.word_distance(q, deep));
    return r;
  }
  if (p == q) {
    r.stabilized = true;
    return r;
  }
  // Max over a short sampled tail of the ray; the limsup and liminf differ
  // by at most 2 delta, which sets the stabilization tolerance.
  const int base_depth = p.length() + q.length() + 1;
  McParams sub = params;
  double lo = 1e300, hi = -1e300, var = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Word tail = extend_ray(model, xi.root, base_depth + k);
    const GreenEstimate dp = green_metric(model, mu, p, tail, Method::MonteCarlo, sub);
    const GreenEstimate dq = green_metric(model, mu, q, tail, Method::MonteCarlo, sub);
    sub.seed += 0x9e3779b9;
    if (dp.infinite || dq.infinite) continue;
    const double beta = dp.value - dq.value;
    lo = std::min(lo, beta);
    hi = std::max(hi, beta);
    var = std::max(var, dp.std_error * dp.std_error + dq.std_error * dq.std_error);
  }
  if (hi < lo) {  // every tail estimate starved
    r.stabilized = false;
    return r;
  }
  r.value = hi;
  r.band = hi - lo;
  r.std_error = std::sqrt(var);
  r.stabilized = r.band <= 2.0 * model.delta() + 3.0 * r.std_error;
  return r;
}

MartinDensity martin_density(const GroupModel& model, const StepDistribution& mu,
                             const Word& x, const Cylinder& xi, Method method,
                             McParams params) {
  const BusemannResult b = busemann(model, mu, xi, x, Word{}, method, params);
  MartinDensity d;
  d.value = std::exp(-b.value);
  d.stabilized = b.stabilized;
  d.std_error = d.value * b.std_error;
  return d;
}

GreenEstimate ancona_ratio(const GroupModel& model, const StepDistribution& mu,
                           const Word& x, const Word& v, const Word& y,
                           Method method, McParams params) {
  const bool exact_ok = exact_tree_available(model, mu);
  if (method != Method::MonteCarlo && exact_ok) {
    GreenEstimate est;
    const double detour = model.word_distance(x, v) + model.word_distance(v, y) -
                          model.word_distance(x, y);
    est.value = std::exp(tree_green_scale(model) * detour);
    est.provenance = Provenance::ExactTree;
    return est;
  }
  if (method == Method::Exact) {
    throw std::invalid_argument("exact ancona ratio needs the free-group SRW");
  }
  McParams sub = params;
  const GreenEstimate fxy = first_passage(model, mu, x, y, Method::MonteCarlo, sub);
  sub.seed = params.seed + 0x9e37;
  const GreenEstimate fxv = first_passage(model, mu, x, v, Method::MonteCarlo, sub);
  sub.seed = params.seed + 0x2c1b;
  const GreenEstimate fvy = first_passage(model, mu, v, y, Method::MonteCarlo, sub);
  GreenEstimate est;
  est.provenance = Provenance::MonteCarlo;
  est.samples = fxy.samples;
  if (fxv.value <= 0.0 || fvy.value <= 0.0 || fxy.value <= 0.0) {
    est.flagged = true;
    return est;
  }
  est.value = fxy.value / (fxv.value * fvy.value);
  const double rel = std::sqrt(std::pow(fxy.std_error / fxy.value, 2) +
                               std::pow(fxv.std_error / fxv.value, 2) +
                               std::pow(fvy.std_error / fvy.value, 2));
  est.std_error = est.value * rel;
  return est;
}

}  // namespace hypflow
