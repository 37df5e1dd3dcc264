#include "hypflow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hypflow/boundary.hpp"
#include "hypflow/green.hpp"
#include "hypflow/parallel.hpp"

namespace hypflow {

namespace {

void require_srw(const GroupModel& model, const StepDistribution& mu) {
  if (!exact_tree_available(model, mu)) {
    throw std::invalid_argument(
        "curve experiments run on the free-group simple random walk");
  }
}

// Shared accumulator: an integer-statistic histogram per bucket, merged in
// index order so parallel runs reproduce bit-for-bit.
struct HistAccum {
  std::vector<std::vector<std::uint64_t>> hist;  // [bucket][value]
  std::vector<std::uint64_t> trials;
  std::uint64_t undecided = 0;

  void ensure(std::size_t buckets, std::size_t values) {
    if (hist.size() < buckets) {
      hist.resize(buckets);
      trials.resize(buckets, 0);
    }
    for (auto& h : hist) {
      if (h.size() < values) h.resize(values, 0);
    }
  }
  void add(std::size_t bucket, int value, std::size_t values_hint) {
    ensure(bucket + 1, std::max<std::size_t>(values_hint, value + 1));
    hist[bucket][value] += 1;
    trials[bucket] += 1;
  }
  void merge(const HistAccum& o) {
    ensure(o.hist.size(), 1);
    for (std::size_t b = 0; b < o.hist.size(); ++b) {
      if (hist[b].size() < o.hist[b].size()) hist[b].resize(o.hist[b].size(), 0);
      for (std::size_t v = 0; v < o.hist[b].size(); ++v) hist[b][v] += o.hist[b][v];
      trials[b] += o.trials[b];
    }
    undecided += o.undecided;
  }
};

CurveReport curve_from_histogram(const GroupModel& model,
                                 const std::vector<std::uint64_t>& hist,
                                 std::uint64_t trials, const CurveParams& params,
                                 std::uint64_t undecided, std::string label) {
  const double scale = tree_green_scale(model);
  CurveReport r;
  r.label = std::move(label);
  r.replicas = trials;
  r.undecided = undecided;
  r.seed = params.seed;
  r.grid.resize(params.grid_points);
  r.hits.assign(params.grid_points, 0);
  std::uint64_t running = 0;
  std::vector<std::uint64_t> tail(hist.size() + 1, 0);
  for (std::size_t v = hist.size(); v-- > 0;) {
    running += hist[v];
    tail[v] = running;
  }
  for (int j = 0; j < params.grid_points; ++j) {
    r.grid[j] = scale * j;
    r.hits[j] = j < static_cast<int>(tail.size()) ? tail[j] : 0;
    const double p = trials ? static_cast<double>(r.hits[j]) / trials : 0.0;
    r.estimates.push_back(p);
    r.std_errors.push_back(
        trials ? std::sqrt(p * (1.0 - p) / static_cast<double>(trials)) : 0.0);
  }
  // Fit excludes thresholds below two grid steps and starved tail points.
  r.fit = fit_log_slope(r.grid, r.hits, trials, 2.0 * scale - 1e-9, 100);
  r.fit_ci = bootstrap_log_slope(hist, r.grid, 2.0 * scale - 1e-9, 100,
                                 params.bootstrap_resamples,
                                 StreamRng(params.seed, 0xb00757));
  return r;
}

}  // namespace

CurveReport deviation_curve(const GroupModel& model, const StepDistribution& mu,
                            CurveParams params) {
  auto curves = conditional_deviation_curves(model, mu, {}, params);
  return std::move(curves.front());
}

std::vector<CurveReport> conditional_deviation_curves(
    const GroupModel& model, const StepDistribution& mu,
    const std::vector<Cylinder>& cylinders, CurveParams params) {
  require_srw(model, mu);
  for (const auto& c : cylinders) {
    validate_cylinder(model, c);
    if (c.root.length() > 3) {
      throw std::invalid_argument("conditioning cylinders of depth <= 3 only");
    }
  }
  const int n = params.path_length;
  const int total_steps = 3 * n;
  const int margin = membership_margin(model, 1e-9);
  const std::size_t buckets = cylinders.empty() ? 1 : cylinders.size() + 1;

  auto body = [&](std::uint64_t i, HistAccum& acc) {
    StreamRng rng(params.seed, i);
    FreeWalker walker(model, Word{});
    std::vector<Letter> inc(total_steps);
    for (int t = 0; t < total_steps; ++t) {
      inc[t] = mu.sample(rng);
      walker.step(inc[t]);
    }
    const Word proxy = walker.word();
    // replay to time n against the proxy ray
    FreeWalker replay(model, Word{});
    const int tgt = replay.add_target(proxy);
    for (int t = 0; t < n; ++t) replay.step(inc[t]);
    const int meet = replay.common_prefix_with(tgt);
    const int deviation = replay.length() - meet;
    // The statistic reads the proxy ray only down to the meet depth; it is
    // reliable once the proxy's tail clears the certification margin.
    if (proxy.length() - meet < margin) {
      ++acc.undecided;
      return;
    }
    std::size_t bucket = 0;
    if (!cylinders.empty()) {
      bucket = cylinders.size();  // no listed cylinder claims the limit
      for (std::size_t c = 0; c < cylinders.size(); ++c) {
        const LimitMembership mem = limit_in(
            model, BoundarySet{{BranchSet::cyl(cylinders[c].root)}}, proxy);
        if (mem.decision == Ternary::Yes) {
          bucket = c;
          break;
        }
        if (mem.decision == Ternary::Undecided) {
          ++acc.undecided;
          return;
        }
      }
    }
    acc.add(bucket, deviation, 64);
  };

  HistAccum acc = parallel_accumulate<HistAccum>(params.replicas, body,
                                                 resolve_threads(params.threads));
  acc.ensure(buckets, 1);
  std::vector<CurveReport> out;
  const std::size_t reported = cylinders.empty() ? 1 : cylinders.size();
  for (std::size_t b = 0; b < reported; ++b) {
    std::string label = cylinders.empty() ? "all" : model.format_word(cylinders[b].root);
    out.push_back(curve_from_histogram(model, acc.hist[b], acc.trials[b], params,
                                       acc.undecided, std::move(label)));
  }
  return out;
}

PairGromovReport pair_gromov_curve(const GroupModel& model,
                                   const StepDistribution& mu,
                                   CurveParams params) {
  require_srw(model, mu);
  const int n = params.path_length;
  const int total_steps = 3 * n;
  const int margin = membership_margin(model, 1e-9);

  struct PairAccum {
    HistAccum hists;  // bucket 0: (Y_n, Z_n); bucket 1: (Y_n, Z_inf proxy)
    void merge(const PairAccum& o) { hists.merge(o.hists); }
  };
  auto body = [&](std::uint64_t i, PairAccum& acc) {
    StreamRng rng(params.seed, i);
    StreamRng rng_y = rng.substream(1);
    StreamRng rng_z = rng.substream(2);
    FreeWalker y(model, Word{});
    std::vector<Letter> inc_y(n);
    for (int t = 0; t < n; ++t) {
      inc_y[t] = mu.sample(rng_y);
      y.step(inc_y[t]);
    }
    const Word yn = y.word();
    FreeWalker z(model, Word{});
    std::vector<Letter> inc_z(total_steps);
    for (int t = 0; t < total_steps; ++t) {
      inc_z[t] = mu.sample(rng_z);
      z.step(inc_z[t]);
    }
    const Word z_proxy = z.word();
    FreeWalker z_replay(model, Word{});
    for (int t = 0; t < n; ++t) z_replay.step(inc_z[t]);
    const Word zn = z_replay.word();

    const int gp_nn = static_cast<int>(
        std::floor(model.gromov_product_word(yn, zn, Word{})));
    const int cp_limit = GroupModel::common_prefix(yn, z_proxy);
    if (z_proxy.length() - cp_limit < margin) {
      ++acc.hists.undecided;
      return;
    }
    acc.hists.add(0, gp_nn, 64);
    acc.hists.add(1, cp_limit, 64);
  };
  PairAccum acc = parallel_accumulate<PairAccum>(params.replicas, body,
                                                 resolve_threads(params.threads));
  acc.hists.ensure(2, 1);
  PairGromovReport out;
  out.at_time_n = curve_from_histogram(model, acc.hists.hist[0], acc.hists.trials[0],
                                       params, acc.hists.undecided, "pair(Y_n,Z_n)");
  out.against_limit =
      curve_from_histogram(model, acc.hists.hist[1], acc.hists.trials[1], params,
                           acc.hists.undecided, "pair(Y_n,Z_inf)");
  return out;
}

NonsingularityReport nonsingularity_scan(const GroupModel& model,
                                         const StepDistribution& mu, int depth,
                                         std::uint64_t replicas,
                                         std::uint64_t seed, int threads) {
  require_srw(model, mu);
  const int margin = membership_margin(model, 1e-9);
  const int steps = 4 * (depth + margin) + 40;

  struct Accum {
    std::vector<BinomialEst> match;
    std::uint64_t undecided = 0;
    void merge(const Accum& o) {
      if (match.size() < o.match.size()) match.resize(o.match.size());
      for (std::size_t i = 0; i < o.match.size(); ++i) match[i].merge(o.match[i]);
      undecided += o.undecided;
    }
  };
  auto body = [&](std::uint64_t i, Accum& acc) {
    if (acc.match.empty()) acc.match.resize(depth);
    StreamRng rng(seed, i);
    StreamRng rng_y = rng.substream(1);
    StreamRng rng_z = rng.substream(2);
    FreeWalker y(model, Word{});
    FreeWalker z(model, Word{});
    for (int t = 0; t < steps; ++t) y.step(mu.sample(rng_y));
    for (int t = 0; t < steps; ++t) z.step(mu.sample(rng_z));
    const Word wy = y.word();
    const Word wz = z.word();
    const int cp = GroupModel::common_prefix(wy, wz);
    // both rays must be certified to the probed depth
    if (wy.length() - std::min(cp, depth) < margin ||
        wz.length() - std::min(cp, depth) < margin) {
      ++acc.undecided;
      return;
    }
    for (int k = 1; k <= depth; ++k) acc.match[k - 1].add(cp >= k);
  };
  Accum acc = parallel_accumulate<Accum>(replicas, body, resolve_threads(threads));
  if (acc.match.empty()) acc.match.resize(depth);

  NonsingularityReport r;
  r.replicas = replicas;
  r.undecided = acc.undecided;
  r.seed = seed;
  const int q2 = 2 * model.free_rank();
  for (int k = 1; k <= depth; ++k) {
    r.match_fraction.push_back(acc.match[k - 1].p());
    r.std_errors.push_back(acc.match[k - 1].se());
    // sum over depth-k cylinders of nu_o(c)^2
    const double words = static_cast<double>(q2) * std::pow(q2 - 1.0, k - 1);
    const double nu = 1.0 / words;
    r.product_exact.push_back(words * nu * nu);
  }
  return r;
}

AlmostGeodesicReport almost_geodesic_scan(const GroupModel& model,
                                          const StepDistribution& mu,
                                          int halfwidth, std::uint64_t replicas,
                                          std::uint64_t seed, int threads) {
  require_srw(model, mu);
  if (halfwidth < 16) throw std::invalid_argument("halfwidth too small");
  const double scale = tree_green_scale(model);

  struct Accum {
    std::vector<double> stats;
    void merge(const Accum& o) {
      stats.insert(stats.end(), o.stats.begin(), o.stats.end());
    }
  };
  auto body = [&](std::uint64_t i, Accum& acc) {
    StreamRng rng(seed, i);
    StreamRng rng_f = rng.substream(1);
    StreamRng rng_b = rng.substream(2);
    std::vector<Letter> inc_f(halfwidth), inc_b(halfwidth);
    FreeWalker f(model, Word{});
    for (int t = 0; t < halfwidth; ++t) {
      inc_f[t] = mu.sample(rng_f);
      f.step(inc_f[t]);
    }
    FreeWalker b(model, Word{});
    for (int t = 0; t < halfwidth; ++t) {
      inc_b[t] = mu.sample(rng_b);
      b.step(inc_b[t]);
    }
    const Word ef = f.word();
    const Word eb = b.word();
    const int d_ends = model.word_distance(ef, eb);
    double worst = 0.0;
    auto scan = [&](const std::vector<Letter>& inc) {
      FreeWalker w(model, Word{});
      const int tf = w.add_target(ef);
      const int tb = w.add_target(eb);
      for (int z = 1; z <= halfwidth; ++z) {
        w.step(inc[z - 1]);
        if (z < 10) continue;
        // distance to the endpoint geodesic = Gromov product at the point
        const double gp = 0.5 * (w.distance(tf) + w.distance(tb) - d_ends);
        worst = std::max(worst, scale * gp / std::log(static_cast<double>(z)));
      }
    };
    scan(inc_f);
    scan(inc_b);
    acc.stats.push_back(worst);
  };
  Accum acc = parallel_accumulate<Accum>(replicas, body, resolve_threads(threads));
  // index-ordered merge keeps the quantiles deterministic
  AlmostGeodesicReport r;
  r.halfwidth = halfwidth;
  r.replicas = replicas;
  r.seed = seed;
  r.q50 = quantile(acc.stats, 0.5);
  r.q90 = quantile(acc.stats, 0.9);
  r.q95 = quantile(acc.stats, 0.95);
  r.max = acc.stats.empty() ? 0.0 : *std::max_element(acc.stats.begin(), acc.stats.end());
  return r;
}

double functional_expectation(const GroupModel& model, const StepDistribution& mu,
                              WindowFunctional f) {
  switch (f) {
    case WindowFunctional::FirstIncrementIsA:
      return mu.weight(0);
    case WindowFunctional::TwoStepNoCancellation: {
      double collide = 0.0;
      for (Letter c = 0; c < model.alphabet().size(); ++c) {
        collide += mu.weight(c) * mu.weight(model.alphabet().inverse(c));
      }
      return 1.0 - collide;
    }
  }
  return 0.0;
}

namespace {

bool eval_functional(const GroupModel& model, WindowFunctional f,
                     const std::vector<Letter>& inc, std::size_t at) {
  switch (f) {
    case WindowFunctional::FirstIncrementIsA:
      return inc[at] == 0;
    case WindowFunctional::TwoStepNoCancellation:
      return inc[at + 1] != model.alphabet().inverse(inc[at]);
  }
  return false;
}

}  // namespace

BirkhoffReport birkhoff_average(const GroupModel& model, const StepDistribution& mu,
                                WindowFunctional f,
                                std::vector<std::uint64_t> horizons,
                                std::uint64_t replicas, std::uint64_t seed,
                                int threads) {
  if (horizons.empty()) throw std::invalid_argument("no horizons");
  std::sort(horizons.begin(), horizons.end());
  const std::uint64_t max_t = horizons.back();
  const std::size_t need = max_t + 2;  // functional window inside the path

  struct Accum {
    std::vector<OnlineStats> avgs;
    void merge(const Accum& o) {
      if (avgs.size() < o.avgs.size()) avgs.resize(o.avgs.size());
      for (std::size_t i = 0; i < o.avgs.size(); ++i) avgs[i].merge(o.avgs[i]);
    }
  };
  auto body = [&](std::uint64_t i, Accum& acc) {
    if (acc.avgs.empty()) acc.avgs.resize(horizons.size());
    StreamRng rng(seed, i);
    std::vector<Letter> inc(need);
    for (auto& s : inc) s = mu.sample(rng);
    double running = 0.0;
    std::size_t next = 0;
    for (std::uint64_t l = 0; l < max_t; ++l) {
      running += eval_functional(model, f, inc, l) ? 1.0 : 0.0;
      if (next < horizons.size() && l + 1 == horizons[next]) {
        acc.avgs[next].add(running / static_cast<double>(l + 1));
        ++next;
      }
    }
  };
  Accum acc = parallel_accumulate<Accum>(replicas, body, resolve_threads(threads));
  if (acc.avgs.empty()) acc.avgs.resize(horizons.size());

  BirkhoffReport r;
  r.functional = f;
  r.horizons = horizons;
  r.replicas = replicas;
  r.seed = seed;
  for (auto& s : acc.avgs) {
    r.grand_mean.push_back(s.mean());
    r.spread.push_back(std::sqrt(s.variance()));
  }
  // Direct estimate of E[f] from an independent stream.
  {
    struct DirectAccum {
      BinomialEst est;
      void merge(const DirectAccum& o) { est.merge(o.est); }
    };
    const std::uint64_t direct_n = std::max<std::uint64_t>(replicas * 16, 100000);
    auto direct_body = [&](std::uint64_t i, DirectAccum& acc2) {
      StreamRng rng(seed ^ 0xd12ec7e57ULL, i);
      std::vector<Letter> inc(2);
      inc[0] = mu.sample(rng);
      inc[1] = mu.sample(rng);
      acc2.est.add(eval_functional(model, f, inc, 0));
    };
    const DirectAccum direct = parallel_accumulate<DirectAccum>(
        direct_n, direct_body, resolve_threads(threads));
    r.direct_expectation = direct.est.p();
    r.direct_se = direct.est.se();
  }
  return r;
}

ShiftIndependenceReport shift_independence_test(const GroupModel& model,
                                                const StepDistribution& mu, int m,
                                                int repeats,
                                                std::uint64_t walks_per_repeat,
                                                std::uint64_t seed, int threads) {
  if (m < 1) throw std::invalid_argument("shift index m must be >= 1");
  const std::size_t a = model.alphabet().size();

  ShiftIndependenceReport r;
  r.m = m;
  r.walks_per_repeat = walks_per_repeat;
  r.seed = seed;

  std::vector<std::uint64_t> marginal(a, 0);
  std::uint64_t marginal_total = 0;

  for (int rep = 0; rep < repeats; ++rep) {
    struct TableAccum {
      std::vector<std::uint64_t> cells;
      void merge(const TableAccum& o) {
        if (cells.size() < o.cells.size()) cells.resize(o.cells.size(), 0);
        for (std::size_t i = 0; i < o.cells.size(); ++i) cells[i] += o.cells[i];
      }
    };
    auto body = [&](std::uint64_t i, TableAccum& acc) {
      if (acc.cells.empty()) acc.cells.resize(a * a, 0);
      StreamRng rng(seed + 0x1000 * (rep + 1), i);
      // only the increments around the split matter for the first-step table
      Letter s_m = 0, s_next = 0;
      for (int t = 1; t <= m + 1; ++t) {
        const Letter s = mu.sample(rng);
        if (t == m) s_m = s;
        if (t == m + 1) s_next = s;
      }
      const Letter backward_first = model.alphabet().inverse(s_m);
      acc.cells[backward_first * a + s_next] += 1;
    };
    TableAccum acc = parallel_accumulate<TableAccum>(walks_per_repeat, body,
                                                     resolve_threads(threads));
    if (acc.cells.empty()) acc.cells.resize(a * a, 0);
    std::vector<std::vector<std::uint64_t>> table(a, std::vector<std::uint64_t>(a));
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t j = 0; j < a; ++j) {
        table[i][j] = acc.cells[i * a + j];
        marginal[i] += table[i][j];
        marginal_total += table[i][j];
      }
    }
    r.pvalues.push_back(chi2_independence(table).pvalue);
  }
  r.ks = ks_uniform(r.pvalues);
  for (std::size_t i = 0; i < a; ++i) {
    r.backward_marginal.push_back(
        marginal_total ? static_cast<double>(marginal[i]) / marginal_total : 0.0);
  }
  return r;
}

DomainFractionReport domain_fraction(const GroupModel& model,
                                     const StepDistribution& mu,
                                     const Word& origin, int halfwidth,
                                     std::uint64_t replicas, std::uint64_t seed,
                                     int threads) {
  struct Accum {
    BinomialEst yes;
    std::uint64_t no = 0;
    std::uint64_t undecided = 0;
    void merge(const Accum& o) {
      yes.merge(o.yes);
      no += o.no;
      undecided += o.undecided;
    }
  };
  auto body = [&](std::uint64_t i, Accum& acc) {
    StreamRng rng(seed, i);
    const BiWindow w = sample_bi_window(model, mu, origin, halfwidth, rng);
    const DomainCheck check = in_fundamental_domain(model, w, Metric::Word);
    acc.yes.add(check.decision == Ternary::Yes);
    if (check.decision == Ternary::No) ++acc.no;
    if (check.decision == Ternary::Undecided) ++acc.undecided;
  };
  Accum acc = parallel_accumulate<Accum>(replicas, body, resolve_threads(threads));
  DomainFractionReport r;
  r.yes_fraction = acc.yes.p();
  r.yes_se = acc.yes.se();
  r.no_fraction = replicas ? static_cast<double>(acc.no) / replicas : 0.0;
  r.undecided_fraction = replicas ? static_cast<double>(acc.undecided) / replicas : 0.0;
  r.replicas = replicas;
  r.seed = seed;
  return r;
}

}  // namespace hypflow
