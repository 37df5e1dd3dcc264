#include "hypflow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hypflow/parallel.hpp"
#include "hypflow/stats.hpp"

namespace hypflow {

namespace {

bool is_prefix(const Word& p, const Word& w) {
  return p.length() <= w.length() &&
         GroupModel::common_prefix(p, w) == p.length();
}

void require_tree(const GroupModel& model) {
  if (!model.is_tree()) {
    throw std::invalid_argument(
        "measure constructions ship in exact mode on tree models only");
  }
}

void require_srw(const GroupModel& model, const StepDistribution& mu) {
  if (!exact_tree_available(model, mu)) {
    throw std::invalid_argument(
        "measure estimators require the simple random walk on a free group");
  }
}

}  // namespace

double hbms_mass(const GroupModel& model, const Rectangle& rect) {
  require_tree(model);
  validate_rectangle(model, rect);
  const double scale = tree_green_scale(model);
  const auto fwd = to_cylinders(model, rect.fwd);
  const auto bwd = to_cylinders(model, rect.bwd);
  double total = 0.0;
  for (const Cylinder& a : fwd) {
    const double nu_a = harmonic_exact(model, BranchSet::cyl(a.root), Word{});
    for (const Cylinder& b : bwd) {
      const int cp = GroupModel::common_prefix(a.root, b.root);
      const double nu_b = harmonic_exact(model, BranchSet::cyl(b.root), Word{});
      total += std::exp(2.0 * scale * cp) * nu_a * nu_b;
    }
  }
  return total;
}

Theta1Result theta1_density(const GroupModel& model, const Rectangle& rect,
                            int cesaro_depth) {
  require_tree(model);
  validate_rectangle(model, rect);
  if (rect.fwd.parts.size() != 1 || rect.bwd.parts.size() != 1 ||
      rect.fwd.parts[0].type != BranchSet::Type::Cyl ||
      rect.bwd.parts[0].type != BranchSet::Type::Cyl) {
    throw std::invalid_argument("theta1 density takes a plain cylinder pair");
  }
  const Word& r1 = rect.fwd.parts[0].root;
  const Word& r2 = rect.bwd.parts[0].root;
  const int m = GroupModel::common_prefix(r1, r2);
  const double scale = tree_green_scale(model);

  // Density terms along the glued canonical rays: the base point at signed
  // position z sits on the ray toward xi (z >= 0) or eta (z < 0); its
  // density against nu_o x nu_o is e^{2 min(|z|, m)} in green units.
  Theta1Result out;
  out.limit = std::exp(2.0 * scale * m);
  out.trace.reserve(cesaro_depth + 1);
  double sum = 0.0;
  for (int n = 0; n <= cesaro_depth; ++n) {
    if (n == 0) {
      sum += 1.0;  // z = 0: origin term, density 1
    } else {
      sum += 2.0 * std::exp(2.0 * scale * std::min(n, m));
    }
    out.trace.push_back(sum / (2.0 * n + 1.0));
  }
  out.value = out.trace.back();
  return out;
}

namespace {

// One window half: final reduced word plus the escape profile against the
// origin radius r0.
struct HalfScan {
  Word end;
  bool violated_strict = false;
  bool violated_weak = false;
  int end_margin = 0;  // d(X_end, o) - r0
};

enum class EscapeRule { Strict, Weak };

// A violation of the tracked rule settles the replica: the scan stops there.
HalfScan scan_half(const GroupModel& model, const StepDistribution& mu,
                   const Word& origin, int steps, StreamRng& rng,
                   EscapeRule rule) {
  HalfScan h;
  FreeWalker walker(model, origin);
  const int r0 = origin.length();
  for (int t = 0; t < steps; ++t) {
    walker.step(mu.sample(rng));
    const int len = walker.length();
    if (len <= r0) h.violated_strict = true;
    if (len < r0) h.violated_weak = true;
    if (rule == EscapeRule::Strict ? h.violated_strict : h.violated_weak) return h;
  }
  h.end = walker.word();
  h.end_margin = h.end.length() - r0;
  return h;
}

}  // namespace

Theta2Report theta2_mass(const GroupModel& model, const StepDistribution& mu,
                         const Rectangle& rect, Theta2Params params) {
  require_srw(model, mu);
  validate_rectangle(model, rect);
  const int nc = params.cesaro_depth;
  const int n = params.halfwidth > 0
                    ? params.halfwidth
                    : std::max(2 * nc, 6 * membership_margin(model, params.cert_tol));
  if (nc > n / 2) {
    throw std::invalid_argument(
        "cesaro depth must not exceed half the window (fully observed terms)");
  }
  const double scale = tree_green_scale(model);

  struct Accum {
    OnlineStats mass;
    std::uint64_t undecided = 0;
    std::uint64_t members = 0;
    std::uint64_t bound_violations = 0;
    double max_ratio = 0.0;
    void merge(const Accum& o) {
      mass.merge(o.mass);
      undecided += o.undecided;
      members += o.members;
      bound_violations += o.bound_violations;
      max_ratio = std::max(max_ratio, o.max_ratio);
    }
  };

  auto body = [&](std::uint64_t i, Accum& acc) {
    StreamRng rng(params.seed, i);
    StreamRng fwd_rng = rng.substream(1);
    StreamRng bwd_rng = rng.substream(2);
    std::vector<Letter> fwd_inc(n), bwd_inc(n);
    for (int t = 0; t < n; ++t) fwd_inc[t] = mu.sample(fwd_rng);
    for (int t = 0; t < n; ++t) bwd_inc[t] = mu.sample(bwd_rng);

    FreeWalker fw(model, Word{});
    for (Letter s : fwd_inc) fw.step(s);
    const Word ef = fw.word();
    FreeWalker bw(model, Word{});
    for (Letter s : bwd_inc) bw.step(s);
    const Word eb = bw.word();

    const LimitMembership in_f = limit_in(model, rect.fwd, ef, params.cert_tol);
    const LimitMembership in_b = limit_in(model, rect.bwd, eb, params.cert_tol);
    if (in_f.decision == Ternary::Undecided || in_b.decision == Ternary::Undecided) {
      ++acc.undecided;
      acc.mass.add(0.0);
      return;
    }
    if (in_f.decision != Ternary::Yes || in_b.decision != Ternary::Yes) {
      acc.mass.add(0.0);
      return;
    }
    ++acc.members;

    // Cesaro functional: term(z) = exp(2 (xi,eta)_o - 2 (xi,eta)_{x_z}) in
    // green units, the Gromov products read off the window edge words.
    const int d_ends = model.word_distance(ef, eb);
    const int two_gp_o = ef.length() + eb.length() - d_ends;
    const double bound = std::exp(scale * two_gp_o);  // e^{2 (xi,eta)_o}
    double sum = 0.0;
    std::uint64_t violations = 0;
    auto add_term = [&](int d_to_ef, int d_to_eb) {
      const int two_gp_z = d_to_ef + d_to_eb - d_ends;
      if (two_gp_z < 0) ++violations;  // term above the e^{2(xi,eta)} bound
      sum += std::exp(scale * (two_gp_o - two_gp_z));
    };
    {
      FreeWalker w(model, Word{});
      const int tf = w.add_target(ef);
      const int tb = w.add_target(eb);
      add_term(w.distance(tf), w.distance(tb));  // z = 0
      for (int z = 1; z <= nc; ++z) {
        w.step(fwd_inc[z - 1]);
        add_term(w.distance(tf), w.distance(tb));
      }
    }
    {
      FreeWalker w(model, Word{});
      const int tf = w.add_target(ef);
      const int tb = w.add_target(eb);
      for (int z = 1; z <= nc; ++z) {
        w.step(bwd_inc[z - 1]);
        add_term(w.distance(tf), w.distance(tb));
      }
    }
    const double f_hat = sum / (2.0 * nc + 1.0);
    if (f_hat > bound * (1.0 + 1e-12)) ++violations;
    acc.bound_violations += violations;
    acc.max_ratio = std::max(acc.max_ratio, f_hat / bound);
    acc.mass.add(f_hat);
  };

  const auto acc = parallel_accumulate<Accum>(params.windows, body,
                                              resolve_threads(params.threads));
  Theta2Report out;
  out.report.target = "theta2";
  out.report.value = acc.mass.mean();
  out.report.std_error = acc.mass.std_error();
  out.report.samples = acc.mass.n;
  out.report.undecided = acc.undecided;
  out.report.truncation = {0, nc, n,
                           acc.mass.n ? static_cast<double>(acc.undecided) /
                                            static_cast<double>(acc.mass.n)
                                      : 0.0};
  out.report.seed = params.seed;
  out.report.rejection_proxy = true;
  out.bound_violations = acc.bound_violations;
  out.max_f_over_bound = acc.max_ratio;
  return out;
}

namespace {

bool side_feasible(const BoundarySet& set, const Word& g) {
  for (const auto& b : set.parts) {
    if (b.type == BranchSet::Type::Cyl) {
      if (is_prefix(g, b.root) || is_prefix(b.root, g)) return true;
    } else {
      if (!is_prefix(b.root, g)) return true;
    }
  }
  return false;
}

void enumerate_shell(const GroupModel& model, int radius,
                     std::vector<Word>& out) {
  out.clear();
  if (radius == 0) {
    out.push_back(Word{});
    return;
  }
  const auto& alpha = model.alphabet();
  Word w;
  auto rec = [&](auto&& self, int depth) -> void {
    if (depth == radius) {
      out.push_back(w);
      return;
    }
    for (Letter c = 0; c < alpha.size(); ++c) {
      if (!w.letters.empty() && c == alpha.inverse(w.letters.back())) continue;
      w.letters.push_back(c);
      self(self, depth + 1);
      w.letters.pop_back();
    }
  };
  rec(rec, 0);
}

struct OriginAccum {
  BinomialEst est;
  std::uint64_t undecided = 0;
  void merge(const OriginAccum& o) {
    est.merge(o.est);
    undecided += o.undecided;
  }
};

OriginAccum qhat_origin_mc(const GroupModel& model, const StepDistribution& mu,
                           const Rectangle& rect, const Word& g,
                           const QhatParams& params) {
  const double rho = 1.0 / (2.0 * model.free_rank() - 1.0);
  const std::uint64_t origin_salt = WordHash{}(g);
  auto body = [&](std::uint64_t i, OriginAccum& acc) {
    StreamRng rng(params.seed ^ origin_salt, i);
    StreamRng fwd_rng = rng.substream(1);
    StreamRng bwd_rng = rng.substream(2);
    // backward half must stay strictly farther, forward half at least as far
    const HalfScan bwd =
        scan_half(model, mu, g, params.halfwidth, bwd_rng, EscapeRule::Strict);
    if (bwd.violated_strict) {
      acc.est.add(false);
      return;
    }
    const HalfScan fwd =
        scan_half(model, mu, g, params.halfwidth, fwd_rng, EscapeRule::Weak);
    if (fwd.violated_weak) {
      acc.est.add(false);
      return;
    }
    const LimitMembership in_f = limit_in(model, rect.fwd, fwd.end, params.cert_tol);
    const LimitMembership in_b = limit_in(model, rect.bwd, bwd.end, params.cert_tol);
    if (in_f.decision == Ternary::No || in_b.decision == Ternary::No) {
      acc.est.add(false);
      return;
    }
    const double escape_residual =
        std::pow(rho, bwd.end_margin) + std::pow(rho, fwd.end_margin + 1);
    const bool certified = in_f.decision == Ternary::Yes &&
                           in_b.decision == Ternary::Yes &&
                           escape_residual <= params.cert_tol;
    if (!certified) {
      ++acc.undecided;
      acc.est.add(false);
      return;
    }
    acc.est.add(true);
  };
  return parallel_accumulate<OriginAccum>(params.replicas, body,
                                          resolve_threads(params.threads));
}

}  // namespace

bool qhat_origin_feasible(const GroupModel& model, const Rectangle& rect,
                          const Word& g) {
  require_tree(model);
  return side_feasible(rect.fwd, g) && side_feasible(rect.bwd, g);
}

MeasureReport qhat_mass(const GroupModel& model, const StepDistribution& mu,
                        const Rectangle& rect, QhatParams params) {
  require_srw(model, mu);
  validate_rectangle(model, rect);
  int deepest = 0;
  for (const auto& b : rect.fwd.parts) deepest = std::max(deepest, b.root.length());
  for (const auto& b : rect.bwd.parts) deepest = std::max(deepest, b.root.length());
  int overlap = 0;
  for (const auto& a : rect.fwd.parts) {
    for (const auto& b : rect.bwd.parts) {
      overlap = std::max(overlap, GroupModel::common_prefix(a.root, b.root));
    }
  }

  MeasureReport report;
  report.target = "theta3";
  report.seed = params.seed;
  report.dominated_warning = params.origin_radius < overlap;
  report.truncation.cesaro_depth = 0;
  report.truncation.halfwidth = params.halfwidth;

  double variance = 0.0;
  std::vector<Word> shell;
  int quiet_shells = 0;
  int last_radius = 0;
  for (int r = 0; r <= params.origin_radius; ++r) {
    enumerate_shell(model, r, shell);
    double shell_mass = 0.0;
    for (const Word& g : shell) {
      if (!qhat_origin_feasible(model, rect, g)) continue;  // exact zero
      const OriginAccum acc = qhat_origin_mc(model, mu, rect, g, params);
      shell_mass += acc.est.p();
      const double se = acc.est.se();
      variance += se * se;
      report.samples += acc.est.trials;
      report.undecided += acc.undecided;
    }
    report.value += shell_mass;
    report.shell_mass.push_back(shell_mass);
    last_radius = r;
    if (r > deepest &&
        shell_mass < params.shell_epsilon * std::max(report.value, 1e-300)) {
      if (++quiet_shells >= 2) break;
    } else {
      quiet_shells = 0;
    }
  }
  report.std_error = std::sqrt(variance);
  report.truncation.origin_radius = last_radius;
  // Geometric extrapolation of the discarded shells.
  const std::size_t s = report.shell_mass.size();
  double tail = 0.0;
  if (s >= 2 && report.shell_mass[s - 2] > 0.0) {
    const double gamma = report.shell_mass[s - 1] / report.shell_mass[s - 2];
    if (gamma < 1.0) tail = report.shell_mass[s - 1] * gamma / (1.0 - gamma);
    else tail = report.shell_mass[s - 1];
  }
  report.truncation.tail_bound = tail;
  return report;
}

RatioReport g_invariance_check(MeasureTarget target, const GroupModel& model,
                               const StepDistribution& mu, const Word& g,
                               const Rectangle& rect, QhatParams params) {
  validate_rectangle(model, rect);
  const Rectangle moved = translate(model, g, rect);
  RatioReport out;
  if (target == MeasureTarget::Theta1) {
    out.exact = true;
    out.numerator = hbms_mass(model, moved);
    out.denominator = hbms_mass(model, rect);
    out.ratio = out.numerator / out.denominator;
    return out;
  }
  QhatParams moved_params = params;
  moved_params.origin_radius = params.origin_radius + g.length();
  const MeasureReport num = qhat_mass(model, mu, moved, moved_params);
  const MeasureReport den = qhat_mass(model, mu, rect, params);
  out.numerator = num.value;
  out.denominator = den.value;
  out.ratio = den.value > 0.0 ? num.value / den.value : 0.0;
  if (num.value > 0.0 && den.value > 0.0) {
    const double rel = std::sqrt(std::pow(num.std_error / num.value, 2) +
                                 std::pow(den.std_error / den.value, 2));
    out.std_error = out.ratio * rel;
  }
  return out;
}

InterlacementReport interlacement_compare(const GroupModel& model,
                                          const StepDistribution& mu,
                                          const Word& k, std::uint64_t replicas,
                                          std::uint64_t seed, int threads,
                                          int horizon) {
  require_srw(model, mu);
  if (k.is_identity()) throw std::invalid_argument("target must differ from o");
  const double rho = 1.0 / (2.0 * model.free_rank() - 1.0);
  const double scale = tree_green_scale(model);
  const int cert_margin = membership_margin(model, 1e-9);
  const int steps = horizon > 0 ? horizon : 50 * k.length() + 60 * cert_margin;

  InterlacementReport report;
  report.seed = seed;
  report.qstar_exact = 1.0 - rho;

  struct CAccum {
    BinomialEst hit;
    BinomialEst hit_strict;
    BinomialEst hit_weak;
    std::uint64_t undecided = 0;
    void merge(const CAccum& o) {
      hit.merge(o.hit);
      hit_strict.merge(o.hit_strict);
      hit_weak.merge(o.hit_weak);
      undecided += o.undecided;
    }
  };

  for (int j = 0; j <= k.length(); ++j) {
    Word g;
    g.letters.assign(k.letters.begin(), k.letters.begin() + j);
    const int r0 = g.length();
    const std::uint64_t salt = WordHash{}(g);
    auto body = [&](std::uint64_t i, CAccum& acc) {
      StreamRng rng(seed ^ salt, i);
      FreeWalker walker(model, g);
      const int tgt = walker.add_target(k);
      bool hit = walker.distance(tgt) == 0;
      bool strict_ok = true, weak_ok = true;
      for (int t = 0; t < steps; ++t) {
        walker.step(mu.sample(rng));
        const int len = walker.length();
        if (len <= r0) strict_ok = false;
        if (len < r0) weak_ok = false;
        if (walker.distance(tgt) == 0) hit = true;
        // settle once both the hit question and the escape tails are certain
        if (walker.distance(tgt) >= cert_margin + k.length() &&
            (len - r0 >= cert_margin || (!strict_ok && !weak_ok))) {
          break;
        }
      }
      const int margin = walker.length() - r0;
      const bool tails_certified =
          std::pow(rho, margin) <= 1e-9 || (!strict_ok && !weak_ok);
      const bool hit_certified =
          hit || std::pow(rho, walker.distance(tgt)) <= 1e-9;
      if (!tails_certified || !hit_certified) {
        ++acc.undecided;
        acc.hit.add(false);
        acc.hit_strict.add(false);
        acc.hit_weak.add(false);
        return;
      }
      acc.hit.add(hit);
      acc.hit_strict.add(hit && strict_ok);
      acc.hit_weak.add(hit && weak_ok);
    };
    const CAccum acc =
        parallel_accumulate<CAccum>(replicas, body, resolve_threads(threads));

    InterlacementOrigin row;
    row.origin = g;
    row.dist_to_target = k.length() - j;
    row.dist_to_base = j;
    row.hit_prob = acc.hit.p();
    row.hit_se = acc.hit.se();
    row.undecided = acc.undecided;
    if (acc.hit.hits > 0) {
      const double nh = static_cast<double>(acc.hit.hits);
      row.c1 = static_cast<double>(acc.hit_strict.hits) / nh;
      row.c2 = static_cast<double>(acc.hit_weak.hits) / nh;
      row.c1_se = std::sqrt(row.c1 * (1.0 - row.c1) / nh);
      row.c2_se = std::sqrt(row.c2 * (1.0 - row.c2) / nh);
    }
    const int m = row.dist_to_target;
    const double f = std::exp(-scale * m);
    const double weight = 2.0 * f - f * f;
    report.qhat_hit += (row.c1 + row.c2) * weight;
    report.qhat_hit_se += (row.c1_se * row.c1_se + row.c2_se * row.c2_se) *
                          weight * weight;
    report.origins.push_back(std::move(row));
  }
  report.qhat_hit_se = std::sqrt(report.qhat_hit_se);

  // Base-point-free comparison value: the escape probability at k.
  auto body = [&](std::uint64_t i, CAccum& acc) {
    StreamRng rng(seed ^ 0xabcdef12345ULL, i);
    FreeWalker walker(model, k);
    const int tgt = walker.add_target(k);
    bool returned = false;
    for (int t = 0; t < steps; ++t) {
      walker.step(mu.sample(rng));
      if (walker.distance(tgt) == 0) {
        returned = true;
        break;
      }
      if (std::pow(rho, walker.distance(tgt)) <= 1e-9) break;
    }
    acc.hit.add(!returned);
  };
  const CAccum esc =
      parallel_accumulate<CAccum>(replicas, body, resolve_threads(threads));
  report.qstar_hit = esc.hit.p();
  report.qstar_hit_se = esc.hit.se();
  return report;
}

QShiftReport q_shift_invariance(const GroupModel& model, const StepDistribution& mu,
                                const IncrementEvent& event, int z,
                                int ball_radius, std::uint64_t replicas,
                                std::uint64_t seed, int threads) {
  if (event.pattern.empty()) throw std::invalid_argument("empty event pattern");
  const int h = static_cast<int>(event.pattern.size());
  const int lo_need = std::min({event.offset + 1, event.offset + 1 - z, 0});
  const int hi_need = std::max({event.offset + h, event.offset + h - z, 0});
  const int halfwidth = std::max(-lo_need, hi_need) + 1;

  struct Accum {
    BinomialEst base;
    BinomialEst shifted;
    void merge(const Accum& o) {
      base.merge(o.base);
      shifted.merge(o.shifted);
    }
  };
  std::vector<Word> shell;
  Accum total;
  int origins = 0;
  for (int r = 0; r <= ball_radius; ++r) {
    enumerate_shell(model, r, shell);
    for (const Word& g : shell) {
      ++origins;
      const std::uint64_t salt = WordHash{}(g);
      auto body = [&](std::uint64_t i, Accum& acc) {
        StreamRng rng(seed ^ salt, i);
        const BiWindow w = sample_bi_window(model, mu, g, halfwidth, rng);
        auto matches = [&](int shift) {
          for (int p = 0; p < h; ++p) {
            const int idx = event.offset + 1 + p - shift;
            if (idx <= w.lo || idx > w.hi) return false;
            if (w.chain_increment(model, idx) != event.pattern[p]) return false;
          }
          return true;
        };
        acc.base.add(matches(0));
        acc.shifted.add(matches(z));
      };
      const Accum acc =
          parallel_accumulate<Accum>(replicas, body, resolve_threads(threads));
      total.merge(acc);
    }
  }
  QShiftReport out;
  out.origins = origins;
  out.mass = total.base.p();
  out.shifted_mass = total.shifted.p();
  out.ratio = out.shifted_mass > 0.0 ? out.mass / out.shifted_mass : 0.0;
  if (out.mass > 0.0 && out.shifted_mass > 0.0) {
    const double rel = std::sqrt(std::pow(total.base.se() / out.mass, 2) +
                                 std::pow(total.shifted.se() / out.shifted_mass, 2));
    out.std_error = out.ratio * rel;
  }
  return out;
}

}  // namespace hypflow
