// Acceptance suite: every headline property the laboratory must reproduce,
// one pass/fail line each, desk scale on the F_2 simple random walk.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hypflow/boundary.hpp"
#include "hypflow/experiments.hpp"
#include "hypflow/green.hpp"
#include "hypflow/measures.hpp"
#include "hypflow/parallel.hpp"
#include "hypflow/stats.hpp"

using namespace hypflow;

namespace {

int failures = 0;

void verdict(int index, bool pass, const std::string& name,
             const std::string& detail) {
  std::printf("[%s] %2d. %s  (%s)\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  if (!pass) ++failures;
}

const GroupModel& f2() {
  static const GroupModel m = GroupModel::free_group(2);
  return m;
}
const StepDistribution& srw() {
  static const StepDistribution mu = StepDistribution::uniform(f2());
  return mu;
}
const double kLog3 = std::log(3.0);

Rectangle rect(const char* fwd, const char* bwd) {
  return Rectangle::of_cylinders(f2().parse_word(fwd), f2().parse_word(bwd));
}

struct SuiteEntry {
  Rectangle r;
  int overlap;
};

// Twenty separated rectangles with overlap depths 0..4.
std::vector<SuiteEntry> rectangle_suite() {
  std::vector<SuiteEntry> suite;
  auto add = [&](const char* a, const char* b, int m) {
    suite.push_back({rect(a, b), m});
  };
  add("a", "b", 0);
  add("a", "-b", 0);
  add("b", "-a", 0);
  add("-a", "-b", 0);
  add("a b", "b a", 0);
  add("a -b", "b -a", 0);
  add("-a b", "b b", 0);
  add("a a", "b b", 0);
  add("a b", "a -b", 1);
  add("b a", "b -a", 1);
  add("-a -b", "-a b", 1);
  add("-b a", "-b -a", 1);
  add("a b a", "a b -a", 2);
  add("b a b", "b a -b", 2);
  add("a a b", "a a -b", 2);
  add("-a b a", "-a b -a", 2);
  add("a b a b", "a b a -b", 3);
  add("b a b a", "b a b -a", 3);
  add("a a a b", "a a a -b", 3);
  add("a b a b a", "a b a b -a", 4);
  return suite;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void criterion_1_exact_first_passage() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  McParams mc{1000000, 500, 101, 0};
  for (int d = 1; d <= 5; ++d) {
    const Word y = extend_ray(f2(), Word{{0}}, d - 1);
    const GreenEstimate e =
        first_passage(f2(), srw(), Word{}, y, Method::MonteCarlo, mc);
    const double exact = std::pow(3.0, -d);
    const bool ok = std::abs(e.value - exact) <= 3 * e.std_error;
    pass = pass && ok;
    if (d == 1) detail = "F(1)=" + fmt(e.value);
    mc.seed += 1;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  pass = pass && secs < 60.0;
  verdict(1, pass, "monte carlo first passage matches 3^{-d}, d=1..5, N=1e6",
          detail + ", " + fmt(secs) + "s");
}

void criterion_2_escape_probability() {
  const InterlacementReport r =
      interlacement_compare(f2(), srw(), f2().parse_word("a"), 1000000, 202);
  const bool pass = std::abs(r.qstar_hit - 2.0 / 3.0) <= 3 * r.qstar_hit_se;
  verdict(2, pass, "no-return probability equals 2/3 within 3SE at N=1e6",
          fmt(r.qstar_hit) + " +- " + fmt(r.qstar_hit_se));
}

void criterion_3_deviation_law() {
  bool pass = true;
  std::string detail;
  for (int n : {100, 200, 400}) {
    CurveParams params;
    params.path_length = n;
    params.replicas = 100000;
    params.grid_points = 6;  // grid spans 5 log 3 > 4 green units
    params.seed = 303 + n;
    const CurveReport r = deviation_curve(f2(), srw(), params);
    const bool ok = r.fit.valid && std::abs(r.fit.slope + 1.0) <= 0.15;
    pass = pass && ok;
    detail += (detail.empty() ? "" : ", ") + fmt(r.fit.slope);
  }
  verdict(3, pass, "deviation slope -1 +- 0.15 for n in {100,200,400}", detail);
}

void criterion_4_conditional_uniformity() {
  std::vector<Cylinder> cylinders;
  for (Letter c = 0; c < 4; ++c) cylinders.push_back(Cylinder{Word{{c}}});
  CurveParams params;
  params.path_length = 200;
  params.replicas = 400000;
  params.seed = 404;
  const auto curves = conditional_deviation_curves(f2(), srw(), cylinders, params);
  bool pass = curves.size() == 4;
  double worst = 0.0;
  // family-wise 95% across the six pairs (alpha/6 per pair)
  const double z = 2.64;
  for (std::size_t i = 0; i < curves.size() && pass; ++i) {
    pass = pass && curves[i].fit.valid;
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      const double diff = std::abs(curves[i].fit.slope - curves[j].fit.slope);
      const double se = std::hypot(curves[i].fit_ci.se, curves[j].fit_ci.se);
      worst = std::max(worst, se > 0 ? diff / se : 1e9);
      pass = pass && diff <= z * se;
    }
  }
  verdict(4, pass, "conditional deviation slopes agree across depth-1 cylinders",
          "max |diff|/se = " + fmt(worst));
}

void criterion_5_theta1_exactness() {
  const auto suite = rectangle_suite();
  bool pass = true;
  double worst_rel = 0.0;
  for (const auto& entry : suite) {
    const Theta1Result r = theta1_density(f2(), entry.r, 1000);
    const double expected = std::exp(2.0 * kLog3 * entry.overlap);
    const double rel = std::abs(r.value / expected - 1.0);
    worst_rel = std::max(worst_rel, rel);
    pass = pass && rel <= 0.01 && r.limit == expected;
  }
  // exact invariance under every translation of length <= 2
  std::vector<Word> gs;
  for (Letter c = 0; c < 4; ++c) {
    gs.push_back(Word{{c}});
    for (Letter d = 0; d < 4; ++d) {
      const Word w = f2().reduce(std::vector<Letter>{c, d});
      if (w.length() == 2) gs.push_back(w);
    }
  }
  double worst_ratio_dev = 0.0;
  for (const auto& entry : suite) {
    for (const Word& g : gs) {
      const RatioReport r =
          g_invariance_check(MeasureTarget::Theta1, f2(), srw(), g, entry.r);
      worst_ratio_dev = std::max(worst_ratio_dev, std::abs(r.ratio - 1.0));
    }
  }
  pass = pass && worst_ratio_dev <= 1e-9;
  verdict(5, pass,
          "theta1 equals e^{2(xi,eta)} within 1% and is exactly G-invariant",
          "max rel " + fmt(worst_rel) + ", max |ratio-1| " + fmt(worst_ratio_dev));
}

std::vector<MeasureReport> theta3_suite_reports(
    const std::vector<SuiteEntry>& suite) {
  std::vector<MeasureReport> out;
  QhatParams params;
  params.replicas = 100000;
  params.halfwidth = 128;
  params.seed = 606;
  for (const auto& entry : suite) {
    params.origin_radius = entry.overlap + 4;
    out.push_back(qhat_mass(f2(), srw(), entry.r, params));
    params.seed += 0x9e3779b9;
  }
  return out;
}

void criterion_6_theta3_band(const std::vector<SuiteEntry>& suite,
                             const std::vector<MeasureReport>& reports) {
  bool pass = true;
  double lo = 1e300, hi = 0.0, worst_se = 0.0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const double hbms = hbms_mass(f2(), suite[i].r);
    const double ratio = reports[i].value / hbms;
    const double rel_se = reports[i].std_error / reports[i].value;
    worst_se = std::max(worst_se, rel_se);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    pass = pass && rel_se <= 0.05;
  }
  const double c = std::max(hi, 1.0 / lo);
  pass = pass && c <= 10.0;
  verdict(6, pass, "theta3/hbms ratios lie in a band with C <= 10, SE <= 5%",
          "ratios [" + fmt(lo) + ", " + fmt(hi) + "], C=" + fmt(c) +
              ", max SE " + fmt(worst_se));
}

void criterion_7_theta3_invariance(const std::vector<SuiteEntry>& suite,
                                   const std::vector<MeasureReport>& reports) {
  const std::size_t picks[] = {0, 4, 8, 9, 12, 13, 14, 16, 17, 18};
  const char* g_words[] = {"a", "b", "a b"};
  bool pass = true;
  double worst = 0.0;
  QhatParams params;
  params.replicas = 100000;
  params.halfwidth = 128;
  params.seed = 707;
  for (std::size_t idx : picks) {
    const MeasureReport& den = reports[idx];
    for (const char* g_text : g_words) {
      const Word g = f2().parse_word(g_text);
      const Rectangle moved = translate(f2(), g, suite[idx].r);
      params.origin_radius = suite[idx].overlap + 4 + g.length();
      const MeasureReport num = qhat_mass(f2(), srw(), moved, params);
      params.seed += 0x9e3779b9;
      const double ratio = num.value / den.value;
      const double se =
          ratio * std::hypot(num.std_error / num.value, den.std_error / den.value);
      worst = std::max(worst, std::abs(ratio - 1.0) / se);
      pass = pass && std::abs(ratio - 1.0) <= 3 * se;
    }
  }
  verdict(7, pass, "theta3(g.rect)/theta3(rect) = 1 within 3SE, g in {a,b,ab}",
          "max |ratio-1|/se = " + fmt(worst));
}

void criterion_8_theta2(const std::vector<SuiteEntry>& suite) {
  bool pass = true;
  double lo = 1e300, hi = 0.0;
  std::uint64_t violations = 0;
  Theta2Params params;
  params.cesaro_depth = 25;
  params.seed = 808;
  for (const auto& entry : suite) {
    // deeper overlaps are rarer events: scale the window count
    params.windows = entry.overlap <= 1 ? 300000
                     : entry.overlap == 2 ? 600000
                     : entry.overlap == 3 ? 1200000
                                          : 3000000;
    const Theta2Report r = theta2_mass(f2(), srw(), entry.r, params);
    violations += r.bound_violations;
    const double ratio = r.report.value / hbms_mass(f2(), entry.r);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    pass = pass && ratio >= 0.1 && ratio <= 1.1;
    params.seed += 0x9e3779b9;
  }
  pass = pass && violations == 0;
  verdict(8, pass,
          "theta2: f <= e^{2(xi,eta)} on every sample; ratios in [0.1, 1.1]",
          "ratios [" + fmt(lo) + ", " + fmt(hi) + "], violations " +
              std::to_string(violations));
}

void criterion_9_shadow_band() {
  // one Monte Carlo pass serves all eight nested shadows along a fixed ray;
  // thickness R = log 3 puts the shadow root one letter above each target
  const int max_d = 8;
  const Word ray = extend_ray(f2(), Word{{0}}, max_d);
  const int margin = membership_margin(f2(), 1e-9);
  const int steps = 4 * (max_d + margin) + 40;
  const std::uint64_t replicas = 2000000;

  struct Accum {
    std::vector<BinomialEst> in;
    std::uint64_t undecided = 0;
    void merge(const Accum& o) {
      if (in.size() < o.in.size()) in.resize(o.in.size());
      for (std::size_t i = 0; i < o.in.size(); ++i) in[i].merge(o.in[i]);
      undecided += o.undecided;
    }
  };
  auto body = [&](std::uint64_t i, Accum& acc) {
    if (acc.in.empty()) acc.in.resize(max_d);
    StreamRng rng(909, i);
    FreeWalker w(f2(), Word{});
    const int tgt = w.add_target(ray);
    for (int t = 0; t < steps; ++t) w.step(srw().sample(rng));
    const int cp = w.common_prefix_with(tgt);
    const int len = w.length();
    if (len - std::min(cp, max_d) < margin) {
      ++acc.undecided;
      return;
    }
    for (int d = 1; d <= max_d; ++d) {
      const int t_d = d - 1;  // shadow root depth at thickness log 3
      acc.in[d - 1].add(t_d == 0 || cp >= t_d);
    }
  };
  Accum acc = parallel_accumulate<Accum>(replicas, body, resolve_threads(0));
  if (acc.in.empty()) acc.in.resize(max_d);
  double lo = 1e300, hi = 0.0;
  for (int d = 1; d <= max_d; ++d) {
    const double stat = acc.in[d - 1].p() * std::exp(kLog3 * d);
    lo = std::min(lo, stat);
    hi = std::max(hi, stat);
  }
  const bool pass = hi / lo <= 4.0 &&
                    acc.undecided < replicas / 100;
  verdict(9, pass, "shadow statistic nu(shadow) e^{d_G} has max/min <= 4",
          "band [" + fmt(lo) + ", " + fmt(hi) + "], ratio " + fmt(hi / lo));
}

void criterion_10_shift_independence() {
  bool pass = true;
  std::string detail;
  for (int m : {25, 50, 100}) {
    const ShiftIndependenceReport r =
        shift_independence_test(f2(), srw(), m, 100, 10000, 1000 + m);
    pass = pass && r.ks.pvalue > 0.01;
    detail += (detail.empty() ? "p=" : ", ") + fmt(r.ks.pvalue);
  }
  verdict(10, pass, "chi-square p-values pass KS uniformity at 0.01, m in {25,50,100}",
          detail);
}

void criterion_11_birkhoff() {
  bool pass = true;
  std::string detail;
  for (const WindowFunctional f : {WindowFunctional::FirstIncrementIsA,
                                   WindowFunctional::TwoStepNoCancellation}) {
    const BirkhoffReport r =
        birkhoff_average(f2(), srw(), f, {100, 1000}, 6000, 1111);
    const double shrink = r.spread[1] / r.spread[0];
    // "halves" read as at-least-halving with the 20% allowance; the iid
    // scaling factor is sqrt(1/10) ~ 0.32
    const bool shrink_ok = shrink <= 0.6;
    const double mean_se = r.spread[1] / std::sqrt(6000.0);
    const double diff = std::abs(r.grand_mean[1] - r.direct_expectation);
    const bool limit_ok = diff <= 3 * std::hypot(mean_se, r.direct_se);
    pass = pass && shrink_ok && limit_ok;
    detail += (detail.empty() ? "shrink=" : ", ") + fmt(shrink);
  }
  verdict(11, pass, "flow averages: spread at least halves from T=1e2 to 1e3",
          detail);
}

void criterion_12_restricted_green() {
  const Word a2 = f2().parse_word("a a");
  const Word b2 = f2().parse_word("b b");
  const GreenEstimate separated = restricted_green(
      f2(), srw(), a2, b2, BallSpec{Word{}, 1.0, Metric::Word});
  bool pass = separated.value == 0.0 &&
              separated.provenance == Provenance::ExactTree;

  const Word x = f2().parse_word("a a a b");
  const Word y = f2().parse_word("a a a b b");
  McParams mc{200000, 0, 1212, 0};
  const GreenEstimate unrestricted =
      green_function(f2(), srw(), x, y, Method::MonteCarlo, mc);
  double previous = 1e300;
  std::string detail = "grid";
  for (double radius : {1.0, 2.0, 3.0}) {
    const GreenEstimate e = restricted_green(
        f2(), srw(), x, y, BallSpec{Word{}, radius, Metric::Word}, mc);
    pass = pass && e.value <= previous + 1e-12;  // common random numbers
    pass = pass &&
           e.value <= unrestricted.value +
                          3 * (e.std_error + unrestricted.std_error);
    previous = e.value;
    detail += " " + fmt(e.value);
  }
  verdict(12, pass, "restricted green: separation zero, bounded, radius-monotone",
          detail + " vs G=" + fmt(unrestricted.value));
}

void criterion_13_interlacement() {
  bool pass = true;
  // equal d(g,k) origins strictly between o and k agree
  const InterlacementReport r_ab =
      interlacement_compare(f2(), srw(), f2().parse_word("a b"), 300000, 1313);
  const InterlacementReport r_bab =
      interlacement_compare(f2(), srw(), f2().parse_word("b a b"), 300000, 1314);
  const InterlacementReport r_aba =
      interlacement_compare(f2(), srw(), f2().parse_word("a b a"), 300000, 1315);
  auto agree = [&](const InterlacementOrigin& x, const InterlacementOrigin& y) {
    return std::abs(x.c1 - y.c1) <= 3 * std::hypot(x.c1_se, y.c1_se) &&
           std::abs(x.c2 - y.c2) <= 3 * std::hypot(x.c2_se, y.c2_se);
  };
  // m = 1: (k=ab, g=a) vs (k=bab, g=ba); m = 2: (k=bab, g=b) vs (k=aba, g=a)
  pass = pass && agree(r_ab.origins[1], r_bab.origins[2]);
  pass = pass && agree(r_bab.origins[1], r_aba.origins[1]);

  // the origin-summed hitting mass strictly grows with d(o,k)
  const InterlacementReport r_a =
      interlacement_compare(f2(), srw(), f2().parse_word("a"), 300000, 1316);
  pass = pass && r_a.qhat_hit < r_ab.qhat_hit && r_ab.qhat_hit < r_aba.qhat_hit;

  // while the base-point-free intensity stays at 2/3
  for (const InterlacementReport* r : {&r_a, &r_ab, &r_aba}) {
    pass = pass && std::abs(r->qstar_hit - 2.0 / 3.0) <= 3 * r->qstar_hit_se;
  }
  verdict(13, pass,
          "hitting intensities: c's depend on d(g,k) only; qhat grows, qstar flat",
          "qhat " + fmt(r_a.qhat_hit) + " < " + fmt(r_ab.qhat_hit) + " < " +
              fmt(r_aba.qhat_hit) + ", qstar " + fmt(r_aba.qstar_hit));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_1_exact_first_passage();
  criterion_2_escape_probability();
  criterion_3_deviation_law();
  criterion_4_conditional_uniformity();
  criterion_5_theta1_exactness();
  const auto suite = rectangle_suite();
  const auto reports = theta3_suite_reports(suite);
  criterion_6_theta3_band(suite, reports);
  criterion_7_theta3_invariance(suite, reports);
  criterion_8_theta2(suite);
  criterion_9_shadow_band();
  criterion_10_shift_independence();
  criterion_11_birkhoff();
  criterion_12_restricted_green();
  criterion_13_interlacement();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d/13 criteria passed in %.1fs\n", 13 - failures, secs);
  return failures == 0 ? 0 : 1;
}
