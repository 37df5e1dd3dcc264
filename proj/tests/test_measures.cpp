#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hypflow/measures.hpp"

using namespace hypflow;

namespace {

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

}  // namespace

TEST_CASE("hbms masses on separated rectangles") {
  CHECK(hbms_mass(f2(), rect("a", "b")) == doctest::Approx(1.0 / 16.0));
  CHECK(hbms_mass(f2(), rect("a b", "a -b")) == doctest::Approx(1.0 / 16.0));
  CHECK(hbms_mass(f2(), rect("a b", "b")) == doctest::Approx(1.0 / 48.0));
  CHECK_THROWS_AS(hbms_mass(f2(), rect("a", "a b")), std::invalid_argument);
}

TEST_CASE("theta1 density converges to the hbms weight") {
  SUBCASE("no overlap") {
    const Theta1Result r = theta1_density(f2(), rect("a b", "b a"), 100);
    CHECK(r.limit == doctest::Approx(1.0));
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.trace.front() == doctest::Approx(1.0));  // origin term before weighting
  }
  SUBCASE("overlap depth 1 gives 9 = e^{2 log 3}") {
    const Theta1Result r = theta1_density(f2(), rect("a b", "a -b"), 1000);
    CHECK(r.limit == doctest::Approx(9.0));
    CHECK(std::abs(r.value / r.limit - 1.0) < 0.01);
    CHECK(r.trace.front() == doctest::Approx(1.0));
  }
  SUBCASE("cesaro trace approaches the limit monotonically in tail") {
    const Theta1Result r = theta1_density(f2(), rect("a b a", "a b -a"), 1000);
    CHECK(r.limit == doctest::Approx(std::exp(4 * kLog3)));
    CHECK(std::abs(r.value / r.limit - 1.0) < 0.01);
    CHECK(r.trace.front() < r.trace.back());
  }
}

TEST_CASE("theta1 is exactly invariant under small translations") {
  const std::vector<Rectangle> rects = {rect("a", "b"), rect("a b", "a -b"),
                                        rect("b a", "b -a"), rect("a b", "b")};
  // all reduced words of length <= 2
  std::vector<Word> gs;
  for (Letter c = 0; c < 4; ++c) {
    gs.push_back(Word{{c}});
    for (Letter d = 0; d < 4; ++d) {
      const Word w = f2().reduce(std::vector<Letter>{c, d});
      if (w.length() == 2) gs.push_back(w);
    }
  }
  for (const Rectangle& r : rects) {
    for (const Word& g : gs) {
      const RatioReport report =
          g_invariance_check(MeasureTarget::Theta1, f2(), srw(), g, r);
      CHECK(report.exact);
      CHECK(std::abs(report.ratio - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("qhat structural support is the junction path") {
  const Rectangle r1 = rect("a", "b");
  CHECK(qhat_origin_feasible(f2(), r1, Word{}));
  CHECK_FALSE(qhat_origin_feasible(f2(), r1, f2().parse_word("-a")));
  CHECK_FALSE(qhat_origin_feasible(f2(), r1, f2().parse_word("a b")));

  const Rectangle r2 = rect("a b", "a -b");
  CHECK(qhat_origin_feasible(f2(), r2, Word{}));
  CHECK(qhat_origin_feasible(f2(), r2, f2().parse_word("a")));
  CHECK_FALSE(qhat_origin_feasible(f2(), r2, f2().parse_word("b")));
  CHECK_FALSE(qhat_origin_feasible(f2(), r2, f2().parse_word("a a")));
}

TEST_CASE("qhat mass matches the exact tree decomposition") {
  QhatParams params;
  params.replicas = 200000;
  params.halfwidth = 128;
  params.origin_radius = 6;
  params.seed = 2027;

  SUBCASE("depth-1 rectangle: only the origin contributes") {
    const MeasureReport r = qhat_mass(f2(), srw(), rect("a", "b"), params);
    // forward factor nu(a) = 1/4, backward factor nu(b)(1 - rho) = 1/6
    CHECK(std::abs(r.value - 1.0 / 24.0) <= 3 * r.std_error);
    REQUIRE(r.shell_mass.size() >= 2);
    CHECK(r.shell_mass[1] == 0.0);
    CHECK(r.truncation.tail_bound == 0.0);
  }

  SUBCASE("overlap-1 rectangle: origin plus junction vertex") {
    const MeasureReport r = qhat_mass(f2(), srw(), rect("a b", "a -b"), params);
    // 1/216 from the origin, 1/27 from the junction end: total 1/24
    CHECK(std::abs(r.value - 1.0 / 24.0) <= 3 * r.std_error);
    CHECK(r.shell_mass[0] == doctest::Approx(1.0 / 216.0).epsilon(0.15));
    CHECK(r.shell_mass[1] == doctest::Approx(1.0 / 27.0).epsilon(0.1));
  }

  SUBCASE("undecided windows are counted and small") {
    const MeasureReport r = qhat_mass(f2(), srw(), rect("a", "b"), params);
    CHECK(static_cast<double>(r.undecided) <= 0.001 * r.samples);
  }

  SUBCASE("radius below the overlap depth raises the dominated-terms flag") {
    QhatParams shallow = params;
    shallow.replicas = 2000;
    shallow.origin_radius = 0;
    const MeasureReport r = qhat_mass(f2(), srw(), rect("a b", "a -b"), shallow);
    CHECK(r.dominated_warning);
    QhatParams fine = shallow;
    fine.origin_radius = 3;
    CHECK_FALSE(qhat_mass(f2(), srw(), rect("a b", "a -b"), fine).dominated_warning);
  }

  SUBCASE("mass is nondecreasing in the origin radius") {
    QhatParams wide = params;
    wide.replicas = 50000;
    QhatParams narrow = wide;
    narrow.origin_radius = 3;
    wide.origin_radius = 6;
    const MeasureReport small = qhat_mass(f2(), srw(), rect("a b", "a -b"), narrow);
    const MeasureReport large = qhat_mass(f2(), srw(), rect("a b", "a -b"), wide);
    // origin streams are keyed by the origin word: shared shells agree and
    // the increment is the (zero) mass of the extra shells
    CHECK(large.value >= small.value);
    CHECK(large.value - small.value <= small.truncation.tail_bound + 1e-12);
  }
}

TEST_CASE("qhat is additive over disjoint rectangle unions") {
  QhatParams params;
  params.replicas = 150000;
  params.halfwidth = 128;
  params.origin_radius = 4;
  params.seed = 5;
  const MeasureReport ra = qhat_mass(f2(), srw(), rect("a", "-b"), params);
  params.seed = 6;
  const MeasureReport rb = qhat_mass(f2(), srw(), rect("b", "-b"), params);
  params.seed = 7;
  Rectangle both;
  both.fwd.parts = {BranchSet::cyl(f2().parse_word("a")),
                    BranchSet::cyl(f2().parse_word("b"))};
  both.bwd = BoundarySet::cyl(f2().parse_word("-b"));
  const MeasureReport ru = qhat_mass(f2(), srw(), both, params);
  const double se = 3 * (ra.std_error + rb.std_error + ru.std_error);
  CHECK(std::abs(ru.value - ra.value - rb.value) <= se);
}

TEST_CASE("theta2 mass sits in the density band") {
  Theta2Params params;
  params.windows = 150000;
  params.cesaro_depth = 25;
  params.seed = 404;

  SUBCASE("per-sample bound and band") {
    for (const Rectangle& r : {rect("a", "b"), rect("a b", "a -b")}) {
      const Theta2Report rep = theta2_mass(f2(), srw(), r, params);
      CHECK(rep.bound_violations == 0);
      CHECK(rep.max_f_over_bound <= 1.0 + 1e-12);
      const double ratio = rep.report.value / hbms_mass(f2(), r);
      CHECK(ratio >= 4.0 / 27.0 - 0.05);
      CHECK(ratio <= 1.0 + 0.05);
      CHECK(rep.report.rejection_proxy);
      params.seed += 1;
    }
  }

  SUBCASE("depth-1 rectangle pairs fill at most the product mass") {
    // complementary depth-1 pairs: sum of theta2 masses <= 1 + noise
    double total = 0.0, se2 = 0.0;
    for (Letter i = 0; i < 4; ++i) {
      for (Letter j = 0; j < 4; ++j) {
        if (i == j) continue;
        Rectangle r;
        r.fwd = BoundarySet::cyl(Word{{i}});
        r.bwd = BoundarySet::cyl(Word{{j}});
        Theta2Params light = params;
        light.windows = 40000;
        light.seed = 900 + i * 4 + j;
        const Theta2Report rep = theta2_mass(f2(), srw(), r, light);
        total += rep.report.value;
        se2 += rep.report.std_error * rep.report.std_error;
      }
    }
    CHECK(total <= 1.0 + 3 * std::sqrt(se2));
  }

  SUBCASE("cesaro depth is capped by the window") {
    Theta2Params bad = params;
    bad.cesaro_depth = 40;
    bad.halfwidth = 60;
    CHECK_THROWS_AS(theta2_mass(f2(), srw(), rect("a", "b"), bad),
                    std::invalid_argument);
  }
}

TEST_CASE("theta3 translation invariance") {
  QhatParams params;
  params.replicas = 200000;
  params.halfwidth = 128;
  params.origin_radius = 5;
  params.seed = 31337;
  const RatioReport r = g_invariance_check(
      MeasureTarget::Theta3, f2(), srw(), f2().parse_word("a"), rect("b", "-b"),
      params);
  CHECK_FALSE(r.exact);
  CHECK(std::abs(r.ratio - 1.0) <= 3 * r.std_error);

  // identity translation is exactly 1
  const RatioReport id = g_invariance_check(MeasureTarget::Theta1, f2(), srw(),
                                            Word{}, rect("a", "b"), params);
  CHECK(id.ratio == doctest::Approx(1.0));
}

TEST_CASE("interlacement comparison") {
  const InterlacementReport r = interlacement_compare(
      f2(), srw(), f2().parse_word("a b"), 150000, 606);

  CHECK(r.qstar_exact == doctest::Approx(2.0 / 3.0));
  CHECK(std::abs(r.qstar_hit - 2.0 / 3.0) <= 3 * r.qstar_hit_se);

  REQUIRE(r.origins.size() == 3);
  // target origin: weight (2*1 - 1) = 1, c1 = 1/2, c2 = 2/3 exactly
  const InterlacementOrigin& at_k = r.origins.back();
  CHECK(at_k.dist_to_target == 0);
  CHECK(std::abs(at_k.c1 - 0.5) <= 3 * at_k.c1_se);
  CHECK(std::abs(at_k.c2 - 2.0 / 3.0) <= 3 * at_k.c2_se);

  // frozen exact total for distance 1 targets:
  //   (c1+c2)(2F - F^2) summed over [o,k] = 7/6 + 5/6 = 2
  const InterlacementReport d1 =
      interlacement_compare(f2(), srw(), f2().parse_word("a"), 150000, 607);
  CHECK(std::abs(d1.qhat_hit - 2.0) <= 3 * d1.qhat_hit_se + 0.01);
}

TEST_CASE("interlacement c-factors depend only on the distance to the target") {
  // two configurations with origins strictly between o and k
  const InterlacementReport r1 =
      interlacement_compare(f2(), srw(), f2().parse_word("a b"), 150000, 17);
  const InterlacementReport r2 =
      interlacement_compare(f2(), srw(), f2().parse_word("b a b"), 150000, 18);
  // (k = ab, g = a): j = 1, m = 1  vs  (k = bab, g = ba): j = 2, m = 1
  const InterlacementOrigin& x = r1.origins[1];
  const InterlacementOrigin& y = r2.origins[2];
  REQUIRE(x.dist_to_target == 1);
  REQUIRE(y.dist_to_target == 1);
  CHECK(std::abs(x.c1 - y.c1) <= 3 * std::hypot(x.c1_se, y.c1_se));
  CHECK(std::abs(x.c2 - y.c2) <= 3 * std::hypot(x.c2_se, y.c2_se));
}

TEST_CASE("qhat hitting mass grows with the distance while qstar stays put") {
  std::uint64_t seed = 71;
  double previous = 0.0;
  for (const char* target : {"a", "a b", "a b a"}) {
    const InterlacementReport r =
        interlacement_compare(f2(), srw(), f2().parse_word(target), 100000, seed++);
    CHECK(r.qhat_hit > previous);
    CHECK(std::abs(r.qstar_hit - 2.0 / 3.0) <= 3 * r.qstar_hit_se);
    previous = r.qhat_hit;
  }
}

TEST_CASE("q shift invariance") {
  IncrementEvent first_is_a{0, {0}};

  SUBCASE("z = 0 is exactly 1") {
    const QShiftReport r =
        q_shift_invariance(f2(), srw(), first_is_a, 0, 1, 20000, 99);
    CHECK(r.ratio == doctest::Approx(1.0));
    CHECK(r.mass == doctest::Approx(r.shifted_mass));
  }

  SUBCASE("single-increment event has mass mu(a) per origin") {
    const QShiftReport r =
        q_shift_invariance(f2(), srw(), first_is_a, 1, 1, 40000, 100);
    CHECK(std::abs(r.mass - 0.25) <= 0.01);
    CHECK(std::abs(r.ratio - 1.0) <= 3 * r.std_error);
  }

  SUBCASE("three-increment cylinder event") {
    IncrementEvent cyl{0, {0, 2, 0}};  // a, b, a
    const QShiftReport r =
        q_shift_invariance(f2(), srw(), cyl, 1, 1, 400000, 101);
    CHECK(std::abs(r.ratio - 1.0) <= 3 * r.std_error);
  }

  CHECK_THROWS_AS(q_shift_invariance(f2(), srw(), IncrementEvent{0, {}}, 1, 1,
                                     100, 1),
                  std::invalid_argument);
}

TEST_CASE("measure constructions require the tree SRW") {
  const GroupModel z23 = GroupModel::free_product({2, 3});
  const StepDistribution mu23 = StepDistribution::uniform(z23);
  Rectangle r;
  r.fwd = BoundarySet::cyl(z23.parse_word("x"));
  r.bwd = BoundarySet::cyl(z23.parse_word("y"));
  CHECK_THROWS_AS(qhat_mass(z23, mu23, r, {}), std::invalid_argument);
  CHECK_THROWS_AS(theta2_mass(z23, mu23, r, {}), std::invalid_argument);
  CHECK_THROWS_AS(hbms_mass(z23, r), std::invalid_argument);
}
