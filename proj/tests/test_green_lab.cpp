#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hypflow/boundary.hpp"
#include "hypflow/green.hpp"
#include "hypflow/stats.hpp"
#include "oracles.hpp"

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

}  // namespace

TEST_CASE("first passage: exact tree values") {
  const Word o;
  const Word a = f2().parse_word("a");
  const Word aa = f2().parse_word("a a");
  CHECK(first_passage(f2(), srw(), o, a).value == doctest::Approx(1.0 / 3.0));
  CHECK(first_passage(f2(), srw(), o, aa).value == doctest::Approx(1.0 / 9.0));
  CHECK(first_passage(f2(), srw(), aa, aa).value == doctest::Approx(1.0));
  CHECK(first_passage(f2(), srw(), o, a).provenance == Provenance::ExactTree);
}

TEST_CASE("first passage: monte carlo agrees with the tree formula") {
  McParams mc{100000, 0, 421, 0};
  for (int d = 1; d <= 3; ++d) {
    const Word y = extend_ray(f2(), Word{{0}}, d - 1);
    const GreenEstimate e =
        first_passage(f2(), srw(), Word{}, y, Method::MonteCarlo, mc);
    const double exact = std::pow(3.0, -d);
    CHECK(std::abs(e.value - exact) <= 3 * e.std_error);
    CHECK(e.tail_bound < 1e-10);
    CHECK_FALSE(e.horizon_warning);
    mc.seed += 1;
  }
}

TEST_CASE("first passage off the simple walk falls back to monte carlo") {
  const StepDistribution mu =
      StepDistribution::from_weights(f2(), {0.3, 0.3, 0.2, 0.2});
  const GreenEstimate e =
      first_passage(f2(), mu, Word{}, f2().parse_word("a"), Method::Auto,
                    McParams{50000, 0, 3, 0});
  CHECK(e.provenance == Provenance::MonteCarlo);
  // heavier weight toward a than the SRW value 1/3
  CHECK(e.value > 1.0 / 3.0);
  CHECK_THROWS_AS(
      first_passage(f2(), mu, Word{}, f2().parse_word("a"), Method::Exact, {}),
      std::invalid_argument);
}

TEST_CASE("green function") {
  const Word o;
  CHECK(green_function(f2(), srw(), o, o).value == doctest::Approx(1.5));
  CHECK(green_function(f2(), srw(), o, f2().parse_word("a")).value ==
        doctest::Approx(0.5));

  // renewal identity: direct visit counting vs 1/(1 - empirical return prob)
  const GreenEstimate mc =
      green_function(f2(), srw(), o, o, Method::MonteCarlo, McParams{100000, 400, 5, 0});
  BinomialEst returned;
  for (int i = 0; i < 100000; ++i) {
    StreamRng rng(606, i);
    FreeWalker w(f2(), Word{});
    bool back = false;
    for (int t = 0; t < 400 && !back; ++t) {
      w.step(srw().sample(rng));
      back = w.length() == 0;
      if (w.length() > 30) break;  // return mass beyond is < 3^-30
    }
    returned.add(back);
  }
  const double renewal = 1.0 / (1.0 - returned.p());
  const double renewal_se =
      renewal * renewal * returned.se();  // d/dp [1/(1-p)] = 1/(1-p)^2
  CHECK(std::abs(mc.value - renewal) <=
        3 * std::hypot(mc.std_error, renewal_se) + mc.tail_bound);
  CHECK(std::abs(renewal - 1.5) <= 3 * renewal_se);
}

TEST_CASE("green metric") {
  const Word o;
  CHECK(green_metric(f2(), srw(), o, o).value == doctest::Approx(0.0));
  CHECK(green_metric(f2(), srw(), o, f2().parse_word("a")).value ==
        doctest::Approx(kLog3));
  CHECK(green_metric(f2(), srw(), o, f2().parse_word("a b a")).value ==
        doctest::Approx(3 * kLog3));
  CHECK(tree_green_scale(f2()) == doctest::Approx(kLog3));
}

TEST_CASE("restricted green function") {
  const Word a2 = f2().parse_word("a a");
  const Word b2 = f2().parse_word("b b");

  SUBCASE("tree separation is exactly zero") {
    const BallSpec ball{Word{}, 1.0, Metric::Word};
    const GreenEstimate e = restricted_green(f2(), srw(), a2, b2, ball);
    CHECK(e.value == 0.0);
    CHECK(e.provenance == Provenance::ExactTree);
    CHECK_FALSE(e.flagged);
  }

  SUBCASE("endpoint inside the ball is flagged zero by convention") {
    const BallSpec ball{Word{}, 2.0, Metric::Word};
    const GreenEstimate e = restricted_green(f2(), srw(), a2, b2, ball);
    CHECK(e.value == 0.0);
    CHECK(e.flagged);
  }

  SUBCASE("vacuous constraint reproduces the green function") {
    // radius-0 ball far from every a2 -> a2b path
    const BallSpec ball{f2().parse_word("-b -b -b"), 0.0, Metric::Word};
    const Word target = f2().parse_word("a a b");
    const GreenEstimate restricted = restricted_green(
        f2(), srw(), a2, target, ball, McParams{150000, 0, 7, 0});
    const double exact = green_function(f2(), srw(), a2, target).value;
    CHECK(std::abs(restricted.value - exact) <=
          3 * restricted.std_error + restricted.tail_bound);
  }

  SUBCASE("non-increasing in the ball radius under common random numbers") {
    const Word x = f2().parse_word("a a a b");
    const Word y = f2().parse_word("a a a b b");
    double previous = 1e9;
    for (double r : {1.0, 2.0, 3.0}) {
      const BallSpec ball{Word{}, r, Metric::Word};
      const GreenEstimate e =
          restricted_green(f2(), srw(), x, y, ball, McParams{60000, 0, 11, 0});
      CHECK(e.value <= previous + 1e-12);
      previous = e.value;
    }
  }

  SUBCASE("restricted never exceeds unrestricted") {
    const Word x = f2().parse_word("a a a b");
    const Word y = f2().parse_word("a a a b b");
    const BallSpec ball{Word{}, 2.0, Metric::Word};
    const GreenEstimate r =
        restricted_green(f2(), srw(), x, y, ball, McParams{60000, 0, 13, 0});
    const GreenEstimate u =
        green_function(f2(), srw(), x, y, Method::MonteCarlo, McParams{60000, 0, 13, 0});
    CHECK(r.value <= u.value + 3 * (r.std_error + u.std_error));
  }

  SUBCASE("interior-time convention flag") {
    // walk a -> o -> a: with times from 1 excluded, a radius-0 ball at o
    // kills the return path; permitting X_1 in the set does not.
    const Word a = f2().parse_word("a");
    const BallSpec ball{Word{}, 0.0, Metric::Word};
    const GreenEstimate strict =
        restricted_green(f2(), srw(), a, a, ball, McParams{100000, 200, 17, 0},
                         InteriorTimes::FromOne);
    const GreenEstimate loose =
        restricted_green(f2(), srw(), a, a, ball, McParams{100000, 200, 17, 0},
                         InteriorTimes::FromTwo);
    CHECK(loose.value > strict.value + 3 * (loose.std_error + strict.std_error));
  }
}

TEST_CASE("green gromov products") {
  const Word o;
  const Word x = f2().parse_word("a b");
  const Word w = f2().parse_word("b");
  CHECK(gromov_product_green(f2(), srw(), x, x, w).value ==
        doctest::Approx(kLog3 * f2().word_distance(x, w)));
  // monte carlo composition agrees with the exact product
  const GreenEstimate mc = gromov_product_green(
      f2(), srw(), f2().parse_word("a b"), f2().parse_word("a -b"), Word{},
      Method::MonteCarlo, McParams{100000, 0, 47, 0});
  CHECK(std::abs(mc.value - kLog3) <= 3 * mc.std_error);

  CHECK(gromov_product_boundary(f2(), srw(), Cylinder{f2().parse_word("a b")},
                                Cylinder{f2().parse_word("a -b")}) ==
        doctest::Approx(kLog3));
  CHECK(gromov_product_boundary(f2(), srw(), Cylinder{f2().parse_word("a")},
                                Cylinder{f2().parse_word("b")}) ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(gromov_product_boundary(f2(), srw(),
                                          Cylinder{f2().parse_word("a")},
                                          Cylinder{f2().parse_word("a b")}),
                  std::invalid_argument);
}

TEST_CASE("busemann function") {
  const Word o;
  const Word a = f2().parse_word("a");
  const Cylinder deep_a{extend_ray(f2(), a, 4)};
  const Cylinder deep_b{extend_ray(f2(), f2().parse_word("b"), 4)};

  CHECK(busemann(f2(), srw(), deep_a, o, o).value == doctest::Approx(0.0));
  CHECK(busemann(f2(), srw(), deep_a, o, a).value == doctest::Approx(kLog3));
  CHECK(busemann(f2(), srw(), deep_b, o, a).value == doctest::Approx(-kLog3));
  CHECK(busemann(f2(), srw(), deep_a, o, a).stabilized);

  // root too shallow relative to the arguments: flagged undecided
  const Cylinder shallow{a};
  CHECK_FALSE(busemann(f2(), srw(), shallow, o, a).stabilized);
}

TEST_CASE("martin density") {
  const Word o;
  const Word a = f2().parse_word("a");
  const Cylinder ab{extend_ray(f2(), f2().parse_word("a b"), 3)};
  const Cylinder b{extend_ray(f2(), f2().parse_word("b"), 3)};

  CHECK(martin_density(f2(), srw(), o, ab).value == doctest::Approx(1.0));
  CHECK(martin_density(f2(), srw(), a, ab).value == doctest::Approx(3.0));
  CHECK(martin_density(f2(), srw(), a, b).value == doctest::Approx(1.0 / 3.0));

  // consistency oracle: the density matches the exact mass ratio
  const double ratio = harmonic_exact(f2(), BranchSet::cyl(ab.root), a) /
                       harmonic_exact(f2(), BranchSet::cyl(ab.root), o);
  CHECK(martin_density(f2(), srw(), a, ab).value == doctest::Approx(ratio));
}

TEST_CASE("martin density cocycle along geodesics") {
  // K(xy, xi) = K(x, xi) * K(y, xi | translated) for xy reduced
  const Word x = f2().parse_word("a b");
  const Word y = f2().parse_word("a a");
  const Word xy = f2().multiply(x, y);
  REQUIRE(xy.length() == x.length() + y.length());
  const Cylinder xi{extend_ray(f2(), f2().parse_word("b b"), 8)};
  const BusemannResult full = busemann(f2(), srw(), xi, xy, Word{});
  const BusemannResult part1 = busemann(f2(), srw(), xi, xy, x);
  const BusemannResult part2 = busemann(f2(), srw(), xi, x, Word{});
  REQUIRE(full.stabilized);
  CHECK(std::abs(full.value - part1.value - part2.value) < 1e-9);
}

TEST_CASE("busemann on a non-tree model: sampled tail with a 2-delta band") {
  const GroupModel z23 = GroupModel::free_product({2, 3});
  const StepDistribution mu = StepDistribution::uniform(z23);
  const Cylinder xi{z23.parse_word("x y x")};
  const Word p = z23.parse_word("x");
  McParams mc{40000, 0, 61, 0};

  const BusemannResult same = busemann(z23, mu, xi, p, p, Method::MonteCarlo, mc);
  CHECK(same.value == doctest::Approx(0.0));

  const BusemannResult r = busemann(z23, mu, xi, Word{}, p, Method::MonteCarlo, mc);
  CHECK(std::isfinite(r.value));
  CHECK(r.band >= 0.0);
  // antisymmetry within the reported band and noise
  const BusemannResult rr = busemann(z23, mu, xi, p, Word{}, Method::MonteCarlo, mc);
  CHECK(std::abs(r.value + rr.value) <=
        r.band + rr.band + 3 * (r.std_error + rr.std_error) + 1e-9);

  CHECK_THROWS_AS(busemann(z23, mu, xi, Word{}, p, Method::Exact, mc),
                  std::invalid_argument);
}

TEST_CASE("ancona ratio") {
  const Word x = f2().parse_word("-a -a");
  const Word y = f2().parse_word("a a");
  CHECK(ancona_ratio(f2(), srw(), x, Word{}, y).value == doctest::Approx(1.0));
  CHECK(ancona_ratio(f2(), srw(), x, x, y).value == doctest::Approx(1.0));
  // off-geodesic detours cost 3^{2k}
  CHECK(ancona_ratio(f2(), srw(), x, f2().parse_word("b"), y).value ==
        doctest::Approx(9.0));
  CHECK(ancona_ratio(f2(), srw(), x, f2().parse_word("b b"), y).value ==
        doctest::Approx(81.0));
}

TEST_CASE("ancona band near the geodesic") {
  // v within word distance 1 of [x,y]: ratio in [1, C(1)] with C(1) = 9
  StreamRng rng(91, 0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    std::vector<Letter> letters;
    for (int j = 0; j < 6; ++j) letters.push_back(static_cast<Letter>(rng.below(4)));
    const Word x = f2().reduce(std::vector<Letter>(letters.begin(), letters.begin() + 3));
    const Word y = f2().reduce(std::vector<Letter>(letters.begin() + 3, letters.end()));
    const auto path = f2().geodesic(x, y);
    const Word& mid = path[path.size() / 2];
    const Word v = f2().multiply(mid, Word{{static_cast<Letter>(rng.below(4))}});
    const double ratio = ancona_ratio(f2(), srw(), x, v, y).value;
    CHECK(ratio >= 1.0 - 1e-12);
    CHECK(ratio <= 9.0 + 1e-9);
    worst = std::max(worst, ratio);
  }
  CHECK(worst <= 9.0 + 1e-9);
}

TEST_CASE("green estimates on the free product model") {
  const GroupModel z23 = GroupModel::free_product({2, 3});
  const StepDistribution mu = StepDistribution::uniform(z23);
  const Word x = z23.parse_word("x y");
  McParams mc{60000, 0, 83, 0};

  // mu symmetric: first passage is symmetric within noise
  const GreenEstimate fwd = first_passage(z23, mu, Word{}, x, Method::MonteCarlo, mc);
  mc.seed += 1;
  const GreenEstimate bwd = first_passage(z23, mu, x, Word{}, Method::MonteCarlo, mc);
  CHECK(fwd.value > 0.0);
  CHECK(std::abs(fwd.value - bwd.value) <=
        3 * std::hypot(fwd.std_error, bwd.std_error));

  const GreenEstimate metric = green_metric(z23, mu, Word{}, x, Method::Auto, mc);
  CHECK(metric.provenance == Provenance::MonteCarlo);
  CHECK(metric.value > 0.0);
}

TEST_CASE("green metric axioms hold exactly on the tree") {
  StreamRng rng(101, 0);
  for (int i = 0; i < 2000; ++i) {
    std::vector<Letter> buf;
    for (int j = 0; j < 12; ++j) buf.push_back(static_cast<Letter>(rng.below(4)));
    const Word x = f2().reduce(std::span<const Letter>(buf.data(), 4));
    const Word y = f2().reduce(std::span<const Letter>(buf.data() + 4, 4));
    const Word z = f2().reduce(std::span<const Letter>(buf.data() + 8, 4));
    const double dxy = green_metric(f2(), srw(), x, y).value;
    const double dyx = green_metric(f2(), srw(), y, x).value;
    const double dxz = green_metric(f2(), srw(), x, z).value;
    const double dzy = green_metric(f2(), srw(), z, y).value;
    CHECK(dxy == doctest::Approx(dyx));
    CHECK(dxy <= dxz + dzy + 1e-9);
    CHECK((dxy == 0.0) == (x == y));
  }
}
