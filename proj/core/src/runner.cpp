#include "hypflow/runner.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>

#include <nlohmann/json.hpp>

#include "hypflow/boundary.hpp"
#include "hypflow/experiments.hpp"
#include "hypflow/green.hpp"
#include "hypflow/measures.hpp"
#include "hypflow/parallel.hpp"
#include "hypflow/version.hpp"

namespace hypflow {

namespace {

using nlohmann::json;

struct RunContext {
  const Config& config;
  GroupModel model;
  StepDistribution mu;
  std::uint64_t seed;
  int threads;

  template <class T>
  T param(const char* key, T fallback) const {
    const json& p = config.params();
    if (!p.contains(key)) return fallback;
    return p.at(key).get<T>();
  }
  Word word(const char* key, const std::string& fallback) const {
    const json& p = config.params();
    const std::string text =
        p.contains(key) ? p.at(key).get<std::string>() : fallback;
    return model.parse_word(text);
  }
};

json estimate_json(const GreenEstimate& e) {
  json j;
  j["value"] = e.value;
  j["std_error"] = e.std_error;
  j["samples"] = e.samples;
  j["provenance"] = e.provenance == Provenance::ExactTree ? "exact_tree"
                    : e.provenance == Provenance::MonteCarlo ? "monte_carlo"
                                                             : "dp_truncated";
  j["tail_bound"] = e.tail_bound;
  if (e.horizon_warning) j["horizon_warning"] = true;
  if (e.infinite) j["infinite"] = true;
  if (e.flagged) j["flagged"] = true;
  return j;
}

json curve_json(const CurveReport& c) {
  json j;
  j["label"] = c.label;
  j["grid"] = c.grid;
  j["estimates"] = c.estimates;
  j["std_errors"] = c.std_errors;
  j["hits"] = c.hits;
  j["replicas"] = c.replicas;
  j["undecided"] = c.undecided;
  j["slope"] = c.fit.slope;
  j["slope_se"] = c.fit.slope_se;
  j["slope_ci_lo"] = c.fit_ci.lo;
  j["slope_ci_hi"] = c.fit_ci.hi;
  j["slope_bootstrap_se"] = c.fit_ci.se;
  j["points_used"] = c.fit.points_used;
  j["seed"] = c.seed;
  return j;
}

json measure_json(const MeasureReport& m) {
  json j;
  j["target"] = m.target;
  j["value"] = m.value;
  j["std_error"] = m.std_error;
  j["samples"] = m.samples;
  j["undecided"] = m.undecided;
  j["seed"] = m.seed;
  j["truncation"] = {{"origin_radius", m.truncation.origin_radius},
                     {"cesaro_depth", m.truncation.cesaro_depth},
                     {"halfwidth", m.truncation.halfwidth},
                     {"tail_bound", m.truncation.tail_bound}};
  if (m.rejection_proxy) j["rejection_proxy"] = true;
  if (m.dominated_warning) j["dominated_warning"] = true;
  if (!m.shell_mass.empty()) j["shell_mass"] = m.shell_mass;
  return j;
}

std::vector<Rectangle> rectangles_from(const RunContext& ctx) {
  const json& p = ctx.config.params();
  if (!p.contains("rectangles")) {
    throw ConfigError("params.rectangles", "required list of {fwd, bwd}");
  }
  std::vector<Rectangle> out;
  for (const auto& spec : p.at("rectangles")) {
    out.push_back(parse_rectangle(ctx.model, spec));
  }
  if (out.empty()) throw ConfigError("params.rectangles", "must be nonempty");
  return out;
}

json rect_label(const RunContext& ctx, const Rectangle& r) {
  auto side = [&](const BoundarySet& s) {
    json parts = json::array();
    for (const auto& b : s.parts) {
      parts.push_back((b.type == BranchSet::Type::Cyl ? "" : "!") +
                      ctx.model.format_word(b.root));
    }
    return parts.size() == 1 ? parts[0] : parts;
  };
  return json{{"fwd", side(r.fwd)}, {"bwd", side(r.bwd)}};
}

double undecided_rate(const json& payload) {
  double worst = 0.0;
  if (payload.contains("undecided_rate")) {
    worst = payload.at("undecided_rate").get<double>();
  }
  if (payload.contains("rows")) {
    for (const auto& row : payload.at("rows")) {
      if (row.contains("undecided_rate")) {
        worst = std::max(worst, row.at("undecided_rate").get<double>());
      }
    }
  }
  return worst;
}

using Handler = std::function<json(const RunContext&)>;

json run_first_passage(const RunContext& ctx) {
  McParams mc{ctx.param<std::uint64_t>("replicas", 100000),
              ctx.param<int>("horizon", 0), ctx.seed, ctx.threads};
  const std::string method = ctx.param<std::string>("method", "auto");
  const Method m = method == "exact" ? Method::Exact
                   : method == "monte_carlo" ? Method::MonteCarlo
                                             : Method::Auto;
  json rows = json::array();
  if (ctx.config.params().contains("distances")) {
    for (int d : ctx.config.params().at("distances").get<std::vector<int>>()) {
      const Word y = extend_ray(ctx.model, Word{{0}}, d - 1);
      GreenEstimate e = first_passage(ctx.model, ctx.mu, Word{}, y, m, mc);
      json row = estimate_json(e);
      row["distance"] = d;
      if (exact_tree_available(ctx.model, ctx.mu)) {
        row["exact"] = tree_first_passage(ctx.model, d);
      }
      rows.push_back(row);
      mc.seed += 0x9e3779b9;
    }
  } else {
    const Word x = ctx.word("x", "");
    const Word y = ctx.word("y", "a");
    GreenEstimate e = first_passage(ctx.model, ctx.mu, x, y, m, mc);
    json row = estimate_json(e);
    row["distance"] = ctx.model.word_distance(x, y);
    rows.push_back(row);
  }
  return json{{"rows", rows}};
}

json run_green_function(const RunContext& ctx) {
  McParams mc{ctx.param<std::uint64_t>("replicas", 100000),
              ctx.param<int>("horizon", 0), ctx.seed, ctx.threads};
  const std::string method = ctx.param<std::string>("method", "auto");
  const Method m = method == "exact" ? Method::Exact
                   : method == "monte_carlo" ? Method::MonteCarlo
                                             : Method::Auto;
  const Word x = ctx.word("x", "");
  const Word y = ctx.word("y", "");
  return json{{"rows", json::array({estimate_json(
                  green_function(ctx.model, ctx.mu, x, y, m, mc))})}};
}

json run_green_metric(const RunContext& ctx) {
  McParams mc{ctx.param<std::uint64_t>("replicas", 100000),
              ctx.param<int>("horizon", 0), ctx.seed, ctx.threads};
  const Word x = ctx.word("x", "");
  const Word y = ctx.word("y", "a");
  return json{{"rows", json::array({estimate_json(
                  green_metric(ctx.model, ctx.mu, x, y, Method::Auto, mc))})}};
}

json run_restricted_green(const RunContext& ctx) {
  McParams mc{ctx.param<std::uint64_t>("replicas", 200000),
              ctx.param<int>("horizon", 0), ctx.seed, ctx.threads};
  const Word a = ctx.word("a", "a a");
  const Word b = ctx.word("b", "b b");
  const Word center = ctx.word("center", "");
  const auto radii = ctx.param<std::vector<double>>("radii", {1.0, 2.0, 3.0});
  json rows = json::array();
  const GreenEstimate unrestricted =
      green_function(ctx.model, ctx.mu, a, b, Method::MonteCarlo, mc);
  for (double r : radii) {
    // same seed across radii: common random numbers keep the grid monotone
    BallSpec ball{center, r, Metric::Word};
    GreenEstimate e = restricted_green(ctx.model, ctx.mu, a, b, ball, mc);
    json row = estimate_json(e);
    row["radius"] = r;
    rows.push_back(row);
  }
  return json{{"rows", rows}, {"unrestricted", estimate_json(unrestricted)}};
}

json run_ancona(const RunContext& ctx) {
  McParams mc{ctx.param<std::uint64_t>("replicas", 200000),
              ctx.param<int>("horizon", 0), ctx.seed, ctx.threads};
  const Word x = ctx.word("x", "-a -a");
  const Word v = ctx.word("v", "");
  const Word y = ctx.word("y", "a a");
  return json{{"rows", json::array({estimate_json(ancona_ratio(
                  ctx.model, ctx.mu, x, v, y, Method::Auto, mc))})}};
}

json run_escape(const RunContext& ctx) {
  const auto report = interlacement_compare(
      ctx.model, ctx.mu, ctx.word("k", "a"),
      ctx.param<std::uint64_t>("replicas", 1000000), ctx.seed, ctx.threads);
  return json{{"value", report.qstar_hit},
              {"std_error", report.qstar_hit_se},
              {"exact", report.qstar_exact}};
}

json run_drift(const RunContext& ctx) {
  const int n = ctx.param<int>("length", 200);
  const std::uint64_t replicas = ctx.param<std::uint64_t>("replicas", 100000);
  struct Accum {
    OnlineStats stats;
    void merge(const Accum& o) { stats.merge(o.stats); }
  };
  const GroupModel& model = ctx.model;
  const StepDistribution& mu = ctx.mu;
  auto body = [&](std::uint64_t i, Accum& acc) {
    StreamRng rng(ctx.seed, i);
    FreeWalker w(model, Word{});
    for (int t = 0; t < n; ++t) w.step(mu.sample(rng));
    acc.stats.add(static_cast<double>(w.length()) / n);
  };
  Accum acc = parallel_accumulate<Accum>(replicas, body, ctx.threads);
  return json{{"length", n},
              {"speed", acc.stats.mean()},
              {"std_error", acc.stats.std_error()}};
}

json run_domain_fraction(const RunContext& ctx) {
  const auto r = domain_fraction(ctx.model, ctx.mu, ctx.word("origin", ""),
                                 ctx.param<int>("halfwidth", 200),
                                 ctx.param<std::uint64_t>("replicas", 200000),
                                 ctx.seed, ctx.threads);
  return json{{"yes", r.yes_fraction},      {"yes_se", r.yes_se},
              {"no", r.no_fraction},        {"undecided_rate", r.undecided_fraction},
              {"replicas", r.replicas},     {"seed", r.seed}};
}

json run_harmonic(const RunContext& ctx) {
  McParams mc{ctx.param<std::uint64_t>("replicas", 200000),
              ctx.param<int>("horizon", 0), ctx.seed, ctx.threads};
  const std::string method = ctx.param<std::string>("method", "auto");
  const Method m = method == "exact" ? Method::Exact
                   : method == "monte_carlo" ? Method::MonteCarlo
                                             : Method::Auto;
  const Word base = ctx.word("basepoint", "");
  json rows = json::array();
  const json& p = ctx.config.params();
  if (!p.contains("cylinders")) {
    throw ConfigError("params.cylinders", "required list of root words");
  }
  for (const auto& spec : p.at("cylinders")) {
    const BoundarySet set = parse_boundary_set(ctx.model, spec);
    GreenEstimate e = harmonic_measure(ctx.model, ctx.mu, set, base, m, mc);
    json row = estimate_json(e);
    row["set"] = spec;
    row["undecided_rate"] = e.tail_bound;
    rows.push_back(row);
    mc.seed += 0x9e3779b9;
  }
  return json{{"rows", rows}};
}

json run_shadow_band(const RunContext& ctx) {
  McParams mc{ctx.param<std::uint64_t>("replicas", 2000000),
              ctx.param<int>("horizon", 0), ctx.seed, ctx.threads};
  const double thickness =
      ctx.param<double>("thickness", tree_green_scale(ctx.model));
  const auto distances =
      ctx.param<std::vector<int>>("distances", {1, 2, 3, 4, 5, 6, 7, 8});
  const std::string method = ctx.param<std::string>("method", "monte_carlo");
  const Method m = method == "exact" ? Method::Exact : Method::MonteCarlo;
  const double scale = tree_green_scale(ctx.model);
  json rows = json::array();
  double lo = 1e300, hi = 0.0;
  // one ray serves every distance: targets are its prefixes
  const Word ray = extend_ray(ctx.model, Word{{0}},
                              *std::max_element(distances.begin(), distances.end()));
  for (int d : distances) {
    Word x;
    x.letters.assign(ray.letters.begin(), ray.letters.begin() + d);
    Shadow s{Word{}, x, thickness};
    GreenEstimate e = shadow_mass(ctx.model, ctx.mu, s, m, mc);
    const double statistic = e.value * std::exp(scale * d);
    lo = std::min(lo, statistic);
    hi = std::max(hi, statistic);
    json row = estimate_json(e);
    row["distance"] = d;
    row["statistic"] = statistic;
    row["exact_mass"] = harmonic_exact(ctx.model, shadow_set(ctx.model, s), Word{});
    rows.push_back(row);
    mc.seed += 0x9e3779b9;
  }
  return json{{"rows", rows},
              {"thickness", thickness},
              {"band_ratio", hi > 0 ? hi / std::max(lo, 1e-300) : 0.0}};
}

json run_conformal(const RunContext& ctx) {
  const Word x = ctx.word("x", "a");
  std::vector<Cylinder> family;
  const json& p = ctx.config.params();
  if (p.contains("cylinders")) {
    for (const auto& spec : p.at("cylinders")) {
      family.push_back(Cylinder{ctx.model.parse_word(spec.get<std::string>())});
    }
  } else {
    for (Letter c = 0; c < ctx.model.alphabet().size(); ++c) {
      family.push_back(Cylinder{extend_ray(ctx.model, Word{{c}}, x.length() + 1)});
    }
  }
  const ConformalReport r = conformal_density_check(ctx.model, ctx.mu, x, family);
  return json{{"max_abs_log_dev", r.max_abs_log_dev},
              {"cells_checked", r.cells_checked},
              {"cells_undecided", r.cells_undecided}};
}

json run_theta1(const RunContext& ctx) {
  const int cesaro = ctx.param<int>("cesaro_depth", 1000);
  json rows = json::array();
  for (const Rectangle& rect : rectangles_from(ctx)) {
    const Theta1Result r = theta1_density(ctx.model, rect, cesaro);
    rows.push_back(json{{"rect", rect_label(ctx, rect)},
                        {"value", r.value},
                        {"limit", r.limit},
                        {"rel_error", std::abs(r.value / r.limit - 1.0)},
                        {"origin_term", r.trace.front()}});
  }
  return json{{"rows", rows}, {"cesaro_depth", cesaro}};
}

json run_theta2(const RunContext& ctx) {
  Theta2Params params;
  params.windows = ctx.param<std::uint64_t>("windows", 400000);
  params.cesaro_depth = ctx.param<int>("cesaro_depth", 25);
  params.halfwidth = ctx.param<int>("halfwidth", 0);
  params.seed = ctx.seed;
  params.threads = ctx.threads;
  json rows = json::array();
  for (const Rectangle& rect : rectangles_from(ctx)) {
    const Theta2Report r = theta2_mass(ctx.model, ctx.mu, rect, params);
    const double hbms = hbms_mass(ctx.model, rect);
    json row = measure_json(r.report);
    row["rect"] = rect_label(ctx, rect);
    row["hbms"] = hbms;
    row["ratio"] = hbms > 0 ? r.report.value / hbms : 0.0;
    row["bound_violations"] = r.bound_violations;
    row["undecided_rate"] =
        r.report.samples
            ? static_cast<double>(r.report.undecided) / r.report.samples
            : 0.0;
    rows.push_back(row);
    params.seed += 0x9e3779b9;
  }
  return json{{"rows", rows}};
}

json run_theta3(const RunContext& ctx) {
  QhatParams params;
  params.origin_radius = ctx.param<int>("origin_radius", 8);
  params.replicas = ctx.param<std::uint64_t>("replicas", 100000);
  params.halfwidth = ctx.param<int>("halfwidth", 128);
  params.seed = ctx.seed;
  params.threads = ctx.threads;
  json rows = json::array();
  for (const Rectangle& rect : rectangles_from(ctx)) {
    const MeasureReport r = qhat_mass(ctx.model, ctx.mu, rect, params);
    const double hbms = hbms_mass(ctx.model, rect);
    json row = measure_json(r);
    row["rect"] = rect_label(ctx, rect);
    row["hbms"] = hbms;
    row["ratio"] = hbms > 0 ? r.value / hbms : 0.0;
    row["ratio_se"] = hbms > 0 ? r.std_error / hbms : 0.0;
    row["undecided_rate"] =
        r.samples ? static_cast<double>(r.undecided) / r.samples : 0.0;
    rows.push_back(row);
    params.seed += 0x9e3779b9;
  }
  return json{{"rows", rows}};
}

json run_hbms(const RunContext& ctx) {
  json rows = json::array();
  for (const Rectangle& rect : rectangles_from(ctx)) {
    rows.push_back(json{{"rect", rect_label(ctx, rect)},
                        {"value", hbms_mass(ctx.model, rect)}});
  }
  return json{{"rows", rows}};
}

json run_invariance(const RunContext& ctx) {
  const std::string target = ctx.param<std::string>("target", "theta3");
  const MeasureTarget t =
      target == "theta1" ? MeasureTarget::Theta1 : MeasureTarget::Theta3;
  QhatParams params;
  params.origin_radius = ctx.param<int>("origin_radius", 8);
  params.replicas = ctx.param<std::uint64_t>("replicas", 100000);
  params.halfwidth = ctx.param<int>("halfwidth", 128);
  params.seed = ctx.seed;
  params.threads = ctx.threads;
  const auto g_words =
      ctx.param<std::vector<std::string>>("translations", {"a", "b", "a b"});
  json rows = json::array();
  for (const Rectangle& rect : rectangles_from(ctx)) {
    for (const std::string& g_text : g_words) {
      const Word g = ctx.model.parse_word(g_text);
      const RatioReport r = g_invariance_check(t, ctx.model, ctx.mu, g, rect, params);
      rows.push_back(json{{"rect", rect_label(ctx, rect)},
                          {"g", g_text},
                          {"ratio", r.ratio},
                          {"std_error", r.std_error},
                          {"exact", r.exact}});
      params.seed += 0x9e3779b9;
    }
  }
  return json{{"rows", rows}, {"target", target}};
}

json run_interlacement(const RunContext& ctx) {
  const auto targets =
      ctx.param<std::vector<std::string>>("targets", {"a", "a b", "a b a"});
  const std::uint64_t replicas = ctx.param<std::uint64_t>("replicas", 200000);
  json rows = json::array();
  std::uint64_t seed = ctx.seed;
  for (const std::string& text : targets) {
    const Word k = ctx.model.parse_word(text);
    const InterlacementReport r =
        interlacement_compare(ctx.model, ctx.mu, k, replicas, seed, ctx.threads);
    json origins = json::array();
    for (const auto& o : r.origins) {
      origins.push_back(json{{"origin", ctx.model.format_word(o.origin)},
                             {"dist_to_target", o.dist_to_target},
                             {"dist_to_base", o.dist_to_base},
                             {"c1", o.c1},
                             {"c1_se", o.c1_se},
                             {"c2", o.c2},
                             {"c2_se", o.c2_se},
                             {"hit_prob", o.hit_prob},
                             {"hit_se", o.hit_se}});
    }
    rows.push_back(json{{"target", text},
                        {"distance", k.length()},
                        {"qhat_hit", r.qhat_hit},
                        {"qhat_hit_se", r.qhat_hit_se},
                        {"qstar_hit", r.qstar_hit},
                        {"qstar_hit_se", r.qstar_hit_se},
                        {"qstar_exact", r.qstar_exact},
                        {"origins", origins}});
    seed += 0x9e3779b9;
  }
  return json{{"rows", rows}};
}

json run_q_shift(const RunContext& ctx) {
  IncrementEvent event;
  event.offset = ctx.param<int>("offset", 0);
  const auto pattern = ctx.param<std::vector<std::string>>("pattern", {"a"});
  for (const auto& tok : pattern) {
    event.pattern.push_back(ctx.model.alphabet().parse_token(tok));
  }
  const QShiftReport r = q_shift_invariance(
      ctx.model, ctx.mu, event, ctx.param<int>("z", 1),
      ctx.param<int>("ball_radius", 1),
      ctx.param<std::uint64_t>("replicas", 100000), ctx.seed, ctx.threads);
  return json{{"mass", r.mass},
              {"shifted_mass", r.shifted_mass},
              {"ratio", r.ratio},
              {"std_error", r.std_error},
              {"origins", r.origins}};
}

CurveParams curve_params(const RunContext& ctx, int n) {
  CurveParams p;
  p.path_length = n;
  p.grid_points = ctx.param<int>("grid_points", 6);
  p.replicas = ctx.param<std::uint64_t>("replicas", 100000);
  p.seed = ctx.seed;
  p.threads = ctx.threads;
  p.bootstrap_resamples = ctx.param<int>("bootstrap_resamples", 200);
  return p;
}

json run_deviation(const RunContext& ctx) {
  const auto lengths = ctx.param<std::vector<int>>("lengths", {100, 200, 400});
  json rows = json::array();
  for (int n : lengths) {
    CurveParams p = curve_params(ctx, n);
    p.seed = ctx.seed + static_cast<std::uint64_t>(n) * 0x9e3779b9;
    const CurveReport r = deviation_curve(ctx.model, ctx.mu, p);
    json row = curve_json(r);
    row["length"] = n;
    row["undecided_rate"] =
        r.replicas ? static_cast<double>(r.undecided) / (r.replicas + r.undecided) : 0.0;
    rows.push_back(row);
  }
  return json{{"rows", rows}};
}

json run_conditional_deviation(const RunContext& ctx) {
  const int n = ctx.param<int>("length", 200);
  std::vector<Cylinder> cylinders;
  const json& p = ctx.config.params();
  if (p.contains("cylinders")) {
    for (const auto& spec : p.at("cylinders")) {
      cylinders.push_back(Cylinder{ctx.model.parse_word(spec.get<std::string>())});
    }
  } else {
    for (Letter c = 0; c < ctx.model.alphabet().size(); ++c) {
      cylinders.push_back(Cylinder{Word{{c}}});
    }
  }
  const auto curves =
      conditional_deviation_curves(ctx.model, ctx.mu, cylinders, curve_params(ctx, n));
  json rows = json::array();
  for (const auto& c : curves) rows.push_back(curve_json(c));
  return json{{"rows", rows}, {"length", n}};
}

json run_pair_gromov(const RunContext& ctx) {
  const int n = ctx.param<int>("length", 200);
  const PairGromovReport r = pair_gromov_curve(ctx.model, ctx.mu, curve_params(ctx, n));
  return json{{"rows", json::array({curve_json(r.at_time_n),
                                    curve_json(r.against_limit)})},
              {"length", n}};
}

json run_nonsingularity(const RunContext& ctx) {
  const NonsingularityReport r = nonsingularity_scan(
      ctx.model, ctx.mu, ctx.param<int>("depth", 4),
      ctx.param<std::uint64_t>("replicas", 400000), ctx.seed, ctx.threads);
  json rows = json::array();
  for (std::size_t k = 0; k < r.match_fraction.size(); ++k) {
    rows.push_back(json{{"depth", k + 1},
                        {"match", r.match_fraction[k]},
                        {"std_error", r.std_errors[k]},
                        {"product_exact", r.product_exact[k]}});
  }
  return json{{"rows", rows},
              {"undecided_rate", static_cast<double>(r.undecided) / r.replicas}};
}

json run_almost_geodesic(const RunContext& ctx) {
  const auto halfwidths = ctx.param<std::vector<int>>("halfwidths", {100, 200, 400});
  json rows = json::array();
  std::uint64_t seed = ctx.seed;
  for (int n : halfwidths) {
    const AlmostGeodesicReport r = almost_geodesic_scan(
        ctx.model, ctx.mu, n, ctx.param<std::uint64_t>("replicas", 20000), seed,
        ctx.threads);
    rows.push_back(json{{"halfwidth", n},
                        {"q50", r.q50},
                        {"q90", r.q90},
                        {"q95", r.q95},
                        {"max", r.max}});
    seed += 0x9e3779b9;
  }
  return json{{"rows", rows}};
}

json run_birkhoff(const RunContext& ctx) {
  const auto horizons =
      ctx.param<std::vector<std::uint64_t>>("horizons", {100, 1000});
  const std::uint64_t replicas = ctx.param<std::uint64_t>("replicas", 4000);
  json rows = json::array();
  for (const WindowFunctional f : {WindowFunctional::FirstIncrementIsA,
                                   WindowFunctional::TwoStepNoCancellation}) {
    const BirkhoffReport r =
        birkhoff_average(ctx.model, ctx.mu, f, horizons, replicas, ctx.seed,
                         ctx.threads);
    json per = json::array();
    for (std::size_t i = 0; i < r.horizons.size(); ++i) {
      per.push_back(json{{"T", r.horizons[i]},
                         {"mean", r.grand_mean[i]},
                         {"spread", r.spread[i]}});
    }
    rows.push_back(json{
        {"functional", f == WindowFunctional::FirstIncrementIsA
                           ? "first_increment_is_a"
                           : "two_step_no_cancellation"},
        {"horizons", per},
        {"direct_expectation", r.direct_expectation},
        {"direct_se", r.direct_se},
        {"exact_expectation", functional_expectation(ctx.model, ctx.mu, f)}});
  }
  return json{{"rows", rows}};
}

json run_shift_independence(const RunContext& ctx) {
  const auto ms = ctx.param<std::vector<int>>("m", {25, 50, 100});
  const int repeats = ctx.param<int>("repeats", 100);
  const std::uint64_t walks = ctx.param<std::uint64_t>("walks_per_repeat", 10000);
  json rows = json::array();
  std::uint64_t seed = ctx.seed;
  for (int m : ms) {
    const ShiftIndependenceReport r = shift_independence_test(
        ctx.model, ctx.mu, m, repeats, walks, seed, ctx.threads);
    rows.push_back(json{{"m", m},
                        {"ks_statistic", r.ks.statistic},
                        {"ks_pvalue", r.ks.pvalue},
                        {"pvalues", r.pvalues},
                        {"backward_marginal", r.backward_marginal}});
    seed += 0x9e3779b9;
  }
  return json{{"rows", rows}};
}

const std::map<std::string, Handler>& registry() {
  static const std::map<std::string, Handler> reg = {
      {"green.first_passage", run_first_passage},
      {"green.function", run_green_function},
      {"green.metric", run_green_metric},
      {"green.restricted", run_restricted_green},
      {"green.ancona", run_ancona},
      {"walks.escape", run_escape},
      {"walks.drift", run_drift},
      {"walks.domain_fraction", run_domain_fraction},
      {"boundary.harmonic", run_harmonic},
      {"boundary.shadow_band", run_shadow_band},
      {"boundary.conformal", run_conformal},
      {"measures.theta1", run_theta1},
      {"measures.theta2", run_theta2},
      {"measures.theta3", run_theta3},
      {"measures.hbms", run_hbms},
      {"measures.invariance", run_invariance},
      {"measures.interlacement", run_interlacement},
      {"measures.q_shift", run_q_shift},
      {"deviation.curve", run_deviation},
      {"deviation.conditional", run_conditional_deviation},
      {"deviation.pair_gromov", run_pair_gromov},
      {"deviation.nonsingularity", run_nonsingularity},
      {"deviation.almost_geodesic", run_almost_geodesic},
      {"ergodic.birkhoff", run_birkhoff},
      {"ergodic.shift_independence", run_shift_independence},
  };
  return reg;
}

}  // namespace

std::vector<std::string> list_experiments() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

ResultRecord run_experiment(const Config& config) {
  const auto it = registry().find(config.experiment());
  if (it == registry().end()) {
    throw ConfigError("experiment",
                      "unknown experiment '" + config.experiment() + "'");
  }
  GroupModel model = config.build_model();
  StepDistribution mu = config.build_mu(model);
  RunContext ctx{config, std::move(model), std::move(mu), config.seed(),
                 resolve_threads(config.threads())};

  const auto t0 = std::chrono::steady_clock::now();
  json payload = it->second(ctx);
  const auto t1 = std::chrono::steady_clock::now();

  ResultRecord record;
  record.version = kVersion;
  record.config_hash = config.hash();
  record.seed = config.seed();
  record.experiment = config.experiment();
  record.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  record.payload = std::move(payload);
  return record;
}

int run_and_persist(const Config& config, std::string* record_path) {
  const ResultRecord record = run_experiment(config);
  std::string name = config.experiment();
  for (auto& c : name) {
    if (c == '.') c = '_';
  }
  const std::string path = config.out_dir() + "/" + name + ".jsonl";
  RecordWriter writer(path);
  writer.write(record);
  if (record_path) *record_path = path;
  if (undecided_rate(record.payload) > config.undecided_max()) {
    return kExitUndecidedBreach;
  }
  return kExitOk;
}

}  // namespace hypflow
