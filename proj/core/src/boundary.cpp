#include "hypflow/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hypflow/parallel.hpp"
#include "hypflow/stats.hpp"

namespace hypflow {

void validate_cylinder(const GroupModel& model, const Cylinder& c) {
  if (c.root.is_identity()) {
    throw std::invalid_argument("cylinder root must be a nonempty reduced word");
  }
  model.validate_letters(c.root.letters);
  Word reduced = model.reduce(c.root.letters);
  if (!(reduced == c.root)) {
    throw std::invalid_argument("cylinder root must be in normal form");
  }
}

bool roots_nested(const Word& a, const Word& b) {
  const int cp = GroupModel::common_prefix(a, b);
  return cp == a.length() || cp == b.length();
}

namespace {

bool is_prefix(const Word& p, const Word& w) {
  return p.length() <= w.length() &&
         GroupModel::common_prefix(p, w) == p.length();
}

// Does the branch set contain the whole boundary of the branch through `w`?
// Used for disjointness of unions: two branch parts intersect iff a cylinder
// root nests inside the other part's region.
bool branch_intersects(const BranchSet& a, const BranchSet& b) {
  if (a.type == BranchSet::Type::Cyl && b.type == BranchSet::Type::Cyl) {
    return roots_nested(a.root, b.root);
  }
  if (a.type == BranchSet::Type::CoCyl && b.type == BranchSet::Type::CoCyl) {
    return true;  // two complements always share deep rays
  }
  const BranchSet& cyl = a.type == BranchSet::Type::Cyl ? a : b;
  const BranchSet& co = a.type == BranchSet::Type::Cyl ? b : a;
  // cyl(u) and complement of cyl(v) are disjoint iff cyl(u) inside cyl(v),
  // i.e. v a prefix of u.
  return !is_prefix(co.root, cyl.root);
}

}  // namespace

void validate_rectangle(const GroupModel& model, const Rectangle& r) {
  auto validate_set = [&](const BoundarySet& s) {
    if (s.parts.empty()) throw std::invalid_argument("empty boundary set");
    for (const auto& b : s.parts) {
      validate_cylinder(model, Cylinder{b.root});
    }
    for (std::size_t i = 0; i < s.parts.size(); ++i) {
      for (std::size_t j = i + 1; j < s.parts.size(); ++j) {
        if (branch_intersects(s.parts[i], s.parts[j])) {
          throw std::invalid_argument("boundary set parts must be disjoint");
        }
      }
    }
  };
  validate_set(r.fwd);
  validate_set(r.bwd);
  for (const auto& a : r.fwd.parts) {
    for (const auto& b : r.bwd.parts) {
      if (branch_intersects(a, b)) {
        throw std::invalid_argument(
            "rectangle sides must be disjoint (double boundary removes the diagonal)");
      }
    }
  }
}

BranchSet translate(const GroupModel& model, const Word& g, const BranchSet& b) {
  if (!model.is_tree()) {
    throw std::invalid_argument("branch translation implemented on tree models");
  }
  // The branch of cyl(w) is the component of the edge parent(w) -> w not
  // containing o; translate the edge and reread it relative to o.
  Word parent = b.root;
  parent.letters.pop_back();
  const Word gu = model.multiply(g, parent);
  const Word gw = model.multiply(g, b.root);
  BranchSet out;
  if (gw.length() == gu.length() + 1) {
    // still directed away from o
    out.type = b.type;
    out.root = gw;
  } else {
    // the translated edge points toward o: the component of gw is the
    // complement of the branch below gu
    out.type = b.type == BranchSet::Type::Cyl ? BranchSet::Type::CoCyl
                                              : BranchSet::Type::Cyl;
    out.root = gu;
  }
  if (out.root.is_identity()) {
    throw std::invalid_argument("translated branch degenerates at the basepoint");
  }
  return out;
}

BoundarySet translate(const GroupModel& model, const Word& g, const BoundarySet& s) {
  BoundarySet out;
  out.parts.reserve(s.parts.size());
  for (const auto& b : s.parts) out.parts.push_back(translate(model, g, b));
  return out;
}

Rectangle translate(const GroupModel& model, const Word& g, const Rectangle& r) {
  return Rectangle{translate(model, g, r.fwd), translate(model, g, r.bwd)};
}

std::vector<Cylinder> to_cylinders(const GroupModel& model, const BranchSet& b) {
  if (!model.is_tree()) {
    throw std::invalid_argument("cylinder decomposition requires a tree model");
  }
  if (b.type == BranchSet::Type::Cyl) return {Cylinder{b.root}};
  // Complement of cyl(w): all branches hanging off the interior of [o, w].
  std::vector<Cylinder> out;
  const auto& alpha = model.alphabet();
  Word prefix;
  for (int depth = 0; depth < b.root.length(); ++depth) {
    const Letter next = b.root.letters[depth];
    for (Letter c = 0; c < alpha.size(); ++c) {
      if (c == next) continue;
      if (depth > 0 && c == alpha.inverse(b.root.letters[depth - 1])) continue;
      Word root = prefix;
      root.letters.push_back(c);
      out.push_back(Cylinder{std::move(root)});
    }
    prefix.letters.push_back(next);
  }
  return out;
}

std::vector<Cylinder> to_cylinders(const GroupModel& model, const BoundarySet& s) {
  std::vector<Cylinder> out;
  for (const auto& b : s.parts) {
    auto piece = to_cylinders(model, b);
    out.insert(out.end(), piece.begin(), piece.end());
  }
  return out;
}

Word extend_ray(const GroupModel& model, const Word& root, int depth) {
  Word out = root;
  const auto& alpha = model.alphabet();
  while (out.length() < root.length() + depth) {
    for (Letter c = 0; c < alpha.size(); ++c) {
      if (!out.letters.empty()) {
        const Letter last = out.letters.back();
        if (c == alpha.inverse(last)) continue;
        // off trees, same-factor letters merge syllables instead of extending
        if (!model.is_tree() && alpha.base_index(c) == alpha.base_index(last)) {
          continue;
        }
      }
      out.letters.push_back(c);
      break;
    }
  }
  return out;
}

double harmonic_exact(const GroupModel& model, const BranchSet& b,
                      const Word& basepoint) {
  if (!model.is_tree()) {
    throw std::invalid_argument("exact harmonic measure requires the F_q SRW");
  }
  const int q2 = 2 * model.free_rank();
  const double stay = static_cast<double>(q2 - 1) / q2;
  const Word& w = b.root;
  double cyl_mass;
  if (is_prefix(w, basepoint)) {
    // basepoint inside the branch (or at its root): complementary flow
    // leaves through the parent of w.
    Word parent = w;
    parent.letters.pop_back();
    cyl_mass = 1.0 - tree_first_passage(model, model.word_distance(basepoint, parent)) * stay;
  } else {
    cyl_mass = tree_first_passage(model, model.word_distance(basepoint, w)) * stay;
  }
  return b.type == BranchSet::Type::Cyl ? cyl_mass : 1.0 - cyl_mass;
}

double harmonic_exact(const GroupModel& model, const BoundarySet& s,
                      const Word& basepoint) {
  double total = 0.0;
  for (const auto& b : s.parts) total += harmonic_exact(model, b, basepoint);
  return total;
}

int membership_margin(const GroupModel& model, double cert_tol) {
  const double scale = tree_green_scale(model);
  return static_cast<int>(std::ceil(-std::log(cert_tol) / scale)) + 1;
}

namespace {

LimitMembership limit_in_branch(const GroupModel& model, const BranchSet& b,
                                const Word& deep, double cert_tol) {
  const double rho = 1.0 / (2.0 * model.free_rank() - 1.0);
  LimitMembership m;
  const bool inside = is_prefix(b.root, deep) && deep.length() > b.root.length();
  int margin;
  if (inside) {
    margin = deep.length() - b.root.length();
  } else {
    // to change verdict the ray must erase back to the divergence depth
    const int cp = GroupModel::common_prefix(b.root, deep);
    margin = deep.length() - cp;
  }
  m.residual_bound = std::pow(rho, margin);
  if (m.residual_bound > cert_tol) {
    m.decision = Ternary::Undecided;
    return m;
  }
  const bool in_cyl = inside;
  const bool member = b.type == BranchSet::Type::Cyl ? in_cyl : !in_cyl;
  m.decision = member ? Ternary::Yes : Ternary::No;
  return m;
}

}  // namespace

LimitMembership limit_in(const GroupModel& model, const BoundarySet& set,
                         const Word& deep_position, double cert_tol) {
  if (!model.is_tree()) {
    throw std::invalid_argument("certified limit membership requires a tree model");
  }
  LimitMembership out;
  out.decision = Ternary::No;
  out.residual_bound = 0.0;
  for (const auto& b : set.parts) {
    const LimitMembership m = limit_in_branch(model, b, deep_position, cert_tol);
    out.residual_bound = std::max(out.residual_bound, m.residual_bound);
    if (m.decision == Ternary::Yes) {
      out.decision = Ternary::Yes;
      return out;
    }
    if (m.decision == Ternary::Undecided) out.decision = Ternary::Undecided;
  }
  return out;
}

GreenEstimate harmonic_measure(const GroupModel& model, const StepDistribution& mu,
                               const BoundarySet& set, const Word& basepoint,
                               Method method, McParams params) {
  for (const auto& b : set.parts) validate_cylinder(model, Cylinder{b.root});
  const bool exact_ok = exact_tree_available(model, mu);
  if (method == Method::Exact && !exact_ok) {
    throw std::invalid_argument("exact harmonic measure needs the free-group SRW");
  }
  if (method != Method::MonteCarlo && exact_ok) {
    GreenEstimate est;
    est.value = harmonic_exact(model, set, basepoint);
    est.provenance = Provenance::ExactTree;
    return est;
  }
  if (!model.is_tree()) {
    throw std::invalid_argument(
        "monte carlo harmonic measure for non-tree models is out of scope");
  }
  int deepest = 0;
  for (const auto& b : set.parts) deepest = std::max(deepest, b.root.length());
  const int margin = membership_margin(model, 1e-9);
  const int steps = params.horizon > 0
                        ? params.horizon
                        : 4 * (basepoint.length() + deepest + margin) + 40;

  struct Accum {
    BinomialEst est;
    std::uint64_t undecided = 0;
    void merge(const Accum& o) {
      est.merge(o.est);
      undecided += o.undecided;
    }
  };
  auto body = [&](std::uint64_t i, Accum& acc) {
    StreamRng rng(params.seed, i);
    FreeWalker walker(model, basepoint);
    for (int t = 0; t < steps; ++t) walker.step(mu.sample(rng));
    const LimitMembership m = limit_in(model, set, walker.word(), 1e-9);
    if (m.decision == Ternary::Undecided) {
      ++acc.undecided;
      acc.est.add(false);  // counted in trials; never silently dropped
    } else {
      acc.est.add(m.decision == Ternary::Yes);
    }
  };
  const auto acc = parallel_accumulate<Accum>(params.replicas, body,
                                              resolve_threads(params.threads));
  GreenEstimate est;
  est.value = acc.est.p();
  est.std_error = acc.est.se();
  est.samples = acc.est.trials;
  est.provenance = Provenance::MonteCarlo;
  // undecided walks count as misses; their rate is the one-sided bias bound
  est.tail_bound =
      acc.est.trials ? static_cast<double>(acc.undecided) / acc.est.trials : 0.0;
  est.horizon_warning = est.tail_bound > std::max(3.0 * est.std_error, 1e-6);
  return est;
}

BoundarySet shadow_set(const GroupModel& model, const Shadow& s) {
  if (!model.is_tree()) {
    throw std::invalid_argument("shadow decomposition requires a tree model");
  }
  if (s.thickness < 0.0) throw std::invalid_argument("shadow thickness must be >= 0");
  if (!s.viewpoint.is_identity()) {
    // translate to the viewpoint, decompose, translate back
    const Word inv = model.inverse(s.viewpoint);
    Shadow based{Word{}, model.multiply(inv, s.target), s.thickness};
    return translate(model, s.viewpoint, shadow_set(model, based));
  }
  const double scale = tree_green_scale(model);
  const int dist = s.target.length();
  // members: (a, x)_o >= d_G(o,x) - R, i.e. prefix depth >= |x| - R/scale
  const int t = static_cast<int>(std::ceil(static_cast<double>(dist) - s.thickness / scale));
  BoundarySet out;
  if (t <= 0) {
    // the whole boundary: the union of the depth-1 cylinders
    for (Letter c = 0; c < model.alphabet().size(); ++c) {
      out.parts.push_back(BranchSet::cyl(Word{{c}}));
    }
    return out;
  }
  Word root;
  root.letters.assign(s.target.letters.begin(), s.target.letters.begin() + t);
  out.parts.push_back(BranchSet::cyl(std::move(root)));
  return out;
}

GreenEstimate shadow_mass(const GroupModel& model, const StepDistribution& mu,
                          const Shadow& s, Method method, McParams params) {
  const BoundarySet set = shadow_set(model, s);
  return harmonic_measure(model, mu, set, s.viewpoint, method, params);
}

ConformalReport conformal_density_check(const GroupModel& model,
                                        const StepDistribution& mu, const Word& x,
                                        const std::vector<Cylinder>& family) {
  if (!exact_tree_available(model, mu)) {
    throw std::invalid_argument("conformal density check runs on the F_q SRW");
  }
  ConformalReport report;
  for (const Cylinder& c : family) {
    validate_cylinder(model, c);
    const BusemannResult b = busemann(model, mu, c, x, Word{});
    if (!b.stabilized) {
      ++report.cells_undecided;
      continue;
    }
    const double ratio = harmonic_exact(model, BranchSet::cyl(c.root), x) /
                         harmonic_exact(model, BranchSet::cyl(c.root), Word{});
    report.max_abs_log_dev =
        std::max(report.max_abs_log_dev, std::abs(std::log(ratio) + b.value));
    ++report.cells_checked;
  }
  return report;
}

}  // namespace hypflow
