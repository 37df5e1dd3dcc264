#include "hypflow/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypflow {

StepDistribution StepDistribution::uniform(const GroupModel& model) {
  const int n = model.alphabet_size();
  return from_weights(model, std::vector<double>(n, 1.0 / n));
}

StepDistribution StepDistribution::from_weights(const GroupModel& model,
                                                std::vector<double> weights) {
  if (static_cast<int>(weights.size()) != model.alphabet_size()) {
    throw std::invalid_argument("step weights must cover the model alphabet");
  }
  double total = 0.0;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    if (weights[c] <= 0.0) {
      throw std::invalid_argument(
          "step weight for '" + model.alphabet().name(static_cast<Letter>(c)) +
          "' must be positive (support = alphabet)");
    }
    if (weights[c] != weights[model.alphabet().inverse(static_cast<Letter>(c))]) {
      throw std::invalid_argument(
          "step distribution must be exactly symmetric: mu(s) == mu(s^-1), "
          "violated at '" + model.alphabet().name(static_cast<Letter>(c)) + "'");
    }
    total += weights[c];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("step weights must sum to 1 within 1e-12");
  }
  StepDistribution d;
  d.weights_ = std::move(weights);
  d.cdf_.resize(d.weights_.size());
  double acc = 0.0;
  bool uni = true;
  for (std::size_t c = 0; c < d.weights_.size(); ++c) {
    acc += d.weights_[c];
    d.cdf_[c] = acc;
    uni = uni && std::abs(d.weights_[c] - d.weights_[0]) < 1e-15;
  }
  d.cdf_.back() = 1.0;
  d.uniform_ = uni;
  return d;
}

Letter StepDistribution::sample(StreamRng& rng) const {
  if (uniform_) {
    return static_cast<Letter>(rng.below(static_cast<std::uint32_t>(weights_.size())));
  }
  return static_cast<Letter>(rng.categorical(cdf_));
}

bool exact_tree_available(const GroupModel& model, const StepDistribution& mu) {
  return model.is_tree() && mu.is_uniform();
}

double tree_green_scale(const GroupModel& model) {
  if (!model.is_tree()) {
    throw std::invalid_argument("green scale is exact only on free models");
  }
  return std::log(2.0 * model.free_rank() - 1.0);
}

WalkPath sample_walk(const GroupModel& model, const StepDistribution& mu,
                     const Word& start, int length, StreamRng rng) {
  if (length < 0) throw std::invalid_argument("walk length must be >= 0");
  model.validate_letters(start.letters);
  WalkPath p;
  p.start = start;
  p.increments.reserve(length);
  for (int i = 0; i < length; ++i) p.increments.push_back(mu.sample(rng));
  return p;
}

std::vector<Word> walk_positions(const GroupModel& model, const WalkPath& path) {
  std::vector<Word> out;
  out.reserve(path.increments.size() + 1);
  Word cur = path.start;
  out.push_back(cur);
  for (Letter s : path.increments) {
    cur = model.multiply(cur, Word{{s}});
    out.push_back(cur);
  }
  return out;
}

std::pair<WalkPath, WalkPath> shift_back(const GroupModel& model,
                                         const WalkPath& path, int m) {
  if (m < 0 || m > path.length()) {
    throw std::out_of_range("shift_back index outside path");
  }
  WalkPath backward, forward;
  backward.start = Word{};
  forward.start = Word{};
  backward.increments.reserve(m);
  for (int j = m; j >= 1; --j) {
    backward.increments.push_back(model.alphabet().inverse(path.increments[j - 1]));
  }
  forward.increments.assign(path.increments.begin() + m, path.increments.end());
  return {std::move(backward), std::move(forward)};
}

Letter BiWindow::chain_increment(const GroupModel& model, int z) const {
  if (z > hi || z <= lo) throw std::out_of_range("chain increment index");
  if (z >= 1) return fwd[z - 1];
  // z <= 0: X_{z-1}^-1 X_z along the backward walk.
  return model.alphabet().inverse(bwd[-z]);
}

BiWindow sample_bi_window(const GroupModel& model, const StepDistribution& mu,
                          const Word& origin, int halfwidth, StreamRng rng) {
  if (halfwidth < 0) throw std::invalid_argument("halfwidth must be >= 0");
  model.validate_letters(origin.letters);
  BiWindow w;
  w.origin = origin;
  w.lo = -halfwidth;
  w.hi = halfwidth;
  StreamRng fwd_rng = rng.substream(1);
  StreamRng bwd_rng = rng.substream(2);
  w.fwd.reserve(halfwidth);
  w.bwd.reserve(halfwidth);
  for (int i = 0; i < halfwidth; ++i) w.fwd.push_back(mu.sample(fwd_rng));
  for (int i = 0; i < halfwidth; ++i) w.bwd.push_back(mu.sample(bwd_rng));
  return w;
}

Word window_position(const GroupModel& model, const BiWindow& w, int z) {
  if (z < w.lo || z > w.hi) throw std::out_of_range("window index");
  Word cur = w.origin;
  if (z >= 0) {
    for (int i = 0; i < z; ++i) cur = model.multiply(cur, Word{{w.fwd[i]}});
  } else {
    for (int i = 0; i < -z; ++i) cur = model.multiply(cur, Word{{w.bwd[i]}});
  }
  return cur;
}

std::vector<int> window_radii(const GroupModel& model, const BiWindow& w) {
  std::vector<int> radii(w.hi - w.lo + 1, 0);
  auto scan = [&](const std::vector<Letter>& inc, int count, bool forward) {
    if (model.is_tree()) {
      FreeWalker walker(model, w.origin);
      for (int i = 0; i < count; ++i) {
        walker.step(inc[i]);
        radii[forward ? (i + 1 - w.lo) : (-i - 1 - w.lo)] = walker.length();
      }
    } else {
      GenericWalker walker(model, w.origin);
      for (int i = 0; i < count; ++i) {
        walker.step(inc[i]);
        radii[forward ? (i + 1 - w.lo) : (-i - 1 - w.lo)] = walker.length();
      }
    }
  };
  radii[-w.lo] = w.origin.length();
  scan(w.fwd, w.hi, true);
  scan(w.bwd, -w.lo, false);
  return radii;
}

BiWindow tau_shift(const GroupModel& model, const BiWindow& w, int z) {
  if (std::abs(z) > w.halfwidth()) {
    throw std::out_of_range("tau shift exceeds window halfwidth");
  }
  if (z == 0) return w;
  BiWindow out;
  out.origin = w.origin;
  out.lo = z > 0 ? w.lo : w.lo - z;
  out.hi = z > 0 ? w.hi - z : w.hi;
  out.fwd.reserve(out.hi);
  out.bwd.reserve(-out.lo);
  for (int k = 1; k <= out.hi; ++k) {
    out.fwd.push_back(w.chain_increment(model, z + k));
  }
  for (int k = 1; k <= -out.lo; ++k) {
    out.bwd.push_back(model.alphabet().inverse(w.chain_increment(model, z - k + 1)));
  }
  return out;
}

DomainCheck in_fundamental_domain(const GroupModel& model, const BiWindow& w,
                                  Metric metric, double cert_tol) {
  if (metric == Metric::Green && !model.is_tree()) {
    throw std::invalid_argument(
        "green-metric domain membership is exact only on free models; "
        "use Metric::Word");
  }
  // On free models the Green metric is d * log(2q-1): the comparisons below
  // are identical in either metric.
  DomainCheck check;
  const std::vector<int> radii = window_radii(model, w);
  const int r0 = radii[-w.lo];
  check.observed_ok = true;
  for (int z = -1; z >= w.lo && check.observed_ok; --z) {
    if (radii[z - w.lo] <= r0) {
      check.observed_ok = false;
      check.first_violation = z;
    }
  }
  for (int z = 1; z <= w.hi && check.observed_ok; ++z) {
    if (radii[z - w.lo] < r0) {
      check.observed_ok = false;
      check.first_violation = z;
    }
  }
  if (!check.observed_ok) {
    check.decision = Ternary::No;
    check.residual_bound = 0.0;
    return check;
  }
  if (!model.is_tree()) {
    // No exact tail bound available; the observed window cannot certify.
    check.decision = Ternary::Undecided;
    check.first_uncertified = w.hi;
    return check;
  }
  // The radial chain returns from distance D to distance k with probability
  // exactly (2q-1)^{-(D-k)}; both window ends bound the unseen tails.
  const double rho = 1.0 / (2.0 * model.free_rank() - 1.0);
  const int margin_b = radii[0] - r0;
  const int margin_f = radii[w.hi - w.lo] - r0;
  const double residual =
      (w.lo == 0 ? 1.0 : std::pow(rho, margin_b)) +
      (w.hi == 0 ? 1.0 : std::pow(rho, margin_f + 1));
  check.residual_bound = residual;
  if (residual <= cert_tol) {
    check.decision = Ternary::Yes;
  } else {
    check.decision = Ternary::Undecided;
    check.first_uncertified =
        (w.lo != 0 && std::pow(rho, margin_b) > cert_tol / 2) ? w.lo : w.hi;
  }
  return check;
}

FreeWalker::FreeWalker(const GroupModel& model, const Word& start)
    : model_(&model) {
  if (!model.is_tree()) {
    throw std::invalid_argument("FreeWalker requires a free model");
  }
  stack_ = start.letters;
}

int FreeWalker::add_target(Word target) {
  Target t;
  t.cp = GroupModel::common_prefix(Word{stack_}, target);
  t.word = std::move(target);
  targets_.push_back(std::move(t));
  return static_cast<int>(targets_.size()) - 1;
}

void FreeWalker::step(Letter s) {
  const auto& alpha = model_->alphabet();
  if (!stack_.empty() && stack_.back() == alpha.inverse(s)) {
    stack_.pop_back();
    const int len = static_cast<int>(stack_.size());
    for (auto& t : targets_) t.cp = std::min(t.cp, len);
  } else {
    const int len_before = static_cast<int>(stack_.size());
    stack_.push_back(s);
    for (auto& t : targets_) {
      if (t.cp == len_before && t.cp < t.word.length() &&
          t.word.letters[t.cp] == s) {
        ++t.cp;
      }
    }
  }
}

void FreeWalker::reset(const Word& start) {
  stack_ = start.letters;
  for (auto& t : targets_) {
    t.cp = GroupModel::common_prefix(Word{stack_}, t.word);
  }
}

int FreeWalker::distance(int target_id) const {
  const Target& t = targets_[target_id];
  return static_cast<int>(stack_.size()) + t.word.length() - 2 * t.cp;
}

GenericWalker::GenericWalker(const GroupModel& model, const Word& start)
    : model_(&model) {
  reset(start);
}

void GenericWalker::reset(const Word& start) {
  syllabic_ = model_->kind() == ModelKind::FreeProduct;
  syllables_.clear();
  syllable_len_ = 0;
  current_ = Word{};
  if (syllabic_) {
    for (Letter c : start.letters) push_syllable(c);
  } else {
    current_ = start;
  }
}

void GenericWalker::push_syllable(Letter s) {
  const auto& alpha = model_->alphabet();
  const int f = alpha.base_index(s);
  const int order = model_->factor_orders()[f];
  const int delta = alpha.is_inverse_letter(s) ? order - 1 : 1;
  if (!syllables_.empty() && syllables_.back().factor == f) {
    Syllable& top = syllables_.back();
    syllable_len_ -= top.len;
    top.exp = (top.exp + delta) % order;
    if (top.exp == 0) {
      syllables_.pop_back();
      return;
    }
    top.len = std::min(top.exp, order - top.exp);
    syllable_len_ += top.len;
    return;
  }
  const int exp = delta % order;
  if (exp == 0) return;
  syllables_.push_back({f, exp, std::min(exp, order - exp)});
  syllable_len_ += syllables_.back().len;
}

void GenericWalker::step(Letter s) {
  if (syllabic_) {
    push_syllable(s);
  } else {
    current_ = model_->multiply(current_, Word{{s}});
  }
}

int GenericWalker::length() const {
  return syllabic_ ? syllable_len_ : current_.length();
}

Word GenericWalker::word() const {
  if (!syllabic_) return current_;
  // spell each syllable in its canonical shortest form
  std::vector<Letter> raw;
  raw.reserve(syllable_len_);
  const auto& alpha = model_->alphabet();
  for (const Syllable& s : syllables_) {
    Letter pos = 0;
    for (Letter c = 0; c < alpha.size(); ++c) {
      if (alpha.base_index(c) == s.factor && !alpha.is_inverse_letter(c)) {
        pos = c;
        break;
      }
    }
    const int order = model_->factor_orders()[s.factor];
    if (s.exp <= order - s.exp) {
      for (int i = 0; i < s.exp; ++i) raw.push_back(pos);
    } else {
      for (int i = 0; i < order - s.exp; ++i) raw.push_back(alpha.inverse(pos));
    }
  }
  return Word{std::move(raw)};
}

bool GenericWalker::at(const Word& target) const {
  if (length() != target.length()) return false;
  return word() == target;
}

}  // namespace hypflow
