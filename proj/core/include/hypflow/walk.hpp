#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hypflow/group.hpp"
#include "hypflow/rng.hpp"

namespace hypflow {

// Step distribution mu: symmetric (exactly, weight-for-weight), full support
// on the model alphabet, weights summing to 1 within 1e-12.
class StepDistribution {
 public:
  static StepDistribution uniform(const GroupModel& model);
  static StepDistribution from_weights(const GroupModel& model,
                                       std::vector<double> weights);

  Letter sample(StreamRng& rng) const;
  double weight(Letter c) const { return weights_[c]; }
  const std::vector<double>& weights() const { return weights_; }
  bool is_uniform() const { return uniform_; }

 private:
  std::vector<double> weights_;
  std::vector<double> cdf_;
  bool uniform_ = false;
};

// Exact-tree estimators require the simple random walk on a free group.
bool exact_tree_available(const GroupModel& model, const StepDistribution& mu);

// Green-metric scale on F_q SRW: d_G = word distance * log(2q-1).
double tree_green_scale(const GroupModel& model);

// One-sided path: start plus increment letters; positions on demand.
struct WalkPath {
  Word start;
  std::vector<Letter> increments;

  int length() const { return static_cast<int>(increments.size()); }
};

WalkPath sample_walk(const GroupModel& model, const StepDistribution& mu,
                     const Word& start, int length, StreamRng rng);
std::vector<Word> walk_positions(const GroupModel& model, const WalkPath& path);

// Split at index m and re-root both halves at the identity:
// backward_k = X_m^-1 X_{m-k}, forward_k = X_m^-1 X_{m+k}.
std::pair<WalkPath, WalkPath> shift_back(const GroupModel& model,
                                         const WalkPath& path, int m);

// Finite window of a bi-infinite path, indices lo..hi with lo <= 0 <= hi.
// Stored as the two independent walks glued at the origin.
struct BiWindow {
  Word origin;                  // X_0
  int lo = 0;
  int hi = 0;
  std::vector<Letter> fwd;      // X_z = X_{z-1} * fwd[z-1] for z = 1..hi
  std::vector<Letter> bwd;      // X_{-k} = X_{-k+1} * inv-chain; bwd holds the
                                // backward walk's own increments from X_0

  int halfwidth() const { return std::min(-lo, hi); }
  // Chain increment s_z = X_{z-1}^-1 X_z for lo < z <= hi.
  Letter chain_increment(const GroupModel& model, int z) const;
};

BiWindow sample_bi_window(const GroupModel& model, const StepDistribution& mu,
                          const Word& origin, int halfwidth, StreamRng rng);

Word window_position(const GroupModel& model, const BiWindow& w, int z);
// d(X_z, o) for z = lo..hi (index 0 of the result is z = lo).
std::vector<int> window_radii(const GroupModel& model, const BiWindow& w);

// Flow shift: origin moves to the former X_z; the path is translated so the
// declared origin stays the value of X_0. The window loses |z| indices on
// the side the origin moved toward.
BiWindow tau_shift(const GroupModel& model, const BiWindow& w, int z);

enum class Metric { Word, Green };
enum class Ternary { Yes, No, Undecided };

// Membership in the first-closest-approach fundamental domain:
// d(X_z,o) > d(X_0,o) for z < 0 and d(X_z,o) >= d(X_0,o) for z > 0.
// `observed_ok` reports the inequalities over the window; `decision`
// additionally demands that the escape be certified: the residual
// probability that the unseen tail violates the condition (exact on trees)
// must not exceed cert_tol.
struct DomainCheck {
  Ternary decision = Ternary::Undecided;
  bool observed_ok = false;
  int first_violation = 0;    // 0 when none observed
  int first_uncertified = 0;  // window end that blocks certification, 0 if none
  double residual_bound = 1.0;
};

DomainCheck in_fundamental_domain(const GroupModel& model, const BiWindow& w,
                                  Metric metric, double cert_tol = 1e-9);

// Incremental reduced-word walker on a free group: O(1) steps, O(1)
// distance queries against registered target words. The hot path of every
// Monte Carlo estimator.
class FreeWalker {
 public:
  FreeWalker(const GroupModel& model, const Word& start);

  int add_target(Word target);
  void step(Letter s);
  void reset(const Word& start);

  int length() const { return static_cast<int>(stack_.size()); }
  int distance(int target_id) const;
  int common_prefix_with(int target_id) const { return targets_[target_id].cp; }
  const std::vector<Letter>& stack() const { return stack_; }
  Word word() const { return Word{stack_}; }

 private:
  struct Target {
    Word word;
    int cp;
  };
  const GroupModel* model_;
  std::vector<Letter> stack_;
  std::vector<Target> targets_;
};

// Model-agnostic walker for non-free models. Free products run on an
// incremental syllable stack (O(1) steps); plug-in rewriting models fall
// back to full reduction per step, fine at desk scale.
class GenericWalker {
 public:
  GenericWalker(const GroupModel& model, const Word& start);

  void step(Letter s);
  void reset(const Word& start);
  int length() const;
  Word word() const;
  bool at(const Word& target) const;  // equality, gated on the cheap length

 private:
  struct Syllable {
    int factor;
    int exp;
    int len;  // shortest spelling of this exponent
  };
  void push_syllable(Letter s);

  const GroupModel* model_;
  bool syllabic_ = false;
  std::vector<Syllable> syllables_;
  int syllable_len_ = 0;
  Word current_;  // rewriting fallback
};

}  // namespace hypflow
