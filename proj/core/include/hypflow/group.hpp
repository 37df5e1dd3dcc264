#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hypflow {

// A generator is a small letter code; the alphabet owns names and the
// formal-inversion table. Codes are dense in [0, alphabet size).
using Letter = std::uint8_t;

class Alphabet {
 public:
  struct Entry {
    std::string name;
    Letter inverse;
    int base_index;     // which abstract generator this letter belongs to
    bool is_inverse;    // false for the positively oriented letter
  };

  std::size_t size() const { return entries_.size(); }
  Letter inverse(Letter c) const { return entries_[c].inverse; }
  const std::string& name(Letter c) const { return entries_[c].name; }
  int base_index(Letter c) const { return entries_[c].base_index; }
  bool is_inverse_letter(Letter c) const { return entries_[c].is_inverse; }

  // Token grammar: a bare name is the letter, "-name" its formal inverse.
  Letter parse_token(const std::string& token) const;

  void add(const std::string& name, Letter inverse, int base, bool is_inv) {
    entries_.push_back({name, inverse, base, is_inv});
  }

 private:
  std::vector<Entry> entries_;
};

// Reduced word over a model alphabet; the empty word is the identity o.
// Words carry no model pointer: all arithmetic goes through GroupModel,
// which validates letter ranges.
struct Word {
  std::vector<Letter> letters;

  bool is_identity() const { return letters.empty(); }
  int length() const { return static_cast<int>(letters.size()); }
  bool operator==(const Word&) const = default;
  auto operator<=>(const Word&) const = default;
};

struct WordHash {
  std::size_t operator()(const Word& w) const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (Letter c : w.letters) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }
};

// One rewriting rule lhs -> rhs with |rhs| <= |lhs|.
struct RewriteRule {
  std::vector<Letter> lhs;
  std::vector<Letter> rhs;
};

enum class ModelKind { Free, FreeProduct, Rewriting };

// A group model: alphabet, normal forms, and the declared geometry
// constants (delta, quasi-ruled M). delta and M are metadata validated by
// sampling, not computed.
class GroupModel {
 public:
  // Free group F_q, q >= 2, generators named a, b, c, ...
  static GroupModel free_group(int rank);

  // Free product of finite cyclic groups Z_{orders[0]} * Z_{orders[1]} * ...
  // Generators named x, y, z, ... Requires a non-elementary product.
  static GroupModel free_product(std::vector<int> orders);

  // Plug-in model with explicit alphabet and length-reducing rules.
  // Inverse cancellation rules are always implied. Confluence is the
  // caller's responsibility (validated by sampling in the test suite).
  static GroupModel rewriting(Alphabet alphabet, std::vector<RewriteRule> rules,
                              double delta, double quasi_ruled_m);

  ModelKind kind() const { return kind_; }
  const Alphabet& alphabet() const { return alphabet_; }
  int alphabet_size() const { return static_cast<int>(alphabet_.size()); }
  int free_rank() const { return free_rank_; }
  bool is_tree() const { return kind_ == ModelKind::Free; }
  double delta() const { return delta_; }
  double quasi_ruled_m() const { return quasi_ruled_m_; }

  Word reduce(std::span<const Letter> letters) const;
  Word multiply(const Word& x, const Word& y) const;
  Word inverse(const Word& x) const;
  int word_distance(const Word& x, const Word& y) const;

  // On trees the unique geodesic; otherwise the lexicographically least one.
  std::vector<Word> geodesic(const Word& x, const Word& y) const;

  // (x, y)_w = (d(x,w) + d(y,w) - d(x,y)) / 2, a half-integer.
  double gromov_product_word(const Word& x, const Word& y, const Word& w) const;

  Word parse_word(const std::string& text) const;
  std::string format_word(const Word& w) const;

  // Longest common prefix length of two reduced words (free models).
  static int common_prefix(const Word& x, const Word& y);

  const std::vector<int>& factor_orders() const { return factor_orders_; }
  const std::vector<RewriteRule>& rules() const { return rules_; }

  void validate_letters(std::span<const Letter> letters) const;

 private:
  GroupModel() = default;

  Word reduce_free(std::span<const Letter> letters) const;
  Word reduce_free_product(std::span<const Letter> letters) const;
  Word reduce_rewriting(std::span<const Letter> letters) const;
  std::vector<Word> geodesic_bfs(const Word& x, const Word& y) const;

  ModelKind kind_ = ModelKind::Free;
  Alphabet alphabet_;
  int free_rank_ = 0;
  std::vector<int> factor_orders_;
  std::vector<RewriteRule> rules_;
  double delta_ = 0.0;
  double quasi_ruled_m_ = 0.0;
};

}  // namespace hypflow
