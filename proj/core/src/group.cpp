#include "hypflow/group.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace hypflow {

Letter Alphabet::parse_token(const std::string& token) const {
  if (token.empty()) throw std::invalid_argument("empty word token");
  const bool inv = token[0] == '-';
  const std::string base = inv ? token.substr(1) : token;
  for (std::size_t c = 0; c < entries_.size(); ++c) {
    if (entries_[c].name == base && !entries_[c].is_inverse) {
      return inv ? entries_[c].inverse : static_cast<Letter>(c);
    }
  }
  throw std::invalid_argument("unknown generator token '" + token + "'");
}

GroupModel GroupModel::free_group(int rank) {
  if (rank < 2) {
    throw std::invalid_argument("free model requires rank >= 2 (non-elementary)");
  }
  if (rank > 26) throw std::invalid_argument("free rank limited to 26");
  GroupModel m;
  m.kind_ = ModelKind::Free;
  m.free_rank_ = rank;
  m.delta_ = 0.0;
  m.quasi_ruled_m_ = 0.0;
  for (int i = 0; i < rank; ++i) {
    const std::string name(1, static_cast<char>('a' + i));
    m.alphabet_.add(name, static_cast<Letter>(2 * i + 1), i, false);
    m.alphabet_.add(name, static_cast<Letter>(2 * i), i, true);
  }
  return m;
}

GroupModel GroupModel::free_product(std::vector<int> orders) {
  if (orders.size() < 2) {
    throw std::invalid_argument("free product needs at least two factors");
  }
  double curvature = 0.0;
  for (int o : orders) {
    if (o < 2) throw std::invalid_argument("factor orders must be >= 2");
    curvature += 1.0 / o;
  }
  if (orders.size() == 2 && curvature >= 1.0 - 1e-12) {
    throw std::invalid_argument("Z2*Z2 is elementary; not supported");
  }
  GroupModel m;
  m.kind_ = ModelKind::FreeProduct;
  m.factor_orders_ = std::move(orders);
  // Triangles through the finite factors keep delta small; declared, then
  // sampling-validated in the tests.
  m.delta_ = 1.0;
  m.quasi_ruled_m_ = 1.0;
  Letter code = 0;
  for (std::size_t i = 0; i < m.factor_orders_.size(); ++i) {
    const std::string name(1, static_cast<char>('x' + i));
    if (m.factor_orders_[i] == 2) {
      m.alphabet_.add(name, code, static_cast<int>(i), false);  // self-inverse
      code += 1;
    } else {
      m.alphabet_.add(name, static_cast<Letter>(code + 1), static_cast<int>(i), false);
      m.alphabet_.add(name, code, static_cast<int>(i), true);
      code += 2;
    }
  }
  return m;
}

GroupModel GroupModel::rewriting(Alphabet alphabet, std::vector<RewriteRule> rules,
                                 double delta, double quasi_ruled_m) {
  for (const auto& r : rules) {
    if (r.rhs.size() > r.lhs.size()) {
      throw std::invalid_argument("rewriting rules must be length-reducing");
    }
  }
  GroupModel m;
  m.kind_ = ModelKind::Rewriting;
  m.alphabet_ = std::move(alphabet);
  m.rules_ = std::move(rules);
  m.delta_ = delta;
  m.quasi_ruled_m_ = quasi_ruled_m;
  // Implied free cancellations.
  for (Letter c = 0; c < m.alphabet_.size(); ++c) {
    m.rules_.push_back({{c, m.alphabet_.inverse(c)}, {}});
  }
  return m;
}

void GroupModel::validate_letters(std::span<const Letter> letters) const {
  for (Letter c : letters) {
    if (c >= alphabet_.size()) {
      throw std::invalid_argument("letter code outside model alphabet");
    }
  }
}

Word GroupModel::reduce_free(std::span<const Letter> letters) const {
  Word out;
  out.letters.reserve(letters.size());
  for (Letter c : letters) {
    if (!out.letters.empty() && out.letters.back() == alphabet_.inverse(c)) {
      out.letters.pop_back();
    } else {
      out.letters.push_back(c);
    }
  }
  return out;
}

namespace {

// Syllable of a free-product word: (factor, exponent mod order), exponent in
// [1, order-1]. Emitted in the shortest form; ties broken toward the
// positive letter (fixed rule order).
struct Syllable {
  int factor;
  int exp;
};

}  // namespace

Word GroupModel::reduce_free_product(std::span<const Letter> letters) const {
  std::vector<Syllable> stack;
  for (Letter c : letters) {
    const int f = alphabet_.base_index(c);
    const int step = alphabet_.is_inverse_letter(c) ? factor_orders_[f] - 1 : 1;
    if (!stack.empty() && stack.back().factor == f) {
      stack.back().exp = (stack.back().exp + step) % factor_orders_[f];
      if (stack.back().exp == 0) stack.pop_back();
    } else {
      stack.push_back({f, step % factor_orders_[f]});
      if (stack.back().exp == 0) stack.pop_back();
    }
  }
  Word out;
  for (const Syllable& s : stack) {
    const int order = factor_orders_[s.factor];
    Letter pos = 0;
    for (Letter c = 0; c < alphabet_.size(); ++c) {
      if (alphabet_.base_index(c) == s.factor && !alphabet_.is_inverse_letter(c)) {
        pos = c;
        break;
      }
    }
    const int fwd = s.exp;
    const int bwd = order - s.exp;
    if (fwd <= bwd) {
      for (int i = 0; i < fwd; ++i) out.letters.push_back(pos);
    } else {
      const Letter neg = alphabet_.inverse(pos);
      for (int i = 0; i < bwd; ++i) out.letters.push_back(neg);
    }
  }
  return out;
}

Word GroupModel::reduce_rewriting(std::span<const Letter> letters) const {
  std::vector<Letter> w(letters.begin(), letters.end());
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& rule : rules_) {
      const std::size_t L = rule.lhs.size();
      if (w.size() < L) continue;
      for (std::size_t i = 0; i + L <= w.size(); ++i) {
        if (std::equal(rule.lhs.begin(), rule.lhs.end(), w.begin() + i)) {
          std::vector<Letter> next;
          next.reserve(w.size() - L + rule.rhs.size());
          next.insert(next.end(), w.begin(), w.begin() + i);
          next.insert(next.end(), rule.rhs.begin(), rule.rhs.end());
          next.insert(next.end(), w.begin() + i + L, w.end());
          w = std::move(next);
          changed = true;
          break;
        }
      }
      if (changed) break;
    }
  }
  Word out;
  out.letters = std::move(w);
  return out;
}

Word GroupModel::reduce(std::span<const Letter> letters) const {
  validate_letters(letters);
  switch (kind_) {
    case ModelKind::Free:
      return reduce_free(letters);
    case ModelKind::FreeProduct:
      return reduce_free_product(letters);
    case ModelKind::Rewriting:
      return reduce_rewriting(letters);
  }
  return {};
}

Word GroupModel::multiply(const Word& x, const Word& y) const {
  std::vector<Letter> joined;
  joined.reserve(x.letters.size() + y.letters.size());
  joined.insert(joined.end(), x.letters.begin(), x.letters.end());
  joined.insert(joined.end(), y.letters.begin(), y.letters.end());
  return reduce(joined);
}

Word GroupModel::inverse(const Word& x) const {
  std::vector<Letter> rev;
  rev.reserve(x.letters.size());
  for (auto it = x.letters.rbegin(); it != x.letters.rend(); ++it) {
    rev.push_back(alphabet_.inverse(*it));
  }
  return reduce(rev);
}

int GroupModel::common_prefix(const Word& x, const Word& y) {
  const std::size_t n = std::min(x.letters.size(), y.letters.size());
  std::size_t i = 0;
  while (i < n && x.letters[i] == y.letters[i]) ++i;
  return static_cast<int>(i);
}

int GroupModel::word_distance(const Word& x, const Word& y) const {
  if (kind_ == ModelKind::Free) {
    const int cp = common_prefix(x, y);
    return x.length() + y.length() - 2 * cp;
  }
  return multiply(inverse(x), y).length();
}

std::vector<Word> GroupModel::geodesic(const Word& x, const Word& y) const {
  if (kind_ == ModelKind::Free) {
    const int cp = common_prefix(x, y);
    std::vector<Word> path;
    Word cur = x;
    path.push_back(cur);
    while (cur.length() > cp) {
      cur.letters.pop_back();
      path.push_back(cur);
    }
    for (int i = cp; i < y.length(); ++i) {
      cur.letters.push_back(y.letters[i]);
      path.push_back(cur);
    }
    return path;
  }
  return geodesic_bfs(x, y);
}

std::vector<Word> GroupModel::geodesic_bfs(const Word& x, const Word& y) const {
  // Distances from y over the ball that matters, then a greedy descent from
  // x choosing the smallest letter; this is the lexicographically least
  // geodesic (Design: determinism for reproducible rays).
  const int d = word_distance(x, y);
  std::unordered_map<Word, int, WordHash> dist;
  dist[y] = 0;
  std::vector<Word> frontier{y};
  for (int r = 1; r <= d; ++r) {
    std::vector<Word> next;
    for (const Word& w : frontier) {
      for (Letter c = 0; c < alphabet_.size(); ++c) {
        Word n = multiply(w, Word{{c}});
        if (!dist.contains(n)) {
          dist[n] = r;
          next.push_back(std::move(n));
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<Word> path{x};
  Word cur = x;
  for (int r = d; r > 0; --r) {
    bool advanced = false;
    for (Letter c = 0; c < alphabet_.size(); ++c) {
      Word n = multiply(cur, Word{{c}});
      auto it = dist.find(n);
      if (it != dist.end() && it->second == r - 1) {
        cur = std::move(n);
        path.push_back(cur);
        advanced = true;
        break;
      }
    }
    if (!advanced) throw std::logic_error("geodesic descent failed");
  }
  return path;
}

double GroupModel::gromov_product_word(const Word& x, const Word& y,
                                       const Word& w) const {
  return 0.5 * (word_distance(x, w) + word_distance(y, w) - word_distance(x, y));
}

Word GroupModel::parse_word(const std::string& text) const {
  std::istringstream in(text);
  std::vector<Letter> letters;
  std::string tok;
  while (in >> tok) letters.push_back(alphabet_.parse_token(tok));
  return reduce(letters);
}

std::string GroupModel::format_word(const Word& w) const {
  if (w.is_identity()) return "e";
  std::string out;
  for (std::size_t i = 0; i < w.letters.size(); ++i) {
    if (i) out += ' ';
    const Letter c = w.letters[i];
    if (alphabet_.is_inverse_letter(c)) out += '-';
    out += alphabet_.name(c);
  }
  return out;
}

}  // namespace hypflow
