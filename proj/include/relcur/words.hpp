#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "relcur/errors.hpp"

namespace relcur {

// A signed letter: +(i+1) is the i-th positive letter, -(i+1) its inverse.
using Letter = std::int32_t;
using Word = std::vector<Letter>;

inline Letter inverse(Letter l) { return -l; }
inline int letter_index(Letter l) { return std::abs(l) - 1; }
inline bool is_positive(Letter l) { return l > 0; }

// Total order on letters: a < A < b < B < ...  Used for canonical rotations.
inline int letter_rank(Letter l) { return 2 * letter_index(l) + (l < 0 ? 1 : 0); }

class Alphabet {
 public:
  Alphabet() = default;
  Alphabet(std::vector<std::string> positive_letters, bool involutive);

  int size() const { return static_cast<int>(names_.size()); }
  bool involutive() const { return involutive_; }
  const std::string& name(int index) const { return names_[index]; }
  const std::vector<std::string>& names() const { return names_; }

  // Index of a positive-letter token, or -1.
  int find(const std::string& token) const;

  Letter letter(const std::string& token) const;

  // True when every letter is a single lowercase character, so words render
  // as e.g. "abAB" with uppercase inverses.
  bool compact() const { return compact_; }

  std::string format_letter(Letter l) const;
  std::string format_word(const Word& w) const;
  // Parses either compact notation ("abAB") or whitespace-separated tokens
  // with ~ marking inverses ("e5 ~e3").
  Word parse_word(const std::string& text) const;

  bool operator==(const Alphabet& o) const {
    return names_ == o.names_ && involutive_ == o.involutive_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  bool involutive_ = false;
  bool compact_ = false;
};

bool is_reduced(const Word& w);

// Free reduction: cancels adjacent x x^-1 pairs until none remain.
Word reduce(const Word& w);

// Reverse-and-flip.  invert(invert(w)) == w.
Word invert(const Word& w);

// Number of start positions where pattern occurs in text (overlaps counted).
// Throws PreconditionError on an empty pattern.
long long count_occurrences(const Word& pattern, const Word& text);

class CyclicWord {
 public:
  // Requires a cyclically reduced word; stores the least rotation so equality
  // is rotation-independent.
  explicit CyclicWord(Word w);

  const Word& letters() const { return letters_; }
  int size() const { return static_cast<int>(letters_.size()); }

  CyclicWord inverse_class() const;

  bool operator==(const CyclicWord& o) const { return letters_ == o.letters_; }
  bool operator!=(const CyclicWord& o) const { return letters_ != o.letters_; }
  bool operator<(const CyclicWord& o) const;

 private:
  Word letters_;  // canonical rotation
};

bool is_cyclically_reduced(const Word& w);

// Splits a reduced word as conjugator * core * conjugator^-1 with core
// cyclically reduced.  Throws PreconditionError when w is trivial.
struct CyclicReduction {
  CyclicWord core;
  Word conjugator;
};
CyclicReduction cyclic_reduce(const Word& w);

// Occurrences of pattern in the bi-infinite periodic word of alpha within one
// period; with_inverse adds the same count for the inverse class.
long long count_cyclic(const Word& pattern, const CyclicWord& alpha, bool with_inverse);

// A free factor system over an involutive alphabet: disjoint letter subsets
// spanning the factors, remaining letters forming the cofactor basis.
class FreeFactorSystem {
 public:
  FreeFactorSystem(const Alphabet& alphabet, std::vector<std::vector<int>> factors);

  const Alphabet& alphabet() const { return *alphabet_; }
  int num_factors() const { return static_cast<int>(factors_.size()); }
  const std::vector<int>& factor(int i) const { return factors_[i]; }
  const std::vector<int>& cofactor() const { return cofactor_; }
  int zeta() const { return num_factors() + static_cast<int>(cofactor_.size()); }

  // Index of the factor containing letter i, or -1 for cofactor letters.
  int factor_of_letter(int index) const { return factor_of_[index]; }

  // The single factor containing every letter of w, if any.
  std::optional<int> factor_of(const Word& w) const;

  // w lies in F minus A: nonempty and not inside a single factor.
  bool in_f_minus_a(const Word& w) const;

  // Normalization set B_A: all length-2 cross-factor words x^+- y^+- with
  // x, y in distinct factors, plus each cofactor letter.
  std::vector<Word> b_a_set() const;

 private:
  const Alphabet* alphabet_;
  std::vector<std::vector<int>> factors_;
  std::vector<int> cofactor_;
  std::vector<int> factor_of_;
};

struct WordHash {
  std::size_t operator()(const Word& w) const {
    std::size_t h = 1469598103934665603ull;
    for (Letter l : w) {
      h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(l));
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace relcur
