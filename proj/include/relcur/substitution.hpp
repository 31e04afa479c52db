#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "relcur/eigen.hpp"
#include "relcur/matrix.hpp"
#include "relcur/words.hpp"

namespace relcur {

// A substitution on a finite alphabet: every letter maps to a nonempty word.
// Letters here are abstract (the alphabet need not be involutive), and
// application is plain concatenation without any reduction.
class Substitution {
 public:
  Substitution(Alphabet alphabet, std::vector<Word> rules);

  const Alphabet& alphabet() const { return alphabet_; }
  int size() const { return alphabet_.size(); }
  const Word& rule(int letter_index) const { return rules_[letter_index]; }
  const std::vector<Word>& rules() const { return rules_; }

  Word apply(const Word& w) const;
  Word apply_n(const Word& w, int n) const;

  // zeta^n as a substitution.
  Substitution power(int n) const;

 private:
  Alphabet alphabet_;
  std::vector<Word> rules_;
};

struct TransitionMatrix {
  IMat m;                           // m(a,b) = occurrences of a in zeta(b)
  std::vector<std::string> labels;  // row/column labels in index order
};

TransitionMatrix transition_matrix(const Substitution& z);

struct BlockStructure {
  // Topologically ordered letter blocks, sources first (B_0 first).
  std::vector<std::vector<int>> blocks;
  std::vector<bool> primitive;
  std::vector<int> block_of;  // per letter
};

BlockStructure block_structure(const Substitution& z);

// Exact primitivity check via boolean matrix powers up to the Wielandt bound.
bool is_primitive(const IMat& m);

// Reorders letters block-by-block (B_0 letters first, declared order within a
// block); returns the permuted transition matrix, matching the matrices as the
// examples print them.
TransitionMatrix block_ordered_matrix(const Substitution& z, const BlockStructure& bs);

struct Seed {
  int power = 0;   // minimal p with zeta^p(a) starting at a and expanding
  int letter = -1;
};

// Finds a letter of the block whose image under some minimal power starts with
// itself and grows.  Throws PreconditionError when the block never expands.
Seed find_seed(const Substitution& z, const std::vector<int>& block);

// zeta^n(a) (n >= 0), with a letter-count cap.
Word iterate_letter(const Substitution& z, int letter, int n, std::size_t cap = 50'000'000);

// Prefix of the fixed word rho_a of the requested length (requires
// zeta(a) = a..., |zeta(a)| >= 2).
Word fixed_point_prefix(const Substitution& z, int letter, std::size_t length);

class InducedSubstitution {
 public:
  int l() const { return l_; }
  const Substitution& sub() const { return sub_; }          // over word-letters
  const std::vector<Word>& alphabet_words() const { return words_; }
  const std::vector<int>& class_rank() const { return class_rank_; }

  // Index of a base word in the induced alphabet, or -1.
  int index_of(const Word& w) const;

  // Indices forming the crossing set B_l (class ranks {0} and odd).
  std::vector<int> crossing_indices() const;

  int seed_letter = -1;  // base letter whose fixed word scoped the alphabet

 private:
  friend InducedSubstitution induce(const Substitution&, int, int, int);
  int l_ = 1;
  Substitution sub_{Alphabet({}, false), {}};
  std::vector<Word> words_;
  std::vector<int> class_rank_;
  std::unordered_map<Word, int, WordHash> index_;
};

// The induced substitution zeta_l on length-l factors of rho_a, discovered
// from a long prefix and saturated under zeta_l.  For l == 1 this is zeta
// restricted to the letters appearing in rho_a.
InducedSubstitution induce(const Substitution& z, int l, int seed_letter, int max_rounds = 64);

// Diagonal block of M_l on the crossing words, ordered as in the alphabet.
TransitionMatrix restrict_to_crossing(const InducedSubstitution& ind);

enum class FrequencyMethod { kMatrix, kDirect, kBoth };

struct FrequencyOptions {
  FrequencyMethod method = FrequencyMethod::kBoth;
  double tol = 1e-9;          // matrix-iteration stop
  double direct_tol = 1e-7;   // direct-method Cauchy stop
  double cross_tol = 1e-6;    // allowed matrix/direct disagreement
  int max_iter = 500;
  std::size_t direct_cap = 4'000'000;  // letters materialized by the direct method
  bool with_kappa = false;
};

struct FrequencyTable {
  int seed = -1;
  int power_used = 1;       // zeta was replaced by zeta^power_used
  double lambda = 0.0;      // PF eigenvalue of the seed block of zeta^power_used
  std::map<Word, double> values;
  std::map<int, double> kappa_map;          // letter -> kappa(seed, letter)
  std::map<int, std::string> seed_columns;  // word length -> seed column used
};

// Frequencies d_{w,a} of the window words in rho_a.  Window words must cross
// the seed letter's block; words absent from rho_a get value 0.
FrequencyTable frequencies(const Substitution& z, int seed_letter, const std::vector<Word>& window,
                           const FrequencyOptions& opts = {});

struct KappaResult {
  double kappa = 0.0;
  double max_deviation = 0.0;  // relative spread across the probe window
  int window_used = 0;
};

// kappa(a, b) = median of d_{w,b} / d_{w,a} over the probe window.
KappaResult kappa(const Substitution& z, int seed_a, int seed_b, const std::vector<Word>& probe,
                  const FrequencyOptions& opts = {});

struct KirchhoffReport {
  struct Row {
    Word word;
    double forward_residual = 0.0;
    double backward_residual = 0.0;
  };
  std::vector<Row> rows;
  double max_residual = 0.0;
  bool pass = false;
  std::vector<Word> missing;  // extension words absent from the table
};

// Residuals of d_w = sum_e d_{we} = sum_e d_{ew} for every table word whose
// full extension set is present.  Throws PreconditionError listing gaps when
// extensions are missing.
KirchhoffReport check_kirchhoff(const FrequencyTable& table, const Substitution& z, double tol = 1e-8);

std::vector<std::complex<double>> spectrum(const TransitionMatrix& m);

SpectrumReport compare_spectra(const TransitionMatrix& m, const TransitionMatrix& ml, double tol = 1e-6);

// Crossing factors of rho_seed of lengths 1..max_len, in induced-alphabet
// order per length.
std::vector<Word> occurring_crossing_words(const Substitution& z, int seed, int max_len);

}  // namespace relcur
