#pragma once

#include <map>
#include <optional>
#include <vector>

#include "relcur/bignum.hpp"
#include "relcur/words.hpp"

namespace relcur {

// Coordinate table of a relative current: values on reduced words of
// F minus A up to depth k, stored on one representative of each {w, wbar}
// pair.  Lookups are flip-invariant.
class RelativeCurrent {
 public:
  RelativeCurrent(const FreeFactorSystem& ffs, int depth);

  const FreeFactorSystem& ffs() const { return *ffs_; }
  int depth() const { return depth_; }

  double value(const Word& w) const;          // 0 for unknown words
  void set(const Word& w, double v);          // stores on the canonical key
  void add(const Word& w, double v);

  const std::map<Word, double>& table() const { return table_; }

  static Word canonical(const Word& w);

 private:
  const FreeFactorSystem* ffs_;
  int depth_;
  std::map<Word, double> table_;
};

// All reduced words of the given length over the alphabet (2n directions).
std::vector<Word> reduced_words(int n_letters, int length);

// Canonical representatives (one of each inverse pair) of reduced words of
// lengths 1..depth that lie in F minus A.
std::vector<Word> current_domain(const FreeFactorSystem& ffs, int depth);

// eta_alpha: occurrence counts of each domain word in alpha and its inverse.
// Throws PreconditionError when alpha lies inside a single factor.
RelativeCurrent rational_current(const CyclicWord& alpha, const FreeFactorSystem& ffs, int depth);

// Scales so the maximum over B_A equals one.
RelativeCurrent normalize(const RelativeCurrent& eta);

// max |eta1(w) - eta2(w)| over the window.
double current_distance(const RelativeCurrent& eta1, const RelativeCurrent& eta2,
                        const std::vector<Word>& window);

// A signed measured current to depth k: values on ALL reduced words up to
// depth (factor words included, possibly negative), flip-invariant storage.
class SignedMeasuredCurrent {
 public:
  SignedMeasuredCurrent(const FreeFactorSystem& ffs, int depth);

  const FreeFactorSystem& ffs() const { return *ffs_; }
  int depth() const { return depth_; }
  double value(const Word& w) const;
  void set(const Word& w, double v);
  void add(const Word& w, double v);
  const std::map<Word, double>& table() const { return table_; }

  // max additivity residual over words of length < depth.
  double additivity_residual() const;

 private:
  const FreeFactorSystem* ffs_;
  int depth_;
  std::map<Word, double> table_;
};

struct ExtensionReport {
  double max_solve_residual = 0.0;        // extension-system solve residual
  double max_consistency_residual = 0.0;  // generating-relation constants
  int levels = 0;
};

// Extends a relative current to a signed measured current on all words up to
// depth k, solving the one-edge extension system level by level (minimum-norm
// solution).  Seed values assign eta on the factor letters (default 0).
SignedMeasuredCurrent k_extension(const RelativeCurrent& eta0, int k,
                                  const std::map<int, double>& seeds = {},
                                  ExtensionReport* report = nullptr,
                                  double tol = 1e-10);

struct NonnegativeFixInfo {
  std::vector<double> correction;  // C per factor
};

// Adds the additive factor-supported current eta_{A,C} so all values up to
// depth become non-negative; factor words of length j gain C/(2s-1)^(j-1).
SignedMeasuredCurrent nonnegative_fix(const SignedMeasuredCurrent& eta,
                                      NonnegativeFixInfo* info = nullptr);

struct ApproximationConfig {
  int k = 2;
  double scale = 1e4;  // R
  bool concatenate = false;  // optional beta^m post-step
  int concatenate_m = 1;
};

// Exact constant P = 2n(2n-1)^(2n(2n-1)^(k-2)).
BigUInt approximation_constant(int rank, int k);

struct ApproximationResult {
  std::vector<CyclicWord> classes;        // extracted conjugacy classes
  std::vector<bool> in_f_minus_a;         // per class
  double bound = 0.0;                     // P / R
  double achieved_error = 0.0;            // max window deviation
  double p_value = 0.0;                   // P as double (inf if huge)
  std::optional<CyclicWord> concatenated; // beta^m when the post-step is on
};

// Greedy cycle extraction following the density argument: extend, scale by R,
// peel off rational currents until every depth-k value drops below P, and
// report the sum's deviation from R*eta0 on the F-minus-A window.
ApproximationResult approximate_by_rationals(const RelativeCurrent& eta0,
                                             const ApproximationConfig& cfg);

}  // namespace relcur
