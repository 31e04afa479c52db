#include <doctest.h>

#include <cmath>
#include <random>

#include "relcur/currents.hpp"

using namespace relcur;

namespace {

struct F2Setup {
  Alphabet ab{{"a", "b"}, true};
  FreeFactorSystem ffs{ab, {{0}}};  // A = {<a>}
};

struct F4Setup {
  Alphabet ab{{"a", "b", "c", "d"}, true};
  FreeFactorSystem ffs{ab, {{0, 1}}};  // A = {<a,b>}
};

}  // namespace

TEST_CASE("rational current of the six-letter commutator-like class") {
  F2Setup s;
  CyclicWord alpha(s.ab.parse_word("abaBab"));
  auto eta = rational_current(alpha, s.ffs, 4);
  CHECK(eta.value(s.ab.parse_word("b")) == 3.0);
  CHECK(eta.value(s.ab.parse_word("ba")) == 2.0);
  CHECK(eta.value(s.ab.parse_word("abab")) == 1.0);
  CHECK(eta.value(s.ab.parse_word("Bab")) == 1.0);
  // flip invariance of lookups
  CHECK(eta.value(s.ab.parse_word("BA")) == 2.0);
}

TEST_CASE("rational current corner cases") {
  F2Setup s;
  // The one-letter class: forced to 1 by the flip convention (see the
  // extension-sum identity in the words tests).
  auto eta = rational_current(CyclicWord(s.ab.parse_word("b")), s.ffs, 1);
  CHECK(eta.value(s.ab.parse_word("b")) == 1.0);
  CHECK_THROWS_AS(rational_current(CyclicWord(s.ab.parse_word("a")), s.ffs, 2), PreconditionError);

  F4Setup t;
  auto cd = rational_current(CyclicWord(t.ab.parse_word("cd")), t.ffs, 2);
  CHECK(cd.value(t.ab.parse_word("cd")) == 1.0);
  CHECK(cd.value(t.ab.parse_word("dc")) == 1.0);
  CHECK(cd.value(t.ab.parse_word("c")) == 1.0);
  CHECK(cd.value(t.ab.parse_word("d")) == 1.0);
}

TEST_CASE("rational currents are rotation and inverse invariant") {
  F2Setup s;
  std::mt19937 rng(5150);
  auto random_class = [&](int len) {
    for (;;) {
      Word w;
      std::uniform_int_distribution<int> d(0, 3);
      for (int i = 0; i < len; ++i) {
        int x = d(rng);
        w.push_back(x % 2 == 0 ? x / 2 + 1 : -(x / 2 + 1));
      }
      w = reduce(w);
      if (w.empty()) continue;
      while (w.size() >= 2 && w.front() == inverse(w.back())) {
        w.erase(w.begin());
        w.pop_back();
        if (w.empty()) break;
      }
      if (!w.empty() && !s.ffs.factor_of(w).has_value()) return w;
    }
  };
  for (int trial = 0; trial < 30; ++trial) {
    Word w = random_class(6);
    CyclicWord alpha(w);
    auto eta = rational_current(alpha, s.ffs, 3);
    auto eta_inv = rational_current(alpha.inverse_class(), s.ffs, 3);
    for (const auto& [key, v] : eta.table()) CHECK(eta_inv.value(key) == v);
  }
}

TEST_CASE("rational current additivity is exact") {
  F2Setup s;
  auto eta = rational_current(CyclicWord(s.ab.parse_word("abaBab")), s.ffs, 3);
  // eta(w) = sum of eta(we) over reduced extensions staying in F minus A,
  // plus extensions that fall into pure-A continuations contribute via words
  // still in F minus A only.
  for (const Word& w : current_domain(s.ffs, 2)) {
    double fwd = 0;
    bool complete = true;
    for (Letter e : {Letter(1), Letter(-1), Letter(2), Letter(-2)}) {
      if (w.back() == inverse(e)) continue;
      Word we = w;
      we.push_back(e);
      if (!s.ffs.in_f_minus_a(we)) {
        complete = false;  // a continuation dives into the factor
        continue;
      }
      fwd += eta.value(we);
    }
    if (complete) CHECK(eta.value(w) == fwd);
  }
}

TEST_CASE("normalize scales the maximum of B_A to one") {
  F2Setup s;
  auto eta = rational_current(CyclicWord(s.ab.parse_word("abaBab")), s.ffs, 2);
  auto nrm = normalize(eta);
  CHECK(nrm.value(s.ab.parse_word("b")) == 1.0);  // B_A = {b}
  auto again = normalize(nrm);
  for (const auto& [w, v] : nrm.table()) CHECK(again.value(w) == v);

  RelativeCurrent doubled(s.ffs, 2);
  for (const auto& [w, v] : eta.table()) doubled.set(w, 2 * v);
  auto nrm2 = normalize(doubled);
  for (const auto& [w, v] : nrm.table()) CHECK(nrm2.value(w) == doctest::Approx(v));

  RelativeCurrent zero(s.ffs, 2);
  CHECK_THROWS_AS(normalize(zero), PreconditionError);
}

TEST_CASE("current distance") {
  F2Setup s;
  auto e1 = rational_current(CyclicWord(s.ab.parse_word("ab")), s.ffs, 2);
  auto e2 = rational_current(CyclicWord(s.ab.parse_word("abb")), s.ffs, 2);
  std::vector<Word> window = current_domain(s.ffs, 2);
  CHECK(current_distance(e1, e1, window) == 0.0);
  CHECK(current_distance(normalize(e1), normalize(e2), window) > 0.0);
}

TEST_CASE("k_extension restricted to F minus A is the input, exactly") {
  F2Setup s;
  auto eta0 = rational_current(CyclicWord(s.ab.parse_word("abaBab")), s.ffs, 3);
  ExtensionReport rep;
  auto ext = k_extension(eta0, 3, {}, &rep);
  for (const Word& w : current_domain(s.ffs, 3)) CHECK(ext.value(w) == eta0.value(w));
  CHECK(rep.max_solve_residual < 1e-10);
  CHECK(rep.max_consistency_residual < 1e-10);
  CHECK(ext.additivity_residual() < 1e-9);
}

TEST_CASE("k_extension with seeds") {
  F2Setup s;
  auto eta0 = rational_current(CyclicWord(s.ab.parse_word("ab")), s.ffs, 2);
  auto ext = k_extension(eta0, 1, {{0, 5.0}});
  CHECK(ext.value(s.ab.parse_word("a")) == 5.0);

  auto ext2 = k_extension(eta0, 2, {{0, 5.0}});
  double total = 0;
  for (const std::string e : {"aa", "ab", "aB"}) total += ext2.value(s.ab.parse_word(e));
  CHECK(total == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(ext2.additivity_residual() < 1e-10);
}

TEST_CASE("k_extension over a rank-two factor") {
  F4Setup t;
  auto eta0 = rational_current(CyclicWord(t.ab.parse_word("cabd")), t.ffs, 3);
  ExtensionReport rep;
  auto ext = k_extension(eta0, 3, {{0, 2.0}, {1, 1.0}}, &rep);
  CHECK(ext.additivity_residual() < 1e-9);
  CHECK(rep.max_consistency_residual < 1e-10);
  for (const Word& w : current_domain(t.ffs, 3)) CHECK(ext.value(w) == eta0.value(w));
}

TEST_CASE("nonnegative_fix formula values") {
  F2Setup s;  // s = 1, so 2s-1 = 1
  SignedMeasuredCurrent eta(s.ffs, 2);
  eta.set(s.ab.parse_word("a"), -3.0);
  eta.set(s.ab.parse_word("aa"), -3.0);
  NonnegativeFixInfo info;
  auto fixed = nonnegative_fix(eta, &info);
  REQUIRE(info.correction.size() == 1);
  CHECK(info.correction[0] == 3.0);  // C = M (2s-1)^(k-1) = 3
  CHECK(fixed.value(s.ab.parse_word("a")) == 0.0);

  F4Setup t;  // factor rank 2, 2s-1 = 3
  SignedMeasuredCurrent eta2(t.ffs, 3);
  eta2.set(t.ab.parse_word("ab"), -1.0);
  NonnegativeFixInfo info2;
  auto fixed2 = nonnegative_fix(eta2, &info2);
  CHECK(info2.correction[0] == 9.0);  // C = 1 * 3^2
  // length-2 factor words gain C/(2s-1) = 3
  CHECK(fixed2.value(t.ab.parse_word("ab")) == doctest::Approx(2.0));
  CHECK(fixed2.value(t.ab.parse_word("aa")) == doctest::Approx(3.0));
  CHECK(fixed2.value(t.ab.parse_word("a")) == doctest::Approx(9.0));
  // additivity of the correction itself
  SignedMeasuredCurrent zero(t.ffs, 3);
  auto bumped = nonnegative_fix(zero);
  CHECK(bumped.additivity_residual() < 1e-12);

  // already non-negative: unchanged
  SignedMeasuredCurrent pos(s.ffs, 2);
  pos.set(s.ab.parse_word("a"), 1.0);
  NonnegativeFixInfo info3;
  auto same = nonnegative_fix(pos, &info3);
  CHECK(info3.correction[0] == 0.0);
  CHECK(same.value(s.ab.parse_word("a")) == 1.0);
}

TEST_CASE("nonnegative_fix output is non-negative everywhere") {
  F2Setup s;
  auto eta0 = rational_current(CyclicWord(s.ab.parse_word("abaBab")), s.ffs, 3);
  auto ext = nonnegative_fix(k_extension(eta0, 3));
  for (int l = 1; l <= 3; ++l)
    for (const Word& w : reduced_words(2, l)) CHECK(ext.value(w) >= -1e-12);
  // differs from the un-fixed extension only on A-words
  auto raw = k_extension(eta0, 3);
  for (const Word& w : current_domain(s.ffs, 3)) CHECK(ext.value(w) == raw.value(w));
}

TEST_CASE("approximation constant") {
  CHECK(approximation_constant(2, 2).to_string() == "324");
  CHECK(approximation_constant(2, 3).to_string() == "2125764");  // 4 * 3^12
  CHECK(approximation_constant(3, 2).to_string() == "93750");  // 6 * 5^6
}

TEST_CASE("approximate_by_rationals recovers a rational current") {
  F2Setup s;
  auto eta0 = rational_current(CyclicWord(s.ab.parse_word("ab")), s.ffs, 2);
  ApproximationConfig cfg;
  cfg.k = 2;
  cfg.scale = 1e4;
  auto res = approximate_by_rationals(eta0, cfg);
  CHECK(res.p_value == 324.0);
  CHECK(res.bound == doctest::Approx(0.0324));
  CHECK(res.achieved_error <= res.bound + 1e-12);
  bool any = false;
  for (bool b : res.in_f_minus_a) any = any || b;
  CHECK(any);
}

TEST_CASE("approximate_by_rationals on a mixture") {
  F2Setup s;
  auto e1 = rational_current(CyclicWord(s.ab.parse_word("ab")), s.ffs, 2);
  auto e2 = rational_current(CyclicWord(s.ab.parse_word("abb")), s.ffs, 2);
  RelativeCurrent mix(s.ffs, 2);
  for (const Word& w : current_domain(s.ffs, 2)) mix.set(w, e1.value(w) + 0.5 * e2.value(w));
  for (double scale : {1e3, 1e4}) {
    ApproximationConfig cfg;
    cfg.k = 2;
    cfg.scale = scale;
    auto res = approximate_by_rationals(mix, cfg);
    CHECK(res.achieved_error <= res.bound + 1e-12);
    bool any = false;
    for (bool b : res.in_f_minus_a) any = any || b;
    CHECK(any);
  }
}

TEST_CASE("approximate_by_rationals optional concatenation step") {
  F2Setup s;
  auto eta0 = rational_current(CyclicWord(s.ab.parse_word("ab")), s.ffs, 2);
  ApproximationConfig cfg;
  cfg.k = 2;
  cfg.scale = 1e3;
  cfg.concatenate = true;
  cfg.concatenate_m = 2;
  auto res = approximate_by_rationals(eta0, cfg);
  REQUIRE(res.concatenated.has_value());
  CHECK(res.concatenated->size() >= 2);
}

TEST_CASE("approximate_by_rationals precondition") {
  F2Setup s;
  auto eta0 = rational_current(CyclicWord(s.ab.parse_word("ab")), s.ffs, 2);
  ApproximationConfig cfg;
  cfg.k = 2;
  cfg.scale = 10.0;  // R too small for P = 324
  CHECK_THROWS_AS(approximate_by_rationals(eta0, cfg), PreconditionError);
}
