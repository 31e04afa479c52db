#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "relcur/bignum.hpp"
#include "relcur/eigen.hpp"
#include "relcur/errors.hpp"

using namespace relcur;

namespace {

IMat im(std::initializer_list<std::initializer_list<long long>> rows) {
  IMat m(static_cast<int>(rows.size()), static_cast<int>(rows.begin()->size()));
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (long long v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

bool has_eigenvalue(const std::vector<std::complex<double>>& eig, std::complex<double> v,
                    double tol = 1e-9) {
  return std::any_of(eig.begin(), eig.end(), [&](auto e) { return std::abs(e - v) < tol; });
}

}  // namespace

TEST_CASE("pf_eigen on the fibonacci-like block") {
  auto d = pf_eigen(im({{1, 1}, {1, 2}}));
  CHECK(d.lambda == doctest::Approx((3 + std::sqrt(5.0)) / 2).epsilon(1e-12));
  CHECK(*std::min_element(d.right.begin(), d.right.end()) == doctest::Approx(1.0));
  CHECK(d.right[1] == doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-10));
}

TEST_CASE("pf_eigen further blocks") {
  CHECK(pf_eigen(im({{2, 3}, {3, 5}})).lambda ==
        doctest::Approx((7 + 3 * std::sqrt(5.0)) / 2).epsilon(1e-12));
  CHECK(pf_eigen(im({{1}})).lambda == doctest::Approx(1.0));
}

TEST_CASE("pf_eigen rejects an imprimitive block") {
  // period-2 block whose power iterates oscillate
  CHECK_THROWS_AS(pf_eigen(im({{0, 2}, {1, 0}}), 1e-14, 2000), ConvergenceError);
}

TEST_CASE("spectrum of small integer matrices") {
  auto eig = spectrum(to_double(im({{1, 1, 0}, {1, 2, 0}, {1, 1, 1}})));
  REQUIRE(eig.size() == 3);
  double s5 = std::sqrt(5.0);
  CHECK(has_eigenvalue(eig, (3 + s5) / 2));
  CHECK(has_eigenvalue(eig, (3 - s5) / 2));
  CHECK(has_eigenvalue(eig, 1.0));
}

TEST_CASE("spectrum finds complex pairs") {
  // rotation-like companion matrix of x^2 + 1
  auto eig = spectrum(to_double(im({{0, -1}, {1, 0}})));
  REQUIRE(eig.size() == 2);
  CHECK(has_eigenvalue(eig, {0.0, 1.0}));
  CHECK(has_eigenvalue(eig, {0.0, -1.0}));
}

TEST_CASE("spectrum agrees with trace and determinant on random matrices") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> entry(-3, 3);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + trial % 5;
    DMat m(n, n);
    double trace = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        m(i, j) = entry(rng);
        if (i == j) trace += m(i, j);
      }
    auto eig = spectrum(m);
    std::complex<double> sum = 0;
    for (auto e : eig) sum += e;
    CHECK(sum.real() == doctest::Approx(trace).epsilon(1e-7));
    CHECK(std::fabs(sum.imag()) < 1e-7);
  }
}

TEST_CASE("compare_spectra matches and flags extras") {
  DMat m = to_double(im({{2}}));
  DMat ml = to_double(im({{2, 0}, {0, 1}}));
  auto rep = compare_spectra(m, ml);
  CHECK(rep.contained);
  CHECK(rep.extras.size() == 1);
  CHECK(rep.extras_bounded);

  DMat ml_bad = to_double(im({{2, 0}, {0, 3}}));
  auto rep2 = compare_spectra(m, ml_bad);
  CHECK(rep2.contained);
  CHECK(!rep2.extras_bounded);
}

TEST_CASE("solve_min_norm returns the minimum-norm solution") {
  // x + y = 2 has min-norm solution (1, 1).
  DMat m(1, 2);
  m(0, 0) = 1;
  m(0, 1) = 1;
  double res = 0;
  auto x = solve_min_norm(m, {2.0}, 1e-12, &res);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
  CHECK(res < 1e-12);
}

TEST_CASE("solve_min_norm handles dependent consistent rows") {
  DMat m(2, 2);
  m(0, 0) = 1;
  m(0, 1) = 1;
  m(1, 0) = 2;
  m(1, 1) = 2;
  double res = 0;
  auto x = solve_min_norm(m, {2.0, 4.0}, 1e-12, &res);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(res < 1e-10);
  CHECK_THROWS_AS(solve_min_norm(m, {2.0, 5.0}, 1e-12, nullptr), InternalError);
}

TEST_CASE("bignum powers") {
  CHECK(BigUInt::power(3, 4).to_string() == "81");
  BigUInt p = BigUInt(4);
  p.mul_small(81);
  CHECK(p.to_string() == "324");
  CHECK(BigUInt::power(3, 40).to_string() == "12157665459056928801");
  CHECK(BigUInt::power(2, 300).to_double() == doctest::Approx(std::pow(2.0, 300)).epsilon(1e-12));
}
