#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relcur/errors.hpp"

namespace relcur {

// Minimal arbitrary-precision unsigned integer, enough for the exact
// approximation constants (base 1e9 limbs, little-endian).
class BigUInt {
 public:
  BigUInt() : d_{0} {}
  explicit BigUInt(std::uint64_t v);

  // base^exp by repeated multiplication; base must fit a limb.
  static BigUInt power(std::uint64_t base, std::uint64_t exp);

  BigUInt& mul_small(std::uint64_t m);

  std::string to_string() const;
  // +inf when the value exceeds double range.
  double to_double() const;

  bool operator<=(double x) const;

 private:
  static constexpr std::uint64_t kBase = 1000000000ull;
  std::vector<std::uint32_t> d_;
};

}  // namespace relcur
