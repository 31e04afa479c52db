#include "relcur/bignum.hpp"

#include <cmath>
#include <limits>

namespace relcur {

BigUInt::BigUInt(std::uint64_t v) {
  d_.clear();
  if (v == 0) d_.push_back(0);
  while (v > 0) {
    d_.push_back(static_cast<std::uint32_t>(v % kBase));
    v /= kBase;
  }
}

BigUInt& BigUInt::mul_small(std::uint64_t m) {
  if (m >= kBase) throw PreconditionError("BigUInt::mul_small: multiplier too large");
  if (m == 0) {
    d_.assign(1, 0);
    return *this;
  }
  std::uint64_t carry = 0;
  for (auto& limb : d_) {
    std::uint64_t cur = static_cast<std::uint64_t>(limb) * m + carry;
    limb = static_cast<std::uint32_t>(cur % kBase);
    carry = cur / kBase;
  }
  while (carry > 0) {
    d_.push_back(static_cast<std::uint32_t>(carry % kBase));
    carry /= kBase;
  }
  return *this;
}

BigUInt BigUInt::power(std::uint64_t base, std::uint64_t exp) {
  if (base >= kBase) throw PreconditionError("BigUInt::power: base too large");
  BigUInt r(1);
  for (std::uint64_t i = 0; i < exp; ++i) r.mul_small(base);
  return r;
}

std::string BigUInt::to_string() const {
  std::string out = std::to_string(d_.back());
  for (auto it = d_.rbegin() + 1; it != d_.rend(); ++it) {
    std::string part = std::to_string(*it);
    out += std::string(9 - part.size(), '0') + part;
  }
  return out;
}

double BigUInt::to_double() const {
  double v = 0;
  for (auto it = d_.rbegin(); it != d_.rend(); ++it) {
    v = v * static_cast<double>(kBase) + static_cast<double>(*it);
    if (std::isinf(v)) return std::numeric_limits<double>::infinity();
  }
  return v;
}

bool BigUInt::operator<=(double x) const {
  double v = to_double();
  return v <= x;
}

}  // namespace relcur
