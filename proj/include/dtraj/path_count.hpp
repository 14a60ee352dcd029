#pragma once

#include <string>

#include "dtraj/numeric.hpp"

namespace dtraj {

// A path count that is either an exact integer or, when the magnitude is
// beyond what the evaluation can pin down to the unit, a sign and a base-10
// logarithm of the magnitude.
class PathCount {
 public:
  static PathCount exact(BigInt value, double residual = 0.0);
  static PathCount approx(int sign, double log10_magnitude, double relative_error);
  static PathCount zero() { return exact(BigInt(0)); }

  bool is_exact() const noexcept { return exact_; }
  // Throws std::logic_error on approximate counts.
  const BigInt& value() const;

  int sign() const noexcept { return sign_; }
  // -inf for zero.
  double log10() const noexcept { return log10_; }

  // Exact counts from closed forms: pre-rounding value minus the integer.
  double residual() const noexcept { return residual_; }
  // Approximate counts: estimated relative error of the magnitude.
  double relative_error() const noexcept { return relative_error_; }

  // Integers up to 1e18 verbatim, otherwise six significant digits
  // ("6.40201e+52").
  std::string to_string() const;

  friend PathCount operator*(const PathCount& x, const PathCount& y);

 private:
  bool exact_ = true;
  BigInt value_ = 0;
  int sign_ = 0;
  double log10_ = 0.0;
  double residual_ = 0.0;
  double relative_error_ = 0.0;
};

// Closed-form sum with an a-priori bound on its absolute rounding error.
struct ClosedFormValue {
  HighReal value = 0;
  HighReal error_bound = 0;

  // Rounds to an exact integer when the bound is below a quarter unit;
  // results within the bound of zero collapse to 0.
  PathCount to_count() const;
};

std::string format_scientific(int sign, double log10_magnitude, int significant = 6);

}  // namespace dtraj
