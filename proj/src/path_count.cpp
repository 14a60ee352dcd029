#include "dtraj/path_count.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace dtraj {

namespace {

double log10_of(const BigInt& v) {
  if (v == 0) return -std::numeric_limits<double>::infinity();
  const HighReal r(abs(v));
  return static_cast<double>(log10(r));
}

const BigInt kPrintLimit("1000000000000000000");

}  // namespace

PathCount PathCount::exact(BigInt value, double residual) {
  PathCount c;
  c.exact_ = true;
  c.sign_ = value > 0 ? 1 : (value < 0 ? -1 : 0);
  c.log10_ = log10_of(value);
  c.value_ = std::move(value);
  c.residual_ = residual;
  return c;
}

PathCount PathCount::approx(int sign, double log10_magnitude, double relative_error) {
  PathCount c;
  c.exact_ = false;
  c.sign_ = sign;
  c.log10_ = sign == 0 ? -std::numeric_limits<double>::infinity() : log10_magnitude;
  c.relative_error_ = relative_error;
  return c;
}

const BigInt& PathCount::value() const {
  if (!exact_) throw std::logic_error("path count is only known approximately");
  return value_;
}

std::string format_scientific(int sign, double log10_magnitude, int significant) {
  if (sign == 0) return "0";
  double exponent = std::floor(log10_magnitude);
  double mantissa = std::pow(10.0, log10_magnitude - exponent);
  const double scale = std::pow(10.0, significant - 1);
  mantissa = std::round(mantissa * scale) / scale;
  if (mantissa >= 10.0) {
    mantissa /= 10.0;
    exponent += 1.0;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%.*fe%+03d", sign < 0 ? "-" : "", significant - 1, mantissa,
                static_cast<int>(exponent));
  return buf;
}

std::string PathCount::to_string() const {
  if (exact_ && abs(value_) <= kPrintLimit) return value_.str();
  if (exact_) {
    // Mantissa from the integer itself so no digits are lost to log10().
    const BigInt magnitude = abs(value_);
    const std::string digits = magnitude.str();
    const int exponent = static_cast<int>(digits.size()) - 1;
    const HighReal mantissa = HighReal(magnitude) / pow(HighReal(10), exponent);
    return format_scientific(sign_, static_cast<double>(boost::multiprecision::log10(mantissa)) + exponent);
  }
  return format_scientific(sign_, log10_);
}

PathCount operator*(const PathCount& x, const PathCount& y) {
  if (x.exact_ && y.exact_) return PathCount::exact(x.value_ * y.value_);
  if (x.sign_ == 0 || y.sign_ == 0) return PathCount::zero();
  return PathCount::approx(x.sign_ * y.sign_, x.log10_ + y.log10_,
                           x.relative_error_ + y.relative_error_);
}

PathCount ClosedFormValue::to_count() const {
  if (error_bound < HighReal(0.25)) {
    const HighReal rounded = round(value);
    BigInt n = rounded.convert_to<BigInt>();
    const double residual = static_cast<double>(value - rounded);
    if (n < 0 && abs(value) <= HighReal(0.5) + error_bound) n = 0;
    return PathCount::exact(std::move(n), residual);
  }
  if (abs(value) <= error_bound) return PathCount::approx(0, 0.0, 0.0);
  const int sign = value > 0 ? 1 : -1;
  return PathCount::approx(sign, static_cast<double>(log10(abs(value))),
                           static_cast<double>(error_bound / abs(value)));
}

}  // namespace dtraj
