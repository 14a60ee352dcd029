#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace dtraj {

using BigInt = boost::multiprecision::cpp_int;

// 50 significant decimal digits with a practically unbounded exponent.
// Closed-form path counts cancel heavily; double loses whole digits of the
// answer for corridors of realistic size.
using HighReal = boost::multiprecision::cpp_bin_float_50;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;

}  // namespace dtraj
