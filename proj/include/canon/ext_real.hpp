#pragma once

// Extended reals are plain doubles restricted to finite values and +-inf.
// IEEE arithmetic already gives the conventions the kernels rely on:
//   x + (-inf) = -inf for finite x, max(-inf, 0) = 0, exp(-inf) = 0.
// The only thing to guard is NaN, which must never be produced.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace canon {

using ExtReal = double;

inline constexpr ExtReal kPosInf = std::numeric_limits<double>::infinity();
inline constexpr ExtReal kNegInf = -std::numeric_limits<double>::infinity();

inline bool is_finite(ExtReal x) noexcept { return std::isfinite(x); }

// [a]^+
inline ExtReal positive_part(ExtReal a) noexcept { return a > 0.0 ? a : 0.0; }

// a - b, throwing on the one undefined case (inf - inf of the same sign).
inline ExtReal ext_sub(ExtReal a, ExtReal b) {
  const ExtReal r = a - b;
  if (std::isnan(r)) throw std::domain_error("extended-real subtraction produced NaN");
  return r;
}

inline ExtReal ext_add(ExtReal a, ExtReal b) {
  const ExtReal r = a + b;
  if (std::isnan(r)) throw std::domain_error("extended-real addition produced NaN");
  return r;
}

// exp(-[a]^+), the Metropolis-like acceptance factor.
inline double acceptance(ExtReal a) noexcept { return a > 0.0 ? std::exp(-a) : 1.0; }

// Parses "-inf", "+inf"/"inf" or a decimal number.
ExtReal parse_ext_real(const std::string& token);

}  // namespace canon
