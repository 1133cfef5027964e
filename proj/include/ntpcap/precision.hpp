#pragma once

// Extended-precision scalar types. Each rung of the precision ladder is a
// distinct compile-time MPFR type, so no global precision state is touched.

#include <boost/multiprecision/mpfr.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace ntpcap {

template <unsigned Digits10>
using MpReal = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<Digits10>,
                                             boost::multiprecision::et_off>;

using Real50 = MpReal<50>;
using Real100 = MpReal<100>;
using Real200 = MpReal<200>;
using Real400 = MpReal<400>;

template <class Real>
inline double to_double(const Real& x) {
  if constexpr (std::is_same_v<Real, double>) {
    return x;
  } else {
    return x.template convert_to<double>();
  }
}

template <class Real>
inline int mantissa_bits() {
  return std::numeric_limits<Real>::digits;
}

/// Relative rank threshold at working precision: `base` at double precision,
/// scaled by eps(Real)/eps(double) otherwise.
template <class Real>
inline Real scaled_tolerance(double base) {
  if constexpr (std::is_same_v<Real, double>) {
    return base;
  } else {
    return Real(base) * std::numeric_limits<Real>::epsilon() / Real(std::numeric_limits<double>::epsilon());
  }
}

template <class Real>
inline std::string to_string_full(const Real& x) {
  if constexpr (std::is_same_v<Real, double>) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  } else {
    return x.str(std::numeric_limits<Real>::digits10, std::ios_base::scientific);
  }
}

}  // namespace ntpcap
