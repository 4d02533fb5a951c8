#pragma once

#include <boost/multiprecision/float128.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <limits>

namespace kneser {

// Extended working precision for oracle-grade runs (113 significand bits).
using Extended = boost::multiprecision::float128;
static_assert(std::numeric_limits<Extended>::digits >= 100,
              "extended mode needs at least 100 significand bits");

// Exact arithmetic for witness identities.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

template <class Real>
double to_double(const Real& x) {
  return static_cast<double>(x);
}

}  // namespace kneser
