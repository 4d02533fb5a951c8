#pragma once

// shared equations and specs used across the test suites

#include <cmath>

#include "kneser/bvp.hpp"
#include "kneser/linear.hpp"

namespace fixtures {

using kneser::BVPSpec;
using kneser::FSpec;
using kneser::HalfLineSeq;
using kneser::LinearEq;

template <class Real>
HalfLineSeq<Real> seq_a_squares(long m = 1) {
  return HalfLineSeq<Real>(m, [](long k) { return Real(k + 1) * Real(k + 1); });
}

template <class Real>
HalfLineSeq<Real> seq_b_sin(long m = 1) {
  return HalfLineSeq<Real>(m, [](long k) {
    using std::abs;
    using std::sin;
    using std::sqrt;
    return abs(sin(Real(k))) / (4 * sqrt(Real(2)) * Real(k));
  });
}

// the worked example: a=(k+1)^2, b=|sin k|/(4 sqrt2 k), F=u^3, m=1
template <class Real>
BVPSpec<Real> ex2_spec(Real c) {
  return BVPSpec<Real>(seq_a_squares<Real>(), seq_b_sin<Real>(), FSpec::power(3.0), 1, c);
}

// linearized comparison equation of the worked example (unscaled form)
template <class Real>
LinearEq<Real> ex2_linearized(Real c) {
  using std::sqrt;
  Real s = sqrt(Real(1) + c * c);
  Real Lc = c * c;
  return LinearEq<Real>{
      HalfLineSeq<Real>(1, [s](long k) { return Real(k + 1) * Real(k + 1) / s; }),
      HalfLineSeq<Real>(1,
                        [Lc](long k) {
                          using std::abs;
                          using std::sin;
                          using std::sqrt;
                          return Lc * abs(sin(Real(k))) / (4 * sqrt(Real(2)) * Real(k));
                        }),
      1};
}

// scaled representative with r = a: p = sqrt(1+c^2) L_c b
template <class Real>
LinearEq<Real> ex2_linearized_scaled(Real c) {
  using std::sqrt;
  Real s = sqrt(Real(1) + c * c);
  Real Lc = c * c;
  return LinearEq<Real>{
      seq_a_squares<Real>(),
      HalfLineSeq<Real>(1,
                        [s, Lc](long k) {
                          using std::abs;
                          using std::sin;
                          using std::sqrt;
                          return s * Lc * abs(sin(Real(k))) / (4 * sqrt(Real(2)) * Real(k));
                        }),
      1};
}

// the Euler-type equation: Delta((k+1)^2 Dx) + x/4 = 0
template <class Real>
LinearEq<Real> eur() {
  return LinearEq<Real>{seq_a_squares<Real>(),
                        HalfLineSeq<Real>(1, [](long) { return Real(0.25); }), 1};
}

// same solution set, written with r = 4(k+1)^2 and p = 1 for Sturm pairing
template <class Real>
LinearEq<Real> eur_scaled() {
  return LinearEq<Real>{
      HalfLineSeq<Real>(1, [](long k) { return Real(4) * Real(k + 1) * Real(k + 1); }),
      HalfLineSeq<Real>(1, [](long) { return Real(1); }), 1};
}

}  // namespace fixtures
