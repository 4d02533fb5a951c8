#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "kneser/errors.hpp"
#include "kneser/sequence.hpp"

namespace kneser {

// Self-adjoint linear recurrence Delta(r_k Delta y_k) + p_k y_{k+1} = 0 on Z_m
// with r_k > 0 and p_k >= 0. Sign conditions are enforced at evaluation.
template <class Real>
struct LinearEq {
  HalfLineSeq<Real> r;
  HalfLineSeq<Real> p;
  long m = 0;

  Real r_at(long k) const { return checked_r(r(k), k); }
  Real p_at(long k) const { return checked_p(p(k), k); }

  // cache-bypassing variants for long sweeps
  Real r_raw(long k) const { return checked_r(r.eval_uncached(k), k); }
  Real p_raw(long k) const { return checked_p(p.eval_uncached(k), k); }

 private:
  static Real checked_r(Real v, long k) {
    if (!(v > 0)) {
      std::ostringstream os;
      os << "linear equation: r_k must be positive, got nonpositive value at k=" << k;
      throw std::domain_error(os.str());
    }
    return v;
  }
  static Real checked_p(Real v, long k) {
    if (v < 0) {
      std::ostringstream os;
      os << "linear equation: p_k must be nonnegative, got negative value at k=" << k;
      throw std::domain_error(os.str());
    }
    return v;
  }
};

// Same solution set, scaled coefficient pair (gamma*r, gamma*p). Sturm
// comparisons act on the literal pair, so the representative matters.
template <class Real>
LinearEq<Real> scale_eq(const LinearEq<Real>& eq, Real gamma) {
  if (!(gamma > 0)) throw std::invalid_argument("scale_eq: factor must be positive");
  HalfLineSeq<Real> r = eq.r, p = eq.p;
  return LinearEq<Real>{
      HalfLineSeq<Real>(eq.m, [r, gamma](long k) { return gamma * r.eval_uncached(k); }),
      HalfLineSeq<Real>(eq.m, [p, gamma](long k) { return gamma * p.eval_uncached(k); }),
      eq.m};
}

// A finite-horizon solution: values on [m, K] together with the quasi
// differences r_k*Delta y_k on [m, K-1].
template <class Real>
struct SolutionTrace {
  LinearEq<Real> eq;
  long m = 0;
  long K = 0;
  std::vector<Real> values;       // y_k, k in [m, K]
  std::vector<Real> quasi_diff;   // r_k (y_{k+1} - y_k), k in [m, K-1]
  std::optional<Real> tail_constant;

  Real value(long k) const { return values.at(static_cast<size_t>(k - m)); }
  Real delta(long k) const { return value(k + 1) - value(k); }
  Real quasi(long k) const { return quasi_diff.at(static_cast<size_t>(k - m)); }

  // |Delta(r_k Delta y_k) + p_k y_{k+1}| at interior k in [m, K-2]
  Real residual(long k) const {
    using std::abs;
    return abs(quasi(k + 1) - quasi(k) + eq.p_at(k) * value(k + 1));
  }
  Real residual_scale(long k) const {
    using std::abs;
    return abs(quasi(k)) + abs(quasi(k + 1)) + abs(eq.p_at(k) * value(k + 1));
  }
};

template <class Real>
SolutionTrace<Real> make_trace(const LinearEq<Real>& eq, long K, std::vector<Real> values) {
  SolutionTrace<Real> t{eq, eq.m, K, std::move(values), {}, std::nullopt};
  t.quasi_diff.resize(static_cast<size_t>(K - eq.m));
  for (long k = eq.m; k < K; ++k)
    t.quasi_diff[static_cast<size_t>(k - eq.m)] = eq.r_at(k) * (t.value(k + 1) - t.value(k));
  return t;
}

// Forward two-term recurrence from initial data (y_m, y_{m+1}):
//   y_{k+2} = [(r_{k+1} + r_k - p_k) y_{k+1} - r_k y_k] / r_{k+1}
template <class Real>
SolutionTrace<Real> solve_ivp(const LinearEq<Real>& eq, Real y_m, Real y_m1, long K) {
  using std::abs;
  using std::isfinite;
  if (K <= eq.m + 1) throw std::invalid_argument("solve_ivp: K must exceed m+1");
  std::vector<Real> v(static_cast<size_t>(K - eq.m + 1));
  v[0] = y_m;
  v[1] = y_m1;
  for (long k = eq.m; k + 2 <= K; ++k) {
    Real rk = eq.r_raw(k), rk1 = eq.r_raw(k + 1), pk = eq.p_raw(k);
    Real next = ((rk1 + rk - pk) * v[static_cast<size_t>(k + 1 - eq.m)] -
                 rk * v[static_cast<size_t>(k - eq.m)]) /
                rk1;
    if (!isfinite(next)) {
      std::ostringstream os;
      os << "solve_ivp: overflow at k=" << k + 2 << " (dominant growth)";
      throw OverflowError(os.str());
    }
    v[static_cast<size_t>(k + 2 - eq.m)] = next;
  }
  return make_trace(eq, K, std::move(v));
}

// Indices n in (m, K] where y_n = 0 (within the running sign tolerance) or
// y_{n-1} y_n < 0.
template <class Real>
std::vector<long> generalized_zeros(const SolutionTrace<Real>& trace) {
  using std::abs;
  std::vector<long> zeros;
  Real running_max(0);
  running_max = abs(trace.value(trace.m));
  for (long n = trace.m + 1; n <= trace.K; ++n) {
    Real yn = trace.value(n), yp = trace.value(n - 1);
    Real zeta = Real(1e-13) * running_max;
    if (abs(yn) <= zeta || yp * yn < 0) zeros.push_back(n);
    if (abs(yn) > running_max) running_max = abs(yn);
  }
  return zeros;
}

// Riccati ratio w_k = r_k Delta y_k / y_k on [m, K-1].
template <class Real>
HalfLineSeq<Real> riccati(const SolutionTrace<Real>& trace) {
  std::vector<Real> w(static_cast<size_t>(trace.K - trace.m));
  for (long k = trace.m; k < trace.K; ++k) {
    Real yk = trace.value(k);
    if (yk == 0) {
      std::ostringstream os;
      os << "riccati: solution vanishes at k=" << k;
      throw std::domain_error(os.str());
    }
    w[static_cast<size_t>(k - trace.m)] = trace.quasi(k) / yk;
  }
  return HalfLineSeq<Real>::from_values(trace.m, std::move(w));
}

}  // namespace kneser
