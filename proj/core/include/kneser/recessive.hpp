#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <vector>

#include "kneser/errors.hpp"
#include "kneser/linear.hpp"

namespace kneser {

enum class TerminalRule {
  zero,        // terminal data (y_N, y_{N+1}) = (1, 0)
  asymptotic,  // terminal ratio y_{N+1}/y_N matched to the tail-sum asymptote
  automatic,   // asymptotic when sum 1/r_j converges, zero otherwise
};

template <class Real>
struct RecessiveOptions {
  Real tol = Real(1e-10);        // stabilization: max relative change on [m, K]
  long horizon_cap = 1L << 22;   // largest admissible terminal index
  int min_doublings = 1;         // at least this many horizon doublings
  int fixed_doublings = 0;       // when > 0: exactly this many horizons, no tol test
  TerminalRule terminal = TerminalRule::automatic;
  // optional memo for the asymptotic terminal ratio, shared across repeated
  // solves of slowly drifting equations (one tail scan per horizon)
  std::shared_ptr<std::map<long, Real>> terminal_ratio_cache;
};

template <class Real>
struct RecessiveReport {
  SolutionTrace<Real> trace;                  // normalized candidate on [m, K]
  std::vector<long> horizons_used;            // terminal index N per doubling
  Real stabilization_error{};                 // last inter-horizon change on [m, K]
  std::vector<Real> divergence_partial_sums;  // S_i = sum_{j=m}^{N_i-1} 1/(r_j u_j u_{j+1})
  std::vector<Real> full_values;              // final candidate on [m, N_last+1]
  long full_horizon = 0;                      // N_last
  TerminalRule terminal_used = TerminalRule::zero;

  Real full_value(long k) const {
    return full_values.at(static_cast<size_t>(k - trace.m));
  }
};

namespace detail {

// Backward sweep from terminal (y_N, y_{N+1}) = (1, rho) down to m, rescaled
// on overflow, then normalized so that the value at m equals y_m. A sign
// change or a toleranced zero inside (m, N] raises OscillationError.
template <class Real>
std::vector<Real> backward_candidate(const LinearEq<Real>& eq, long N, Real rho, Real y_m) {
  using std::abs;
  const Real big = Real(1e200);
  const long m = eq.m;
  std::vector<Real> v(static_cast<size_t>(N + 2 - m));
  v[static_cast<size_t>(N + 1 - m)] = rho;
  v[static_cast<size_t>(N - m)] = Real(1);
  for (long k = N - 1; k >= m; --k) {
    Real rk = eq.r_raw(k), rk1 = eq.r_raw(k + 1), pk = eq.p_raw(k);
    Real yk = ((rk1 + rk - pk) * v[static_cast<size_t>(k + 1 - m)] -
               rk1 * v[static_cast<size_t>(k + 2 - m)]) /
              rk;
    v[static_cast<size_t>(k - m)] = yk;
    if (abs(yk) > big) {
      Real s = Real(1) / abs(yk);
      for (long j = k; j <= N + 1; ++j) v[static_cast<size_t>(j - m)] *= s;
    }
  }
  // generalized-zero scan, terminal index excluded
  Real running_max = abs(v[static_cast<size_t>(N - m)]);
  for (long n = N; n > m; --n) {
    Real yn = v[static_cast<size_t>(n - m)], yp = v[static_cast<size_t>(n - 1 - m)];
    if (abs(yp) > running_max) running_max = abs(yp);
    if (abs(yn) <= Real(1e-13) * running_max || yp * yn < 0) {
      std::ostringstream os;
      os << "recessive: candidate has a generalized zero at n=" << n
         << " (equation oscillatory on the working range?)";
      throw OscillationError(os.str(), n);
    }
  }
  Real v_m = v[0];
  Real scale = y_m / v_m;
  for (auto& x : v) x *= scale;
  v[0] = y_m;  // anchor exactly despite rounding in the scale
  return v;
}

// High-accuracy reciprocal tail sum_{j>=k0} 1/r_j: octave partial sums with a
// Shanks refinement, iterated until two refinements agree. Exact-geometric
// tails collapse immediately; power-law tails gain two orders over the raw
// block estimate.
template <class Real>
Real reciprocal_tail_shanks(const HalfLineSeq<Real>& r, long k0, Real rel_goal = Real(1e-10),
                            int max_octaves = 6) {
  using std::abs;
  std::vector<Real> P;
  Real partial(0);
  Real best = std::numeric_limits<Real>::quiet_NaN();
  long b = k0;
  for (int d = 0; d < max_octaves; ++d) {
    long end = std::max(b + 15, 2 * b - 1);
    Real block(0);
    for (long i = b; i <= end; ++i) {
      Real v = r.eval_uncached(i);
      if (!(v > 0)) throw std::domain_error("reciprocal tail: nonpositive coefficient");
      block += Real(1) / v;
    }
    partial += block;
    P.push_back(partial);
    b = end + 1;
    if (block == 0) return partial;
    size_t n = P.size();
    if (n >= 3) {
      Real d1 = P[n - 2] - P[n - 3], d2 = P[n - 1] - P[n - 2];
      Real den = d1 - d2;
      Real shanks = (den > 0) ? P[n - 1] + d2 * d2 / den : P[n - 1];
      using std::isnan;
      if (!isnan(best) && abs(shanks - best) <= rel_goal * abs(shanks)) return shanks;
      best = shanks;
    }
  }
  using std::isnan;
  return isnan(best) ? partial : best;
}

// Terminal ratio from the tail-sum asymptote: y_{N+1}/y_N = 1 - (1/r_N)/R_N.
template <class Real>
Real asymptotic_terminal_ratio(const LinearEq<Real>& eq, long N) {
  using std::isfinite;
  Real RN = reciprocal_tail_shanks(eq.r, N);
  if (!(RN > 0) || !isfinite(RN)) return Real(0);
  Real rho = Real(1) - (Real(1) / eq.r_raw(N)) / RN;
  return (rho > 0 && rho < 1) ? rho : Real(0);
}

}  // namespace detail

// Minimal-solution approximation: backward recurrence from doubled terminal
// horizons N = 2K, 4K, ... until the values on [m, K] stabilize. The returned
// candidate is an exact solution of the recurrence (up to rounding) whose
// Riccati ratio never exceeds the true recessive one.
template <class Real>
RecessiveReport<Real> recessive(const LinearEq<Real>& eq, Real y_m, long K,
                                const RecessiveOptions<Real>& opt = {}) {
  using std::abs;
  const long m = eq.m;
  if (!(y_m > 0)) throw std::invalid_argument("recessive: y_m must be positive");
  if (K < m + 2) throw std::invalid_argument("recessive: K must be at least m+2");

  RecessiveReport<Real> rep;

  // p == 0 short circuit: the minimal solution is the reciprocal tail sum
  // (constant when sum 1/r diverges). Zero p is probed on a finite window.
  {
    long probe_end = std::min(opt.horizon_cap, std::max(4 * K, m + 4096));
    bool p_zero = true;
    for (long k = m; k <= probe_end && p_zero; ++k) p_zero = (eq.p_raw(k) == 0);
    if (p_zero) {
      long N = std::max(2 * K, m + 16);
      auto tail = tail_sum_reciprocal(eq.r, N + 2, 64 * (N + 2), Real(0));
      std::vector<Real> v(static_cast<size_t>(N + 2 - m));
      if (tail.converged) {
        Real acc = tail.value();  // sum_{j >= N+2} 1/r_j
        for (long k = N + 1; k >= m; --k) {
          acc += Real(1) / eq.r_raw(k);
          v[static_cast<size_t>(k - m)] = acc;
        }
        Real scale = y_m / v[0];
        for (auto& x : v) x *= scale;
        v[0] = y_m;
        rep.terminal_used = TerminalRule::asymptotic;
      } else {
        std::fill(v.begin(), v.end(), y_m);
        rep.terminal_used = TerminalRule::zero;
      }
      rep.full_values = std::move(v);
      rep.full_horizon = N;
      rep.horizons_used = {N};
      rep.stabilization_error = Real(0);
      std::vector<Real> window(rep.full_values.begin(),
                               rep.full_values.begin() + (K - m + 1));
      rep.trace = make_trace(eq, K, std::move(window));
      Real S(0);
      for (long j = m; j < N; ++j)
        S += Real(1) / (eq.r_raw(j) * rep.full_value(j) * rep.full_value(j + 1));
      rep.divergence_partial_sums = {S};
      return rep;
    }
  }

  TerminalRule rule = opt.terminal;
  if (rule == TerminalRule::automatic) {
    auto probe = tail_sum_reciprocal(eq.r, std::max(2 * K, m + 16),
                                     8 * std::max(2 * K, m + 16) + 4096, Real(0));
    rule = probe.converged ? TerminalRule::asymptotic : TerminalRule::zero;
  }
  rep.terminal_used = rule;

  auto coefficients_finite = [&](long N) {
    using std::isfinite;
    return isfinite(eq.r_raw(N)) && isfinite(eq.r_raw(N + 1)) && isfinite(eq.p_raw(N));
  };

  std::vector<Real> prev_window, full;
  Real chg = std::numeric_limits<Real>::infinity();
  long N = std::max(2 * K, m + 16);
  int horizons = 0;
  for (;;) {
    if (N > opt.horizon_cap) {
      if (opt.fixed_doublings > 0 || prev_window.empty()) {
        std::ostringstream os;
        os << "recessive: horizon cap " << opt.horizon_cap << " reached before schedule";
        throw NoStabilizationError(os.str(), N / 2, static_cast<double>(chg));
      }
      std::ostringstream os;
      os << "recessive: no stabilization at tol by horizon cap " << opt.horizon_cap;
      throw NoStabilizationError(os.str(), N / 2, static_cast<double>(chg));
    }
    if (!coefficients_finite(N)) {
      // fast-growing coefficients leave the floating range before the
      // schedule ends; keep what the finite horizons produced
      if (horizons >= 2) break;
      std::ostringstream os;
      os << "recessive: coefficients exceed the floating range near k=" << N;
      throw OverflowError(os.str());
    }
    Real rho(0);
    if (rule == TerminalRule::asymptotic) {
      if (opt.terminal_ratio_cache) {
        auto it = opt.terminal_ratio_cache->find(N);
        if (it != opt.terminal_ratio_cache->end()) {
          rho = it->second;
        } else {
          rho = detail::asymptotic_terminal_ratio(eq, N);
          opt.terminal_ratio_cache->emplace(N, rho);
        }
      } else {
        rho = detail::asymptotic_terminal_ratio(eq, N);
      }
    }
    full = detail::backward_candidate(eq, N, rho, y_m);
    rep.horizons_used.push_back(N);
    rep.full_horizon = N;
    ++horizons;
    std::vector<Real> window(full.begin(), full.begin() + (K - m + 1));
    if (!prev_window.empty()) {
      chg = Real(0);
      for (size_t i = 0; i < window.size(); ++i) {
        Real denom = abs(window[i]);
        if (denom > 0) chg = std::max(chg, abs(window[i] - prev_window[i]) / denom);
      }
    }
    bool done;
    if (opt.fixed_doublings > 0) {
      done = horizons >= opt.fixed_doublings;
    } else {
      done = horizons >= 2 && horizons >= opt.min_doublings + 1 && chg <= opt.tol;
    }
    prev_window = std::move(window);
    if (done) break;
    N *= 2;
  }

  rep.full_values = std::move(full);
  rep.stabilization_error = (horizons >= 2) ? chg : Real(0);
  rep.trace = make_trace(eq, K, std::move(prev_window));

  // divergence diagnostics on the final candidate
  rep.divergence_partial_sums.reserve(rep.horizons_used.size());
  {
    Real S(0);
    long j = m;
    for (long Ni : rep.horizons_used) {
      for (; j < Ni; ++j) {
        Real term = Real(1) / (eq.r_raw(j) * rep.full_value(j) * rep.full_value(j + 1));
        S += term;
      }
      rep.divergence_partial_sums.push_back(S);
    }
  }
  return rep;
}

namespace detail {

// Sum_j p_j * (sum_{i >= j+offset} 1/r_i) with a dyadic-block convergence test.
template <class Real>
SeriesResult<Real> weighted_tail_double_sum(const LinearEq<Real>& eq, int offset, long cap) {
  const long m = eq.m;
  long H = std::min(cap, 1L << 17);
  auto tail = tail_sum_reciprocal(eq.r, H + offset, 8 * (H + offset), Real(0));
  if (!tail.converged) {
    SeriesResult<Real> res;
    res.horizon = H;
    res.tail_estimate = std::numeric_limits<Real>::infinity();
    return res;  // inner sum already divergent
  }
  std::vector<Real> terms(static_cast<size_t>(H - m + 1));
  Real T = tail.value();  // sum_{i >= H+offset} 1/r_i
  for (long j = H; j >= m; --j) {
    terms[static_cast<size_t>(j - m)] = eq.p_raw(j) * T;
    if (j > m) T += Real(1) / eq.r_raw(j - 1 + offset);
  }
  auto term_fn = [&](long j) { return terms[static_cast<size_t>(j - m)]; };
  return sum_positive_tail<Real>(term_fn, m, H, Real(1e-8));
}

}  // namespace detail

// Lemma-style tail constant d = lim u_k / sum_{j>=k} 1/r_j, fitted on three
// doubled tail points of the final candidate. Requires sum 1/r < infinity and
// sum p_j sum_{i>j} 1/r_i < infinity.
template <class Real>
Real tail_asymptote(const LinearEq<Real>& eq, RecessiveReport<Real>& report) {
  using std::abs;
  auto h1 = tail_sum_reciprocal(eq.r, eq.m, 1L << 22, Real(0));
  if (!h1.converged)
    throw HypothesisViolatedError("tail_asymptote: sum 1/r_j does not converge");
  auto h2 = detail::weighted_tail_double_sum(eq, 1, 1L << 22);
  if (!h2.converged)
    throw HypothesisViolatedError(
        "tail_asymptote: double sum p_j * tail(1/r) does not converge");

  long Nf = report.full_horizon;
  long k1 = std::max(eq.m + 1, Nf / 8);
  long k2 = std::max(k1 + 1, Nf / 4);
  long k3 = std::max(k2 + 1, Nf / 2);
  Real ratios[3];
  long ks[3] = {k1, k2, k3};
  for (int i = 0; i < 3; ++i) {
    auto R = tail_sum_reciprocal(eq.r, ks[i], 8 * ks[i] + 4096, Real(0));
    ratios[i] = report.full_value(ks[i]) / R.value();
  }
  Real lo = std::min({ratios[0], ratios[1], ratios[2]});
  Real hi = std::max({ratios[0], ratios[1], ratios[2]});
  Real d = ratios[2];
  if (!(abs(d) > 0) || (hi - lo) / abs(d) > Real(0.05))
    throw UnstableFitError("tail_asymptote: ratio u_k / tail(1/r) has not plateaued");
  auto RK = tail_sum_reciprocal(eq.r, report.trace.K, 8 * report.trace.K + 4096, Real(0));
  Real at_K = report.trace.value(report.trace.K) / RK.value();
  if (abs(at_K - d) > Real(0.05) * abs(d))
    throw UnstableFitError("tail_asymptote: ratio at the trace horizon disagrees with the fit");
  report.trace.tail_constant = d;
  return d;
}

}  // namespace kneser
