#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "kneser/sequence.hpp"

namespace kneser {

// The product upper bound c * prod_{j=m}^{k-1} (1 + M*Dz_j/z_j) driven by a
// positive sequence z with M in (0,1). Factors are accumulated in the log
// domain; each factor equals (1-M) + M*z_{j+1}/z_j > 0.
template <class Real>
struct ProductBound {
  Real base{};  // c
  Real M{};
  HalfLineSeq<Real> driver;  // z
  long m = 0;
  long K = 0;
  std::vector<Real> log_values;  // ln(bound_k) - ln(c), k in [m, K]

  Real value(long k) const {
    using std::exp;
    return base * exp(log_values.at(static_cast<size_t>(k - m)));
  }
};

template <class Real>
ProductBound<Real> product_bound(Real c, Real M, const HalfLineSeq<Real>& z, long K) {
  using std::log;
  if (!(M > 0 && M < 1)) throw std::invalid_argument("product_bound: M must lie in (0,1)");
  if (!(c > 0)) throw std::invalid_argument("product_bound: c must be positive");
  long m = z.start_index();
  ProductBound<Real> b{c, M, z, m, K, {}};
  b.log_values.resize(static_cast<size_t>(K - m + 1));
  Real acc(0);
  b.log_values[0] = acc;
  Real zk = z(m);
  for (long k = m; k < K; ++k) {
    if (!(zk > 0)) {
      std::ostringstream os;
      os << "product_bound: driver not positive at k=" << k;
      throw std::domain_error(os.str());
    }
    Real zk1 = z(k + 1);
    Real factor = (Real(1) - M) + M * zk1 / zk;  // = 1 + M*Dz/z, positive by construction
    acc += log(factor);
    b.log_values[static_cast<size_t>(k + 1 - m)] = acc;
    zk = zk1;
  }
  if (!(zk > 0)) throw std::domain_error("product_bound: driver not positive at K");
  return b;
}

template <class Real>
struct DominationReport {
  bool ok = false;
  long first_violation = -1;
  Real worst_ratio{};  // max x_k / bound_k over the range
};

// Checks x_k <= bound_k (with tiny relative slack) on [begin, end]; the bound
// sequence dominates any positive x with x_m <= c whose Riccati ratio is
// dominated by M*Dz/z.
template <class Real>
DominationReport<Real> check_domination(const HalfLineSeq<Real>& x, const ProductBound<Real>& bound,
                                        long begin, long end) {
  DominationReport<Real> rep;
  rep.ok = true;
  rep.worst_ratio = Real(0);
  for (long k = begin; k <= end; ++k) {
    Real bk = bound.value(k), xk = x(k);
    Real ratio = xk / bk;
    if (ratio > rep.worst_ratio) rep.worst_ratio = ratio;
    if (!(xk <= bk * (Real(1) + Real(1e-12)))) {
      rep.ok = false;
      rep.first_violation = k;
      return rep;
    }
  }
  return rep;
}

enum class ZeroLimitStatus { evidenced, inconclusive };

template <class Real>
struct ZeroLimitVerdict {
  ZeroLimitStatus status = ZeroLimitStatus::inconclusive;
  long steps = 0;          // factors consumed from m when the threshold was crossed
  long index = 0;          // index after the last factor
  Real log_product{};      // ln prod at the stopping point
};

// Evidence that prod (1 + M*Dz_j/z_j) tends to zero for a positive
// nonincreasing z with z -> 0: the log product falls below ln(tol) within the
// horizon cap. The limit statement itself is not decidable from finite data.
template <class Real>
ZeroLimitVerdict<Real> product_tends_to_zero(const HalfLineSeq<Real>& z, Real M, Real tol,
                                             long horizon_cap) {
  using std::log;
  if (!(M > 0 && M < 1))
    throw std::invalid_argument("product_tends_to_zero: M must lie in (0,1)");
  long m = z.start_index();
  Real threshold = log(tol);
  Real acc(0);
  Real zk = z.eval_uncached(m);
  ZeroLimitVerdict<Real> v;
  for (long j = m; j < horizon_cap; ++j) {
    Real zk1 = z.eval_uncached(j + 1);
    if (zk1 > zk) {
      std::ostringstream os;
      os << "product_tends_to_zero: driver increases at j=" << j;
      throw std::domain_error(os.str());
    }
    acc += log((Real(1) - M) + M * zk1 / zk);
    zk = zk1;
    if (acc <= threshold) {
      v.status = ZeroLimitStatus::evidenced;
      v.steps = j - m + 1;
      v.index = j + 1;
      v.log_product = acc;
      return v;
    }
  }
  v.status = ZeroLimitStatus::inconclusive;
  v.steps = horizon_cap - m;
  v.index = horizon_cap;
  v.log_product = acc;
  return v;
}

// The doubly exponential pair x_k = 2^(-2^k), y_k = 2^(-2^(k+2)): the Riccati
// domination holds with M = 1/2, yet x_k / sqrt(y_k) = 2^(2^k) is unbounded.
// All checks run in exponent (log2) arithmetic; 2^(2^k) never materializes.
struct DiscrepancyRow {
  long k = 0;
  double riccati_lhs = 0;   // Dx_k/x_k = 2^(-2^k) - 1
  double riccati_rhs = 0;   // (1/2) Dy_k/y_k
  bool riccati_ok = false;
  std::int64_t log2_ratio = 0;  // log2(x_k / sqrt(y_k)) = 2^k, exact
};

struct DiscrepancyReport {
  std::vector<DiscrepancyRow> rows;
  bool all_riccati_ok = true;
  bool exponent_identity_ok = true;
};

inline DiscrepancyReport discrepancy_example(long K) {
  if (K < 2) throw std::invalid_argument("discrepancy_example: K must be at least 2");
  if (K > 62) throw std::invalid_argument("discrepancy_example: exponents exceed 64-bit range");
  DiscrepancyReport rep;
  for (long k = 1; k <= K; ++k) {
    DiscrepancyRow row;
    row.k = k;
    std::int64_t e = std::int64_t(1) << k;  // 2^k
    // x_{k+1}/x_k = 2^(-2^k); underflow to 0 for large k only sharpens the
    // inequality since the true lhs exceeds the computed one by < 2^-2^k <= 1/4,
    // while rhs - lhs >= 1/4 holds exactly in exponent arithmetic (2^k >= 2).
    row.riccati_lhs = std::exp2(static_cast<double>(-e)) - 1.0;
    row.riccati_rhs = 0.5 * (std::exp2(static_cast<double>(-4 * e)) - 1.0);
    row.riccati_ok = (e >= 2) && (row.riccati_lhs <= row.riccati_rhs);
    row.log2_ratio = -e + 2 * e;  // -2^k + 2^(k+1)
    rep.all_riccati_ok = rep.all_riccati_ok && row.riccati_ok;
    rep.exponent_identity_ok = rep.exponent_identity_ok && (row.log2_ratio == e);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace kneser
