#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "kneser/errors.hpp"
#include "kneser/expression.hpp"

namespace kneser {

namespace detail {

template <class Real>
Real log1p_r(const Real& x) {
  if constexpr (std::is_floating_point_v<Real>) {
    return std::log1p(x);
  } else {
    using std::log;
    return log(Real(1) + x);
  }
}

template <class Real>
Real ipow(Real base, long e) {
  if (e < 0) return Real(1) / ipow(base, -e);
  Real acc(1);
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

template <class Real>
Real pow_r(const Real& base, double e) {
  using std::pow;
  if (e == static_cast<double>(static_cast<long>(e)) && std::fabs(e) <= 512)
    return ipow(base, static_cast<long>(e));
  return pow(base, Real(e));
}

}  // namespace detail

// A real sequence on the half line Z_m = {m, m+1, ...}. Values are computed
// lazily and memoized; a table-backed sequence is defined only up to its
// declared horizon. Handles share state, values are immutable once computed.
template <class Real>
class HalfLineSeq {
  static constexpr long kCacheLimit = 1 << 21;

  struct State {
    long start = 0;
    std::optional<long> table_end;  // inclusive, table-backed only
    std::function<Real(long)> fn;
    mutable std::mutex mu;
    mutable std::vector<Real> cache;
    mutable std::vector<uint8_t> have;
  };

 public:
  HalfLineSeq(long start, std::function<Real(long)> fn)
      : st_(std::make_shared<State>()) {
    st_->start = start;
    st_->fn = std::move(fn);
  }

  // empty sequence: any evaluation is out of range
  HalfLineSeq() : HalfLineSeq(0, nullptr) { st_->table_end = -1; }

  static HalfLineSeq from_values(long start, std::vector<Real> values) {
    if (values.empty()) throw std::invalid_argument("table sequence needs at least one value");
    HalfLineSeq s(start, nullptr);
    s.st_->table_end = start + static_cast<long>(values.size()) - 1;
    s.st_->cache = std::move(values);
    s.st_->have.assign(s.st_->cache.size(), 1);
    return s;
  }

  long start_index() const { return st_->start; }
  std::optional<long> table_end() const { return st_->table_end; }

  Real operator()(long k) const {
    check_domain(k);
    long i = k - st_->start;
    if (st_->table_end) return st_->cache[static_cast<size_t>(i)];
    if (i >= kCacheLimit) return st_->fn(k);
    std::lock_guard<std::mutex> lock(st_->mu);
    if (static_cast<size_t>(i) >= st_->cache.size()) {
      size_t n = static_cast<size_t>(i) + 1;
      st_->cache.resize(n, Real(0));
      st_->have.resize(n, 0);
    }
    if (!st_->have[static_cast<size_t>(i)]) {
      st_->cache[static_cast<size_t>(i)] = st_->fn(k);
      st_->have[static_cast<size_t>(i)] = 1;
    }
    return st_->cache[static_cast<size_t>(i)];
  }

  // Bulk scans bypass the memo cache (the closed forms are pure).
  Real eval_uncached(long k) const {
    check_domain(k);
    if (st_->table_end) return st_->cache[static_cast<size_t>(k - st_->start)];
    return st_->fn(k);
  }

 private:
  void check_domain(long k) const {
    if (k < st_->start) {
      std::ostringstream os;
      os << "sequence evaluated at k=" << k << " below start index " << st_->start;
      throw std::out_of_range(os.str());
    }
    if (st_->table_end && k > *st_->table_end) {
      std::ostringstream os;
      os << "table sequence evaluated at k=" << k << " beyond horizon " << *st_->table_end;
      throw std::out_of_range(os.str());
    }
  }

  std::shared_ptr<State> st_;
};

// Built-in coefficient families. Parameters are plain doubles (problem-file
// data); evaluation happens in the working precision.
struct SeqFamily {
  enum class Kind { table, power, exponential, scaled_abs_sin, product_closed_form, expression };

  Kind kind = Kind::table;
  double coeff = 1.0;   // multiplier for power/exponential
  double alpha = 0.0;   // power exponent
  double shift = 0.0;   // power shift: coeff*(k+shift)^alpha
  double base = 2.0;    // exponential base: coeff*base^(rate*k)
  double rate = 1.0;
  double scale = 1.0;   // scaled_abs_sin: scale*|sin k|/k
  std::vector<double> table;
  std::string expr;

  static SeqFamily power_family(double alpha, double shift, double coeff = 1.0) {
    SeqFamily f;
    f.kind = Kind::power;
    f.alpha = alpha;
    f.shift = shift;
    f.coeff = coeff;
    return f;
  }
  static SeqFamily exponential(double base, double rate, double coeff = 1.0) {
    SeqFamily f;
    f.kind = Kind::exponential;
    f.base = base;
    f.rate = rate;
    f.coeff = coeff;
    return f;
  }
  static SeqFamily abs_sin_over_k(double scale) {
    SeqFamily f;
    f.kind = Kind::scaled_abs_sin;
    f.scale = scale;
    return f;
  }
  static SeqFamily closed_form_product() {
    SeqFamily f;
    f.kind = Kind::product_closed_form;
    return f;
  }
  static SeqFamily from_table(std::vector<double> values) {
    SeqFamily f;
    f.kind = Kind::table;
    f.table = std::move(values);
    return f;
  }
  static SeqFamily from_expression(std::string e) {
    SeqFamily f;
    f.kind = Kind::expression;
    f.expr = std::move(e);
    return f;
  }
};

template <class Real>
HalfLineSeq<Real> make_seq(const SeqFamily& family, long m) {
  using Kind = SeqFamily::Kind;
  switch (family.kind) {
    case Kind::table: {
      std::vector<Real> v(family.table.begin(), family.table.end());
      return HalfLineSeq<Real>::from_values(m, std::move(v));
    }
    case Kind::power: {
      if (m + family.shift <= 0)
        throw std::invalid_argument("power family: m + shift must be positive");
      double alpha = family.alpha, shift = family.shift, coeff = family.coeff;
      return HalfLineSeq<Real>(m, [alpha, shift, coeff](long k) {
        return Real(coeff) * detail::pow_r(Real(k) + Real(shift), alpha);
      });
    }
    case Kind::exponential: {
      if (!(family.base > 0))
        throw std::invalid_argument("exponential family: base must be positive");
      double base = family.base, rate = family.rate, coeff = family.coeff;
      return HalfLineSeq<Real>(m, [base, rate, coeff](long k) {
        using std::pow;
        return Real(coeff) * pow(Real(base), Real(rate) * Real(k));
      });
    }
    case Kind::scaled_abs_sin: {
      if (m < 1) throw std::invalid_argument("scaled_abs_sin family: start index must be >= 1");
      double scale = family.scale;
      return HalfLineSeq<Real>(m, [scale](long k) {
        using std::abs;
        using std::sin;
        return Real(scale) * abs(sin(Real(k))) / Real(k);
      });
    }
    case Kind::product_closed_form: {
      if (m < 1)
        throw std::invalid_argument("product_closed_form family: start index must be >= 1");
      return HalfLineSeq<Real>(m, [](long k) {
        Real acc(1);
        for (long j = 1; j < k; ++j) acc *= Real(2 * j + 1) / Real(2 * j);
        return acc;
      });
    }
    case Kind::expression: {
      auto ast = parse_expression(family.expr);
      return HalfLineSeq<Real>(m, [ast](long k) { return eval_expression<Real>(*ast, Real(k)); });
    }
  }
  throw std::invalid_argument("unknown sequence family");
}

// Sum of ln(1+q_k) for k in [m, K]. exp() of the result is the factor product
// without ever forming it; a factor 1+q_k <= 0 is a domain error.
template <class Real>
Real log_product(const HalfLineSeq<Real>& q, long m, long K) {
  Real sum(0);
  for (long k = m; k <= K; ++k) {
    Real qk = q(k);
    if (!(Real(1) + qk > 0)) {
      std::ostringstream os;
      os << "log_product: factor 1+q_k <= 0 at k=" << k;
      throw std::domain_error(os.str());
    }
    sum += detail::log1p_r(qk);
  }
  return sum;
}

// Truncated sum of a nonnegative-term series with a tail estimate. The
// convergence flag is Cauchy-style (dyadic block sums decay geometrically);
// whether the tail estimate met the requested tol is visible separately.
template <class Real>
struct SeriesResult {
  Real partial{};        // sum over the scanned range
  Real tail_estimate{};  // geometric extrapolation of the dyadic block sums
  bool converged = false;  // block sums decay; the series passes the Cauchy test
  bool diverged = false;   // block sums stay flat (or the estimate is infinite)
  long horizon = 0;        // last index included

  Real value() const { return partial + tail_estimate; }
};

namespace detail {

// Octave-block summation of term(j), j >= k0: block i spans roughly
// [b, 2b), so the block ratio reads the decay exponent directly. The scan
// stops early once the geometric tail estimate drops below tol, or as soon
// as three consecutive octaves refuse to decay (divergence).
template <class Real, class Fn>
SeriesResult<Real> sum_positive_tail(Fn&& term, long k0, long cap, Real tol) {
  SeriesResult<Real> res;
  Real inf = std::numeric_limits<Real>::infinity();
  long j = k0;
  Real prev_block = -1;
  int flat_blocks = 0;
  int ratios = 0;  // the first ratio mixes the short floor block; wait for two
  res.tail_estimate = inf;
  while (j <= cap) {
    long end = std::min(cap, std::max(j + 15, 2 * j - 1));
    bool truncated = end < std::max(j + 15, 2 * j - 1);
    Real block(0);
    for (long i = j; i <= end; ++i) block += term(i);
    res.partial += block;
    res.horizon = end;
    if (!truncated) {
      if (prev_block > 0) {
        ++ratios;
        Real q = block / prev_block;
        if (q >= Real(0.995)) {
          if (++flat_blocks >= 3) {
            res.tail_estimate = inf;
            res.diverged = true;
            return res;
          }
        } else {
          flat_blocks = 0;
        }
        res.tail_estimate = (q < 1) ? block * q / (Real(1) - q) : inf;
      } else if (block == 0) {
        res.tail_estimate = Real(0);
        ratios = 2;
      }
      if (ratios >= 2 && res.tail_estimate <= tol) break;
      prev_block = block;
    }
    j = end + 1;
  }
  res.diverged = !(res.tail_estimate < inf);
  res.converged = !res.diverged;
  return res;
}

}  // namespace detail

// Sum_{j>=k} 1/r_j truncated with a tail estimate below tol when the series
// converges; the non-convergence flag signals an H1-type violation.
template <class Real>
SeriesResult<Real> tail_sum_reciprocal(const HalfLineSeq<Real>& r, long k, long horizon, Real tol) {
  auto term = [&](long j) {
    Real v = r.eval_uncached(j);
    if (!(v > 0)) {
      std::ostringstream os;
      os << "tail_sum_reciprocal: nonpositive coefficient at j=" << j;
      throw std::domain_error(os.str());
    }
    return Real(1) / v;
  };
  return detail::sum_positive_tail<Real>(term, k, horizon, tol);
}

}  // namespace kneser
