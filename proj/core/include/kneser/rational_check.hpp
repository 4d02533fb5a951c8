#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kneser/precision.hpp"

namespace kneser {

// Exact-arithmetic forms of the closed-form witnesses. Residuals are computed
// in big rationals so the identities can be checked to literal zero.

// y_k = prod_{j=1}^{k-1} (2j+1)/(2j), k >= 1 (empty product = 1)
inline Rational euler_product_y(long k) {
  Rational acc(1);
  for (long j = 1; j < k; ++j) acc *= Rational(2 * j + 1, 2 * j);
  return acc;
}

// residual of Delta^2 y_k + y_{k+1} / (2(k+1)(2k+1)) at k
inline Rational euler_product_residual(long k) {
  Rational y0 = euler_product_y(k), y1 = euler_product_y(k + 1), y2 = euler_product_y(k + 2);
  return (y2 - 2 * y1 + y0) + y1 / Rational(2 * (k + 1) * (2 * k + 1));
}

struct ExactFamily {
  std::string name;
  long m;
  std::function<Rational(long)> r;        // coefficient profile at lambda = 1
  std::function<Rational(long)> p;
  std::function<Rational(long)> witness;  // exact positive decreasing solution
};

// residual of Delta(r_k Delta x_k) + p_k x_{k+1} at k, exact
inline Rational exact_residual(const ExactFamily& f, long k) {
  Rational x0 = f.witness(k), x1 = f.witness(k + 1), x2 = f.witness(k + 2);
  return f.r(k + 1) * (x2 - x1) - f.r(k) * (x1 - x0) + f.p(k) * x1;
}

inline Rational pow2(long e) {
  BigInt v = BigInt(1) << e;
  return Rational(v);
}

inline const std::vector<ExactFamily>& exact_families() {
  static const std::vector<ExactFamily> fams = [] {
    std::vector<ExactFamily> v;
    v.push_back({"euler-product", 1,
                 [](long k) { return Rational(2 * (k + 1) * (2 * k + 1)); },
                 [](long) { return Rational(1); },
                 // x_k = Delta y_k = y_k / (2k)
                 [](long k) { return euler_product_y(k) / Rational(2 * k); }});
    v.push_back({"geometric", 1,
                 [](long k) { return Rational(k) * pow2(k + 1); },
                 [](long k) { return pow2(k + 1); },
                 [](long k) { return Rational(1) / pow2(k); }});
    v.push_back({"cubic", 1,
                 [](long k) { return Rational(k * k * k); },
                 [](long k) { return Rational(k * k + 3 * k + 1, k + 2); },
                 [](long k) { return Rational(1, k); }});
    return v;
  }();
  return fams;
}

}  // namespace kneser
