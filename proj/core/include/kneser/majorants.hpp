#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "kneser/linear.hpp"
#include "kneser/rational_check.hpp"

namespace kneser {

// Parametric comparison equations with closed-form positive decreasing
// witnesses. Scaling r and p by the same lambda leaves the solution set (and
// the witness) unchanged, so one witness serves the whole family.
template <class Real>
struct MajorantFamily {
  std::string name;
  long m = 1;
  std::function<Real(long)> r_profile;  // lambda = 1 coefficients
  std::function<Real(long)> p_profile;
  std::function<Real(long)> witness_fn;

  LinearEq<Real> equation(Real lambda) const {
    if (!(lambda > 0)) throw std::invalid_argument("majorant family: lambda must be positive");
    auto r = r_profile, p = p_profile;
    return LinearEq<Real>{HalfLineSeq<Real>(m, [r, lambda](long k) { return lambda * r(k); }),
                          HalfLineSeq<Real>(m, [p, lambda](long k) { return lambda * p(k); }), m};
  }

  SolutionTrace<Real> witness_trace(Real lambda, long K) const {
    std::vector<Real> v(static_cast<size_t>(K - m + 1));
    for (long k = m; k <= K; ++k) v[static_cast<size_t>(k - m)] = witness_fn(k);
    return make_trace(equation(lambda), K, std::move(v));
  }
};

namespace detail {

template <class Real>
std::vector<MajorantFamily<Real>> build_majorant_library() {
  // registration gate: every witness must satisfy its recurrence exactly
  for (const auto& f : exact_families())
    for (long k = f.m; k <= 50; ++k)
      if (exact_residual(f, k) != 0)
        throw std::logic_error("majorant library: witness residual not exactly zero for " +
                               f.name);

  std::vector<MajorantFamily<Real>> lib;
  lib.push_back({"euler-product", 1,
                 [](long k) { return Real(2 * (k + 1) * (2 * k + 1)); },
                 [](long) { return Real(1); },
                 [](long k) {
                   Real acc(1);
                   for (long j = 1; j < k; ++j) acc *= Real(2 * j + 1) / Real(2 * j);
                   return acc / Real(2 * k);
                 }});
  lib.push_back({"geometric", 1,
                 [](long k) { return Real(k) * detail::ipow(Real(2), k + 1); },
                 [](long k) { return detail::ipow(Real(2), k + 1); },
                 [](long k) { return detail::ipow(Real(2), -k); }});
  lib.push_back({"cubic", 1,
                 [](long k) { return Real(k) * Real(k) * Real(k); },
                 [](long k) { return Real(k * k + 3 * k + 1) / Real(k + 2); },
                 [](long k) { return Real(1) / Real(k); }});
  return lib;
}

}  // namespace detail

// The built-in majorant library: (i) the Euler-type equation with the
// rising-product witness, (ii) the geometric equation with witness 2^-k,
// (iii) the cubic equation with witness 1/k.
template <class Real>
const std::vector<MajorantFamily<Real>>& library_majorants() {
  static const std::vector<MajorantFamily<Real>> lib = detail::build_majorant_library<Real>();
  return lib;
}

}  // namespace kneser
