#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "kneser/errors.hpp"
#include "kneser/expression.hpp"

namespace kneser {

// Euclidean mean curvature operator pieces: Phi(v) = v/sqrt(1+v^2) = v*J(v).
template <class Real>
Real curvature_phi(const Real& v) {
  using std::sqrt;
  return v / sqrt(Real(1) + v * v);
}

template <class Real>
Real curvature_j(const Real& v) {
  using std::sqrt;
  return Real(1) / sqrt(Real(1) + v * v);
}

struct CurvatureOperator {
  template <class Real>
  Real phi(const Real& v) const {
    return curvature_phi(v);
  }
  template <class Real>
  Real j(const Real& v) const {
    return curvature_j(v);
  }
};

// Description of the nonlinearity F. Power nonlinearities use the odd
// extension sign(u)|u|^gamma so that F(u)u > 0 holds on both sides.
struct FSpec {
  enum class Kind { power, linear, table, expression };
  Kind kind = Kind::linear;
  double gamma = 1.0;
  std::vector<std::pair<double, double>> table;  // (u, F(u)) knots, must include (0,0)
  std::string expr;

  static FSpec power(double gamma) {
    if (!(gamma > 0)) throw std::invalid_argument("power nonlinearity needs gamma > 0");
    FSpec f;
    f.kind = Kind::power;
    f.gamma = gamma;
    return f;
  }
  static FSpec linear() { return FSpec{}; }
  static FSpec from_table(std::vector<std::pair<double, double>> knots) {
    FSpec f;
    f.kind = Kind::table;
    f.table = std::move(knots);
    std::sort(f.table.begin(), f.table.end());
    bool has_origin = false;
    for (auto& [u, v] : f.table)
      if (u == 0.0 && v == 0.0) has_origin = true;
    if (f.table.size() < 2 || !has_origin)
      throw std::invalid_argument("table nonlinearity needs at least two knots including (0,0)");
    return f;
  }
  static FSpec from_expression(std::string e) {
    FSpec f;
    f.kind = Kind::expression;
    f.expr = std::move(e);
    return f;
  }
};

enum class RatioStatus { finite, unbounded, inconclusive };

// Evaluator for F together with F~(v) = F(v)/v extended continuously to 0 by
// ratio_at_zero (the limit required finite by the standing assumptions).
template <class Real>
class Nonlinearity {
 public:
  explicit Nonlinearity(FSpec spec) : spec_(std::move(spec)) {
    if (spec_.kind == FSpec::Kind::expression) ast_ = parse_expression(spec_.expr);
    estimate_ratio_at_zero();
  }

  const FSpec& spec() const { return spec_; }

  Real operator()(const Real& u) const {
    using std::abs;
    using std::pow;
    switch (spec_.kind) {
      case FSpec::Kind::power: {
        if (u == 0) return Real(0);
        Real mag = pow(abs(u), Real(spec_.gamma));
        return u > 0 ? mag : -mag;
      }
      case FSpec::Kind::linear: return u;
      case FSpec::Kind::table: return interp(u);
      case FSpec::Kind::expression: return eval_expression<Real>(*ast_, u);
    }
    throw std::logic_error("unhandled nonlinearity kind");
  }

  Real ratio(const Real& u) const {
    if (u == 0) return ratio_at_zero();
    return (*this)(u) / u;
  }

  Real ratio_at_zero() const { return Real(ratio0_); }
  RatioStatus ratio_status() const { return status_; }

 private:
  Real interp(const Real& u) const {
    double x = static_cast<double>(u);
    const auto& t = spec_.table;
    if (x <= t.front().first) return Real(t.front().second);
    if (x >= t.back().first) return Real(t.back().second);
    auto it = std::upper_bound(t.begin(), t.end(), std::make_pair(x, std::numeric_limits<double>::infinity()));
    auto lo = *(it - 1);
    auto hi = *it;
    double w = (x - lo.first) / (hi.first - lo.first);
    return Real(lo.second + w * (hi.second - lo.second));
  }

  void estimate_ratio_at_zero() {
    switch (spec_.kind) {
      case FSpec::Kind::power:
        if (spec_.gamma > 1) {
          ratio0_ = 0;
        } else if (spec_.gamma == 1) {
          ratio0_ = 1;
        } else {
          ratio0_ = std::numeric_limits<double>::infinity();
          status_ = RatioStatus::unbounded;
        }
        return;
      case FSpec::Kind::linear: ratio0_ = 1; return;
      case FSpec::Kind::table: {
        // linear interpolation: the ratio near 0+ is the first segment slope
        for (size_t i = 0; i + 1 < spec_.table.size(); ++i) {
          if (spec_.table[i].first == 0.0) {
            double du = spec_.table[i + 1].first;
            ratio0_ = spec_.table[i + 1].second / du;
            return;
          }
        }
        ratio0_ = 0;
        return;
      }
      case FSpec::Kind::expression: {
        // plateau scan of F(u)/u on u = 2^-i
        std::vector<double> vals;
        for (int i = 4; i <= 44; ++i) {
          double u = std::ldexp(1.0, -i);
          double fu = static_cast<double>(eval_expression<double>(*ast_, u));
          vals.push_back(fu / u);
        }
        double last = vals.back();
        bool plateau = true;
        for (size_t i = vals.size() - 6; i < vals.size(); ++i)
          plateau = plateau && std::fabs(vals[i] - last) <= 1e-3 * (std::fabs(last) + 1e-12);
        if (plateau) {
          ratio0_ = last;
          return;
        }
        bool growing = true;
        for (size_t i = vals.size() - 10; i + 1 < vals.size(); ++i)
          growing = growing && vals[i + 1] >= vals[i] * 1.02;
        ratio0_ = last;
        status_ = growing ? RatioStatus::unbounded : RatioStatus::inconclusive;
        return;
      }
    }
  }

  FSpec spec_;
  ExprPtr ast_;
  double ratio0_ = 0;
  RatioStatus status_ = RatioStatus::finite;
};

template <class Real>
struct LcResult {
  Real value{};
  bool unbounded = false;
  int grid_points = 0;
  int refinements = 0;
};

// L_c = sup of F(u)/u over (0, c]. Closed forms for the power and linear
// kinds; otherwise a geometric grid with two refinement passes near the
// maximizer, compared against the ratio at zero.
template <class Real>
LcResult<Real> compute_Lc(const Nonlinearity<Real>& F, Real c, int grid_points = 1024,
                          int refinements = 2) {
  using std::pow;
  if (!(c > 0)) throw std::invalid_argument("compute_Lc: c must be positive");
  const FSpec& spec = F.spec();
  if (spec.kind == FSpec::Kind::power) {
    if (spec.gamma < 1)
      return {std::numeric_limits<Real>::infinity(), true, 0, 0};  // sup blows up at 0+
    if (spec.gamma == 1) return {Real(1), false, 0, 0};
    return {pow(c, Real(spec.gamma - 1)), false, 0, 0};
  }
  if (spec.kind == FSpec::Kind::linear) return {Real(1), false, 0, 0};

  if (F.ratio_status() == RatioStatus::unbounded)
    throw UnboundedRatioError("compute_Lc: F(u)/u grows without plateau toward 0+");

  const double span = 1e-9;  // grid reaches c * span
  auto ratio_at = [&](double t) { return F.ratio(Real(t)); };
  double lo = static_cast<double>(c) * span, hi = static_cast<double>(c);
  double step = std::pow(span, 1.0 / (grid_points - 1));
  Real best = F.ratio_at_zero();
  double best_u = 0;
  double u = hi;
  std::vector<Real> first_vals;
  for (int i = 0; i < grid_points; ++i, u *= step) {
    Real v = ratio_at(u);
    first_vals.push_back(v);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  // growth toward 0 without a finite limit estimate
  if (best_u != 0 && best_u <= lo / span * 1e-6 && F.ratio_status() == RatioStatus::inconclusive)
    throw UnboundedRatioError("compute_Lc: grid maximum sits at the 0+ end without a plateau");
  for (int pass = 0; pass < refinements && best_u != 0; ++pass) {
    double a = best_u * step, b = best_u / step;  // step < 1
    double fine = std::pow(b / a, 1.0 / 63);
    double x = a;
    for (int i = 0; i < 64; ++i, x *= fine) {
      if (x > hi) break;
      Real v = ratio_at(x);
      if (v > best) {
        best = v;
        best_u = x;
      }
    }
  }
  return {best, false, grid_points, refinements};
}

}  // namespace kneser
