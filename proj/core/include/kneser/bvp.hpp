#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kneser/errors.hpp"
#include "kneser/decay.hpp"
#include "kneser/linear.hpp"
#include "kneser/majorants.hpp"
#include "kneser/nonlinearity.hpp"
#include "kneser/recessive.hpp"
#include "kneser/sequence.hpp"
#include "kneser/sturm.hpp"

namespace kneser {

// The half-line problem: Delta(a_k Phi(Delta x_k)) + b_k F(x_{k+1}) = 0 with
// x_m = c, x positive nonincreasing, x_k -> 0.
template <class Real>
struct BVPSpec {
  HalfLineSeq<Real> a;
  HalfLineSeq<Real> b;
  Nonlinearity<Real> F;
  long m = 0;
  Real c{};

  BVPSpec(HalfLineSeq<Real> a_, HalfLineSeq<Real> b_, FSpec f, long m_, Real c_)
      : a(std::move(a_)), b(std::move(b_)), F(std::move(f)), m(m_), c(c_) {
    if (!(c > 0)) throw std::invalid_argument("BVPSpec: c must be positive");
  }

  Real curvature_factor() const {
    using std::sqrt;
    return sqrt(Real(1) + c * c);
  }
};

enum class CheckStatus { pass, fail, inconclusive };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

template <class Real>
struct CheckItem {
  CheckStatus status = CheckStatus::inconclusive;
  Real value{};          // the probed sum / ratio
  Real tail_estimate{};  // when series-valued
  long horizon = 0;
  std::string note;
};

template <class Real>
struct HypothesisReport {
  CheckItem<Real> h1;  // sum 1/a_j < inf, a_j > 0
  CheckItem<Real> h2;  // sum b_j sum_{i>=j} 1/a_i < inf, b_j >= 0
  CheckItem<Real> h3;  // F continuous, F(u)u > 0, lim F(u)/u at 0+ finite

  bool all_pass() const {
    return h1.status == CheckStatus::pass && h2.status == CheckStatus::pass &&
           h3.status == CheckStatus::pass;
  }
  bool any_fail() const {
    return h1.status == CheckStatus::fail || h2.status == CheckStatus::fail ||
           h3.status == CheckStatus::fail;
  }
};

template <class Real>
HypothesisReport<Real> check_hypotheses(const BVPSpec<Real>& spec, long horizon = 1L << 20,
                                        Real tol = Real(1e-8)) {
  using std::abs;
  HypothesisReport<Real> rep;

  // H1: positivity of a and summability of 1/a
  try {
    auto s = tail_sum_reciprocal(spec.a, spec.m, horizon, tol);
    rep.h1.value = s.value();
    rep.h1.tail_estimate = s.tail_estimate;
    rep.h1.horizon = s.horizon;
    rep.h1.status = s.converged ? CheckStatus::pass : CheckStatus::fail;
    if (!s.converged) rep.h1.note = "sum 1/a_j shows no convergent tail";
  } catch (const std::domain_error& e) {
    rep.h1.status = CheckStatus::fail;
    rep.h1.note = e.what();
  }

  // H2: b_j >= 0 and the weighted tail double sum
  try {
    long scan_end = std::min(horizon, 1L << 17);
    for (long j = spec.m; j <= scan_end; ++j) {
      if (spec.b.eval_uncached(j) < 0) {
        rep.h2.status = CheckStatus::fail;
        std::ostringstream os;
        os << "b_j negative at j=" << j;
        rep.h2.note = os.str();
        break;
      }
    }
    if (rep.h2.status != CheckStatus::fail) {
      LinearEq<Real> pair{spec.a, spec.b, spec.m};
      auto d = detail::weighted_tail_double_sum(pair, 0, horizon);
      rep.h2.value = d.value();
      rep.h2.tail_estimate = d.tail_estimate;
      rep.h2.horizon = d.horizon;
      rep.h2.status = d.converged ? CheckStatus::pass : CheckStatus::fail;
      if (!d.converged) rep.h2.note = "sum b_j * tail(1/a) shows no convergent tail";
    }
  } catch (const std::domain_error& e) {
    rep.h2.status = CheckStatus::fail;
    rep.h2.note = e.what();
  }

  // H3: sign condition on a log grid of (0, c] plus the ratio at 0+
  {
    bool sign_ok = true;
    long bad_i = -1;
    for (int i = 0; i <= 60 && sign_ok; ++i) {
      Real u = spec.c * detail::ipow(Real(2), -i);
      if (!(spec.F(u) > 0)) {
        sign_ok = false;
        bad_i = i;
      }
      if (spec.F.spec().kind != FSpec::Kind::table) {
        if (!(spec.F(-u) < 0)) {
          sign_ok = false;
          bad_i = i;
        }
      }
    }
    rep.h3.value = spec.F.ratio_at_zero();
    if (!sign_ok) {
      rep.h3.status = CheckStatus::fail;
      std::ostringstream os;
      os << "sign condition F(u)u > 0 fails near u = c*2^-" << bad_i;
      rep.h3.note = os.str();
    } else if (spec.F.ratio_status() == RatioStatus::unbounded) {
      rep.h3.status = CheckStatus::fail;
      rep.h3.note = "F(u)/u unbounded toward 0+";
    } else if (spec.F.ratio_status() == RatioStatus::inconclusive) {
      rep.h3.status = CheckStatus::inconclusive;
      rep.h3.note = "F(u)/u did not plateau toward 0+";
    } else {
      rep.h3.status = CheckStatus::pass;
    }
  }
  return rep;
}

// The linearized comparison equation: Delta((a_k/sqrt(1+c^2)) Dz_k) + L_c b_k z_{k+1} = 0.
template <class Real>
LinearEq<Real> linearized_majorant(const BVPSpec<Real>& spec) {
  auto lc = compute_Lc(spec.F, spec.c);
  if (lc.unbounded)
    throw UnboundedRatioError("linearized_majorant: L_c is not finite (condition on F fails)");
  Real s = spec.curvature_factor();
  HalfLineSeq<Real> a = spec.a, b = spec.b;
  Real Lc = lc.value;
  return LinearEq<Real>{
      HalfLineSeq<Real>(spec.m, [a, s](long k) { return a.eval_uncached(k) / s; }),
      HalfLineSeq<Real>(spec.m, [b, Lc](long k) { return Lc * b.eval_uncached(k); }), spec.m};
}

template <class Real>
struct Cor1Report {
  bool pass = false;
  Real lambda{};      // the lambda the check ran with
  Real lambda_min{};  // sup_k sqrt(1+c^2) L_c b_k
  Real lambda_max{};  // inf_k a_k / (4 (k+1)^2)
  Real a_margin{};    // min_k a_k - 4 lambda (k+1)^2
  Real b_margin{};    // min_k lambda - sqrt(1+c^2) L_c b_k
  long first_violation = -1;
  char which = ' ';
  std::string note;
};

// Effective criterion: a_k >= 4 lambda (k+1)^2 and sqrt(1+c^2) L_c b_k <= lambda.
// With lambda unset the exact feasible interval [lambda_min, lambda_max] is
// computed and the largest feasible lambda is used (the equality end of the
// a-inequality, matching the worked example).
template <class Real>
Cor1Report<Real> check_cor1(const BVPSpec<Real>& spec, std::optional<Real> lambda, long k_end) {
  Cor1Report<Real> rep;
  auto lc = compute_Lc(spec.F, spec.c);
  if (lc.unbounded) {
    rep.note = "L_c not finite";
    return rep;
  }
  Real s = spec.curvature_factor();
  Real lam_max = std::numeric_limits<Real>::infinity(), lam_min(0);
  for (long k = spec.m; k <= k_end; ++k) {
    Real kk = Real(k + 1) * Real(k + 1);
    lam_max = std::min(lam_max, spec.a.eval_uncached(k) / (4 * kk));
    lam_min = std::max(lam_min, s * lc.value * spec.b.eval_uncached(k));
  }
  rep.lambda_min = lam_min;
  rep.lambda_max = lam_max;
  Real lam = lambda ? *lambda : lam_max;
  rep.lambda = lam;
  if (!(lam > 0)) {
    rep.note = "no positive lambda available";
    return rep;
  }
  rep.a_margin = std::numeric_limits<Real>::infinity();
  rep.b_margin = std::numeric_limits<Real>::infinity();
  for (long k = spec.m; k <= k_end; ++k) {
    Real kk = Real(k + 1) * Real(k + 1);
    Real am = spec.a.eval_uncached(k) - 4 * lam * kk;
    Real bm = lam - s * lc.value * spec.b.eval_uncached(k);
    if (am < rep.a_margin) rep.a_margin = am;
    if (bm < rep.b_margin) rep.b_margin = bm;
    if ((am < 0 || bm < 0) && rep.first_violation < 0) {
      rep.first_violation = k;
      rep.which = am < 0 ? 'a' : 'b';
    }
  }
  rep.pass = rep.a_margin >= 0 && rep.b_margin >= 0;
  if (!rep.pass && rep.note.empty()) rep.note = "pointwise inequality fails";
  return rep;
}

template <class Real>
struct SolvabilityOptions {
  long range = 500;           // certificate range end K
  long scan_end = 100000;     // criterion scan range
  std::optional<Real> lambda; // pin lambda instead of the auto search
  bool enable_numeric = false;  // allow the direct numeric recessive stage
  RecessiveOptions<Real> inner{};
  long hypothesis_horizon = 1L << 20;
};

template <class Real>
struct SolvabilityVerdict {
  HypothesisReport<Real> hypotheses;
  bool certified = false;
  std::string criterion;  // "Cor1" | "library-majorant(<name>)" | "recessive-numeric"
  Real lambda{};
  std::string majorant_name;
  std::optional<PositivityCertificate<Real>> certificate;
  Real L_c{};
  Real M{};
  Real c_validity{};  // certified for every boundary value in (0, c_validity]
  std::string reason;
  int lc_grid_points = 0;
  int lc_refinements = 0;
};

// Tries, in order: the effective lambda criterion, a library majorant
// transfer, and (only when enabled) direct numeric certification of the
// linearized equation. Sufficient criteria only: failure means "not
// certified", never "unsolvable". A certificate at c is recorded as valid for
// every smaller boundary value.
template <class Real>
SolvabilityVerdict<Real> solvability_verdict(const BVPSpec<Real>& spec,
                                             const SolvabilityOptions<Real>& opt = {}) {
  using std::sqrt;
  SolvabilityVerdict<Real> v;
  v.hypotheses = check_hypotheses(spec, opt.hypothesis_horizon);
  v.M = Real(1) / spec.curvature_factor();
  if (v.hypotheses.any_fail()) {
    v.reason = "hypothesis check failed";
    return v;
  }
  LcResult<Real> lc;
  try {
    lc = compute_Lc(spec.F, spec.c);
  } catch (const UnboundedRatioError& e) {
    v.reason = e.what();
    return v;
  }
  if (lc.unbounded) {
    v.reason = "L_c is not finite";
    return v;
  }
  v.L_c = lc.value;
  v.lc_grid_points = lc.grid_points;
  v.lc_refinements = lc.refinements;

  const Real s = spec.curvature_factor();
  auto scaled_linearized = [&]() {
    // representative with r = a: Delta(a Dz) + sqrt(1+c^2) L_c b z = 0
    HalfLineSeq<Real> a = spec.a, b = spec.b;
    Real Lc = v.L_c;
    return LinearEq<Real>{
        a, HalfLineSeq<Real>(spec.m, [b, Lc, s](long k) { return s * Lc * b.eval_uncached(k); }),
        spec.m};
  }();

  // stage 1: the lambda criterion
  auto cor1 = check_cor1(spec, opt.lambda, opt.scan_end);
  if (cor1.pass) {
    v.certified = true;
    v.criterion = "Cor1";
    v.lambda = cor1.lambda;
    try {
      v.certificate = certify_positive_decreasing(scaled_linearized, opt.range,
                                                  CertifyStrategy::majorant_transfer, opt.inner);
      v.majorant_name = v.certificate->majorant_name;
    } catch (const CannotCertifyError&) {
      // criterion stands on its own; certificate is additional evidence
    }
    v.c_validity = spec.c;
    return v;
  }

  // stage 2: library majorant transfer on the scaled representative
  try {
    auto cert = certify_positive_decreasing(scaled_linearized, opt.range,
                                            CertifyStrategy::majorant_transfer, opt.inner);
    v.certified = true;
    v.criterion = "library-majorant(" + cert.majorant_name + ")";
    v.lambda = cert.lambda;
    v.majorant_name = cert.majorant_name;
    v.certificate = std::move(cert);
    v.c_validity = spec.c;
    return v;
  } catch (const CannotCertifyError&) {
  }

  // stage 3 (opt-in): numeric recessive of the linearized equation
  if (opt.enable_numeric) {
    try {
      auto cert = certify_positive_decreasing(scaled_linearized, opt.range,
                                              CertifyStrategy::recessive_numeric, opt.inner);
      v.certified = true;
      v.criterion = "recessive-numeric";
      v.majorant_name.clear();
      v.certificate = std::move(cert);
      v.c_validity = spec.c;
      return v;
    } catch (const CannotCertifyError& e) {
      v.reason = std::string("no feasible lambda; no library majorant matched; ") + e.what();
      return v;
    } catch (const std::exception& e) {
      v.reason = std::string("no feasible lambda; no library majorant matched; numeric: ") + e.what();
      return v;
    }
  }
  v.reason = "no feasible lambda; no library majorant matched";
  return v;
}

// Finite nonlinear solution data: values on [m, K+1] so that differences and
// quasi-differences cover [m, K].
template <class Real>
struct BvpTrace {
  long m = 0;
  long K = 0;
  std::vector<Real> values;        // x_k, k in [m, K+1]
  std::vector<Real> phi_quasi;     // a_k Phi(Dx_k), k in [m, K]
  std::vector<Real> residual;      // recurrence residual, k in [m, K-1]
  std::vector<Real> residual_rel;  // residual / local term scale
  std::vector<Real> omega;         // ceiling of the invariant set, k in [m, K]

  Real value(long k) const { return values.at(static_cast<size_t>(k - m)); }
  Real delta(long k) const { return value(k + 1) - value(k); }
};

template <class Real>
struct IterationRecord {
  int iter = 0;
  Real sup_change{};
  long inner_horizon = 0;
  bool omega_ok = true;
  bool sandwich_ok = true;
};

template <class Real>
struct FixedPointResult {
  BvpTrace<Real> trace;
  std::vector<IterationRecord<Real>> log;
  bool converged = false;
  bool omega_violated = false;
  bool sandwich_violated = false;
  bool b_identically_zero = false;
  int iterations = 0;
  Real max_residual_rel{};
  std::optional<Real> tail_constant;
};

template <class Real>
struct FixedPointOptions {
  Real fp_tol = Real(1e-10);
  int max_iter = 50;
  Real inner_tol = Real(0);  // 0: derived from fp_tol
  long horizon_cap = 1L << 22;
  bool pin_inner_schedule = true;
  bool check_omega = true;
};

namespace detail {

template <class Real>
void fill_bvp_trace(const BVPSpec<Real>& spec, BvpTrace<Real>& t) {
  using std::abs;
  const long m = t.m, K = t.K;
  t.phi_quasi.resize(static_cast<size_t>(K - m + 1));
  for (long k = m; k <= K; ++k)
    t.phi_quasi[static_cast<size_t>(k - m)] =
        spec.a.eval_uncached(k) * curvature_phi(t.delta(k));
  t.residual.resize(static_cast<size_t>(K - m));
  t.residual_rel.resize(static_cast<size_t>(K - m));
  for (long k = m; k < K; ++k) {
    Real bf = spec.b.eval_uncached(k) * spec.F(t.value(k + 1));
    Real q0 = t.phi_quasi[static_cast<size_t>(k - m)];
    Real q1 = t.phi_quasi[static_cast<size_t>(k + 1 - m)];
    Real res = q1 - q0 + bf;
    Real scale = abs(q0) + abs(q1) + abs(bf);
    t.residual[static_cast<size_t>(k - m)] = res;
    t.residual_rel[static_cast<size_t>(k - m)] = scale > 0 ? abs(res) / scale : abs(res);
  }
}

// b == 0 degenerate problem: a_k Phi(Dx_k) is constant -kappa, so
// Dx_k = -kappa/sqrt(a_k^2 - kappa^2) and kappa solves the boundary equation
// kappa * sum_{j>=m} 1/sqrt(a_j^2 - kappa^2) = c.
template <class Real>
FixedPointResult<Real> solve_b_zero(const BVPSpec<Real>& spec, long K,
                                    const FixedPointOptions<Real>& opt) {
  using std::sqrt;
  const long m = spec.m;
  const long cap = opt.horizon_cap;
  Real amin = std::numeric_limits<Real>::infinity();
  for (long j = m; j <= std::max(4 * K, m + 4096); ++j)
    amin = std::min(amin, spec.a.eval_uncached(j));

  auto tail_from = [&](Real t, long k) {
    auto term = [&](long j) {
      Real aj = spec.a.eval_uncached(j);
      if (!(aj > t))
        throw HypothesisViolatedError("b==0 solve: coefficient dips below the quasi-difference level");
      return Real(1) / sqrt(aj * aj - t * t);
    };
    auto s = detail::sum_positive_tail<Real>(term, k, cap, Real(0));
    if (!s.converged)
      throw HypothesisViolatedError("b==0 solve: sum 1/sqrt(a^2-kappa^2) does not converge");
    return s.value();
  };

  Real lo(0), hi = amin * (Real(1) - Real(1e-12));
  for (int it = 0; it < 200; ++it) {
    Real mid = (lo + hi) / 2;
    Real g = mid * tail_from(mid, m);
    if (g < spec.c)
      lo = mid;
    else
      hi = mid;
  }
  Real kappa = (lo + hi) / 2;

  FixedPointResult<Real> res;
  res.b_identically_zero = true;
  res.converged = true;
  res.iterations = 1;
  res.trace.m = m;
  res.trace.K = K;
  res.trace.values.resize(static_cast<size_t>(K + 2 - m));
  // backward accumulation of x_k = kappa * sum_{j>=k} 1/sqrt(a_j^2-kappa^2)
  Real acc = tail_from(kappa, K + 2);
  for (long k = K + 1; k >= m; --k) {
    Real ak = spec.a.eval_uncached(k);
    acc += Real(1) / sqrt(ak * ak - kappa * kappa);
    res.trace.values[static_cast<size_t>(k - m)] = kappa * acc;
  }
  // normalize the boundary exactly
  Real scale = spec.c / res.trace.value(m);
  for (auto& x : res.trace.values) x *= scale;
  fill_bvp_trace(spec, res.trace);
  res.max_residual_rel = Real(0);
  for (Real r : res.trace.residual_rel) res.max_residual_rel = std::max(res.max_residual_rel, r);
  res.log.push_back({1, Real(0), K, true, true});
  return res;
}

}  // namespace detail

// Nonlinear residual Delta(a_k Phi(Dx_k)) + b_k F(x_{k+1}) of an arbitrary
// candidate x given on [m, K], reported on [m, K-2].
template <class Real>
HalfLineSeq<Real> nonlinear_residual(const BVPSpec<Real>& spec, const HalfLineSeq<Real>& x,
                                     long K) {
  const long m = spec.m;
  if (K < m + 2) throw std::invalid_argument("nonlinear_residual: K must be at least m+2");
  std::vector<Real> res(static_cast<size_t>(K - 1 - m));
  for (long k = m; k <= K - 2; ++k) {
    Real d0 = x(k + 1) - x(k), d1 = x(k + 2) - x(k + 1);
    Real q0 = spec.a(k) * curvature_phi(d0);
    Real q1 = spec.a(k + 1) * curvature_phi(d1);
    res[static_cast<size_t>(k - m)] = q1 - q0 + spec.b(k) * spec.F(x(k + 1));
  }
  return HalfLineSeq<Real>::from_values(m, std::move(res));
}

// Picard-style iteration of the linearization operator: u -> recessive
// solution (normalized to c at m) of the equation with coefficients
// a_k/sqrt(1+(Du_k)^2) and b_k F(u_{k+1})/u_{k+1}. The existence theorem uses
// no iteration; convergence here is a solver heuristic and non-convergence is
// reported, not hidden.
template <class Real>
FixedPointResult<Real> fixed_point_solve(const BVPSpec<Real>& spec, long K,
                                         const FixedPointOptions<Real>& opt = {}) {
  using std::abs;
  using std::sqrt;
  const long m = spec.m;
  if (K < m + 4) throw std::invalid_argument("fixed_point_solve: K too small");

  // degenerate b == 0 short circuit (probed on the storage window)
  const long W = 8 * K;  // iterate storage window [m, W+1]
  {
    bool all_zero = true;
    for (long k = m; k <= W + 2 && all_zero; ++k) all_zero = (spec.b.eval_uncached(k) == 0);
    if (all_zero) return detail::solve_b_zero(spec, K, opt);
  }

  auto lc = compute_Lc(spec.F, spec.c);
  if (lc.unbounded) throw UnboundedRatioError("fixed_point_solve: L_c not finite");
  const Real s = spec.curvature_factor();
  const Real M = Real(1) / s;

  // the returned values carry the inner truncation bias, so the default ties
  // it to fp_tol with a floor; outer convergence relies on the pinned inner
  // schedule (smooth deterministic map), not on a vanishing bias
  Real inner_tol = opt.inner_tol;
  if (inner_tol == 0) inner_tol = std::max(Real(10) * opt.fp_tol, Real(1e-9));

  RecessiveOptions<Real> base_inner;
  base_inner.tol = inner_tol;
  base_inner.horizon_cap = opt.horizon_cap;
  base_inner.min_doublings = 2;  // candidate must reach the storage window
  // the linearized coefficients drift by at most the fp increment between
  // iterations; terminal ratios are reused across the whole solve
  base_inner.terminal_ratio_cache = std::make_shared<std::map<long, Real>>();

  // ceiling of the invariant set from the linearized majorant recessive
  auto L2 = linearized_majorant(spec);
  auto z_rep = recessive(L2, spec.c, W + 1, base_inner);
  auto z_seq = HalfLineSeq<Real>::from_values(
      m, std::vector<Real>(z_rep.full_values.begin(),
                           z_rep.full_values.begin() + (W + 2 - m)));
  auto omega = product_bound(spec.c, M, z_seq, W + 1);

  auto u = std::make_shared<std::vector<Real>>(static_cast<size_t>(W + 2 - m));
  for (long k = m; k <= W + 1; ++k) (*u)[static_cast<size_t>(k - m)] = omega.value(k);

  auto u_at = [u, m, W](long k) -> Real {
    if (k <= W + 1) return (*u)[static_cast<size_t>(k - m)];
    return Real(0);  // tail linearization around the limit value
  };

  // per-iteration equations capture the current iterate through u; each gets
  // a fresh handle so stale memo entries cannot leak across iterations
  HalfLineSeq<Real> a = spec.a, b = spec.b;
  const Nonlinearity<Real>& F = spec.F;

  FixedPointResult<Real> res;
  res.trace.m = m;
  res.trace.K = K;

  int pinned_doublings = 0;
  RecessiveReport<Real> rep;
  for (int it = 1; it <= opt.max_iter; ++it) {
    RecessiveOptions<Real> inner = base_inner;
    if (opt.pin_inner_schedule && pinned_doublings > 0) inner.fixed_doublings = pinned_doublings;
    LinearEq<Real> eq{HalfLineSeq<Real>(m,
                                        [a, u_at](long k) {
                                          Real du = u_at(k + 1) - u_at(k);
                                          if (du == 0) return a(k);
                                          return a(k) / sqrt(Real(1) + du * du);
                                        }),
                      HalfLineSeq<Real>(m,
                                        [b, &F, u_at](long k) {
                                          return b(k) * F.ratio(u_at(k + 1));
                                        }),
                      m};
    rep = recessive(eq, spec.c, K, inner);
    pinned_doublings = std::max(pinned_doublings, static_cast<int>(rep.horizons_used.size()));

    IterationRecord<Real> rec;
    rec.iter = it;
    rec.inner_horizon = rep.full_horizon;
    rec.sup_change = Real(0);
    for (long k = m; k <= K; ++k)
      rec.sup_change = std::max(rec.sup_change, abs(rep.full_value(k) - u_at(k)));
    if (opt.check_omega) {
      for (long k = m; k <= K && rec.omega_ok; ++k)
        rec.omega_ok = rep.full_value(k) >= -Real(1e-15) * spec.c &&
                       rep.full_value(k) <= omega.value(k) * (Real(1) + Real(1e-12));
      // Sturm sandwich: the iterate equation is minorized by the linearized majorant
      for (long k = m; k <= K && rec.sandwich_ok; ++k) {
        Real du = u_at(k + 1) - u_at(k);
        Real rk = a.eval_uncached(k) / sqrt(Real(1) + du * du);
        Real pk = b.eval_uncached(k) * F.ratio(u_at(k + 1));
        rec.sandwich_ok = rk >= (a.eval_uncached(k) / s) * (Real(1) - Real(1e-12)) &&
                          pk <= lc.value * b.eval_uncached(k) * (Real(1) + Real(1e-12));
      }
      res.omega_violated = res.omega_violated || !rec.omega_ok;
      res.sandwich_violated = res.sandwich_violated || !rec.sandwich_ok;
    }

    long upto = std::min(W + 1, rep.full_horizon + 1);
    for (long k = m; k <= W + 1; ++k)
      (*u)[static_cast<size_t>(k - m)] = (k <= upto) ? rep.full_value(k) : Real(0);

    res.log.push_back(rec);
    res.iterations = it;
    if (rec.sup_change <= opt.fp_tol) {
      res.converged = true;
      break;
    }
  }

  res.trace.values.assign(u->begin(), u->begin() + (K + 2 - m));
  detail::fill_bvp_trace(spec, res.trace);
  res.trace.omega.resize(static_cast<size_t>(K - m + 1));
  for (long k = m; k <= K; ++k)
    res.trace.omega[static_cast<size_t>(k - m)] = omega.value(k);
  res.max_residual_rel = Real(0);
  for (Real r : res.trace.residual_rel) res.max_residual_rel = std::max(res.max_residual_rel, r);

  // tail behavior of the final linearized equation, when its hypotheses hold
  try {
    LinearEq<Real> eq{HalfLineSeq<Real>(m,
                                        [a, u_at](long k) {
                                          Real du = u_at(k + 1) - u_at(k);
                                          if (du == 0) return a(k);
                                          return a(k) / sqrt(Real(1) + du * du);
                                        }),
                      HalfLineSeq<Real>(m,
                                        [b, &F, u_at](long k) {
                                          return b(k) * F.ratio(u_at(k + 1));
                                        }),
                      m};
    res.tail_constant = tail_asymptote(eq, rep);
  } catch (const std::exception&) {
  }
  return res;
}

template <class Real>
struct SMembershipReport {
  bool boundary_ok = false;
  bool positive_ok = false;
  bool nonincreasing_ok = false;
  bool divergence_evidenced = false;
  Real N_bound{};          // max_k x_k / tail(1/a)_k over the range
  Real partial_sum_at_K{};
  Real bound_at_K{};
  long first_violation = -1;
};

// Membership diagnostics for the solution set: boundary value, positivity,
// monotonicity, and growth of sum 1/(a_j x_j x_{j+1}) against the telescoped
// lower bound (1/N^2)(1/A_k - 1/A_m) with A_k the reciprocal tail of a.
template <class Real>
SMembershipReport<Real> verify_S_membership(const BVPSpec<Real>& spec, const BvpTrace<Real>& x) {
  using std::abs;
  SMembershipReport<Real> rep;
  const long m = x.m, K = x.K;
  rep.boundary_ok = abs(x.value(m) - spec.c) <= Real(1e-12) * spec.c;
  rep.positive_ok = true;
  rep.nonincreasing_ok = true;
  for (long k = m; k <= K; ++k) {
    if (!(x.value(k) > 0)) {
      rep.positive_ok = false;
      rep.first_violation = k;
      break;
    }
  }
  for (long k = m; k < K && rep.nonincreasing_ok; ++k)
    if (x.delta(k) > Real(1e-13) * x.value(k)) {
      rep.nonincreasing_ok = false;
      rep.first_violation = k;
    }
  if (!rep.positive_ok) return rep;

  // A_k backward from a tail estimate at K+1
  std::vector<Real> A(static_cast<size_t>(K + 1 - m + 1));
  auto tail = tail_sum_reciprocal(spec.a, K + 1, 64 * (K + 1), Real(0));
  Real acc = tail.value();
  A[static_cast<size_t>(K + 1 - m)] = acc;
  for (long k = K; k >= m; --k) {
    acc += Real(1) / spec.a.eval_uncached(k);
    A[static_cast<size_t>(k - m)] = acc;
  }
  rep.N_bound = Real(0);
  for (long k = m; k <= K; ++k)
    rep.N_bound = std::max(rep.N_bound, x.value(k) / A[static_cast<size_t>(k - m)]);

  Real S(0);
  bool above = true;
  Real N2 = rep.N_bound * rep.N_bound;
  for (long k = m + 1; k <= K; ++k) {
    long j = k - 1;
    S += Real(1) / (spec.a.eval_uncached(j) * x.value(j) * x.value(j + 1));
    Real bound = (Real(1) / A[static_cast<size_t>(k - m)] - Real(1) / A[0]) / N2;
    if (!(S >= bound * (Real(1) - Real(1e-9)))) above = false;
    if (k == K) {
      rep.partial_sum_at_K = S;
      rep.bound_at_K = bound;
    }
  }
  rep.divergence_evidenced = above && rep.bound_at_K > 0;
  return rep;
}

}  // namespace kneser
