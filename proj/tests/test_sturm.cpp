#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "kneser/sturm.hpp"

using namespace kneser;

namespace {

const MajorantFamily<double>& family(const std::string& name) {
  for (const auto& f : library_majorants<double>())
    if (f.name == name) return f;
  throw std::logic_error("unknown family " + name);
}

LinearEq<double> re_eq(double lam) {
  // Delta(4 lambda (k+1)^2 Dx) + lambda x = 0
  return {HalfLineSeq<double>(1, [lam](long k) { return 4.0 * lam * (k + 1) * (k + 1); }),
          HalfLineSeq<double>(1, [lam](long) { return lam; }), 1};
}

}  // namespace

TEST_CASE("is_majorant on the worked example pair") {
  MajorantPair<double> pair{fixtures::ex2_linearized_scaled<double>(1.0), re_eq(0.25), 1, 10000};
  auto rep = is_majorant(pair);
  CHECK(rep.ok);
}

TEST_CASE("is_majorant reports the first violation") {
  auto base = fixtures::eur<double>();
  LinearEq<double> bad_major{
      base.r, HalfLineSeq<double>(1, [](long k) { return k == 7 ? 0.25 - 1.0 : 0.25; }), 1};
  // p_k = P_k + 1 at k = 7, i.e. the minor exceeds the major there
  LinearEq<double> minor{base.r,
                         HalfLineSeq<double>(1, [](long k) { return k == 7 ? 1.25 : 0.25; }), 1};
  MajorantPair<double> pair{minor, base, 1, 50};
  auto rep = is_majorant(pair);
  CHECK(!rep.ok);
  CHECK(rep.first_violation == 7);
  CHECK(rep.which == 'p');
}

TEST_CASE("is_majorant is reflexive") {
  auto eq = fixtures::ex2_linearized<double>(1.0);
  MajorantPair<double> pair{eq, eq, 1, 500};
  CHECK(is_majorant(pair).ok);
}

TEST_CASE("riccati comparison: degenerate equal traces") {
  auto eq = fixtures::ex2_linearized<double>(1.0);
  RecessiveOptions<double> opt;
  opt.fixed_doublings = 5;
  auto rep = recessive(eq, 1.0, 61L, opt);
  MajorantPair<double> pair{eq, eq, 1, 60};
  auto r = verify_riccati_comparison(pair, rep.trace, rep.trace);
  CHECK(r.ok);
}

TEST_CASE("riccati comparison: constant minor vs product witness major") {
  LinearEq<double> minor{HalfLineSeq<double>(1, [](long) { return 1.0; }),
                         HalfLineSeq<double>(1, [](long) { return 0.0; }), 1};
  const auto& fam = family("euler-product");
  auto x = fam.witness_trace(1.0, 101L);
  auto y = solve_ivp(minor, 1.0, 1.0, 101L);
  MajorantPair<double> pair{minor, fam.equation(1.0), 1, 100};
  auto rep = verify_riccati_comparison(pair, x, y);
  CHECK(rep.ok);
  CHECK(rep.min_margin >= 0.0);
}

TEST_CASE("riccati comparison rejects a broken initial ordering") {
  const auto& fam = family("euler-product");
  auto major = fam.equation(1.0);
  auto x = fam.witness_trace(1.0, 50L);
  // y with Riccati ratio far below the witness ratio at m
  auto y = solve_ivp(major, 1.0, 0.2, 50L);
  MajorantPair<double> pair{major, major, 1, 49};
  CHECK_THROWS_AS(verify_riccati_comparison(pair, x, y), std::invalid_argument);
}

TEST_CASE("riccati comparison holds on randomized downward perturbations") {
  std::mt19937 rng(321);
  std::uniform_real_distribution<double> U(0.0, 0.5);
  const auto& fam = family("euler-product");
  int passes = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    double rup = 1.0 + U(rng), pdown = 1.0 - U(rng), eps = 0.01 + U(rng);
    LinearEq<double> minor{
        HalfLineSeq<double>(1, [rup, &fam](long k) { return rup * fam.r_profile(k); }),
        HalfLineSeq<double>(1, [pdown, &fam](long k) { return pdown * fam.p_profile(k); }), 1};
    auto major = fam.equation(1.0);
    long K = 80;
    auto x = fam.witness_trace(1.0, K + 1);
    double W0 = major.r_at(1) * (x.value(2) - x.value(1)) / x.value(1);
    double y0 = x.value(1);
    double y1 = y0 * (1.0 + (W0 + eps) / minor.r_at(1));
    auto y = solve_ivp(minor, y0, y1, K + 1);
    MajorantPair<double> pair{minor, major, 1, K};
    auto rep = verify_riccati_comparison(pair, x, y);
    if (rep.ok) ++passes;
  }
  CHECK(passes == trials);
}

TEST_CASE("trec on the Euler pair with the closed-form witness") {
  const auto& fam = family("euler-product");
  MajorantPair<double> pair{fixtures::eur_scaled<double>(), fam.equation(1.0), 1, 500};
  auto x = fam.witness_trace(1.0, 502L);
  auto rep = verify_trec(pair, x, 1e-9);
  CHECK(rep.ok);
  CHECK(rep.monotonicity_ok);
  CHECK(rep.min_margin >= 0.0);
  // the minor recessive candidate inherits the witness monotonicity
  for (long k = 1; k < 500; ++k) CHECK(rep.minor_recessive.trace.delta(k) <= 0.0);
}

TEST_CASE("trec self-comparison is an equality within tolerance") {
  auto eq = fixtures::ex2_linearized<double>(1.0);
  RecessiveOptions<double> opt;
  opt.fixed_doublings = 6;
  auto u = recessive(eq, 1.0, 81L, opt);
  MajorantPair<double> pair{eq, eq, 1, 80};
  auto rep = verify_trec(pair, u.trace, 1e-9, opt);
  CHECK(rep.ok);
  // equality throughout: margins collapse to ~rounding, well under 10*tol
  CHECK(std::fabs(rep.min_margin) <= 1e-8);
}

TEST_CASE("trec on the linearized example against the lambda=1/4 comparison equation") {
  MajorantPair<double> pair{fixtures::ex2_linearized_scaled<double>(1.0), re_eq(0.25), 1, 1000};
  RecessiveOptions<double> sched;
  sched.fixed_doublings = 7;
  auto xrep = recessive(re_eq(0.25), 1.0, 1001L, sched);
  auto rep = verify_trec(pair, xrep.trace, 1e-9, sched);
  CHECK(rep.ok);
  CHECK(rep.monotonicity_ok);
}

TEST_CASE("trec rejects a non-majorant pair") {
  MajorantPair<double> pair{re_eq(0.25), fixtures::ex2_linearized_scaled<double>(1.0), 1, 100};
  auto x = solve_ivp(fixtures::ex2_linearized_scaled<double>(1.0), 1.0, 0.9, 101L);
  CHECK_THROWS_AS(verify_trec(pair, x, 1e-9), std::invalid_argument);
}

TEST_CASE("majorant transitivity") {
  const auto& fam = family("cubic");
  auto mk = [&](double rs, double ps) {
    return LinearEq<double>{
        HalfLineSeq<double>(1, [rs, &fam](long k) { return rs * fam.r_profile(k); }),
        HalfLineSeq<double>(1, [ps, &fam](long k) { return ps * fam.p_profile(k); }), 1};
  };
  auto A = mk(1.0, 1.0), B = mk(1.2, 0.8), C = mk(1.5, 0.5);
  CHECK(is_majorant(MajorantPair<double>{B, A, 1, 200}).ok);
  CHECK(is_majorant(MajorantPair<double>{C, B, 1, 200}).ok);
  CHECK(is_majorant(MajorantPair<double>{C, A, 1, 200}).ok);
}

TEST_CASE("certify: Euler-type equation via majorant transfer") {
  auto cert = certify_positive_decreasing(fixtures::eur_scaled<double>(), 300L);
  CHECK(cert.method == "majorant-transfer");
  CHECK(cert.majorant_name == "euler-product");
  CHECK(cert.min_value > 0.0);
  CHECK(cert.max_delta < 0.0);
  CHECK(cert.strictly_decreasing);
  // re-check the witness against the raw recurrence residual
  for (long k = cert.range_begin; k <= cert.range_end - 2; ++k)
    CHECK(cert.witness.residual(k) <= 1e-12 * cert.witness.residual_scale(k) + 1e-300);
}

TEST_CASE("certify: constant witness for p == 0") {
  LinearEq<double> eq{HalfLineSeq<double>(0, [](long k) { return 1.0 + k * k; }),
                      HalfLineSeq<double>(0, [](long) { return 0.0; }), 0};
  auto cert = certify_positive_decreasing(eq, 100L);
  CHECK(cert.method == "closed-form-witness");
  CHECK(cert.majorant_name == "constant");
  CHECK(cert.min_value == 1.0);
  CHECK(cert.max_delta == 0.0);
  CHECK(!cert.strictly_decreasing);
}

TEST_CASE("certify: linearized example transfers with scale near 1/4") {
  auto cert =
      certify_positive_decreasing(fixtures::ex2_linearized_scaled<double>(1.0), 400L);
  CHECK(cert.method == "majorant-transfer");
  CHECK(cert.majorant_name == "euler-product");
  CHECK(cert.lambda == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(cert.min_value > 0.0);
  CHECK(cert.max_delta < 0.0);
}

TEST_CASE("certify: exact family match uses the closed-form witness") {
  const auto& fam = family("geometric");
  auto cert = certify_positive_decreasing(fam.equation(3.0), 40L);
  CHECK(cert.method == "closed-form-witness");
  CHECK(cert.majorant_name == "geometric");
  CHECK(cert.lambda == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(cert.strictly_decreasing);
}

TEST_CASE("certify fails honestly on an oscillatory equation") {
  LinearEq<double> eq{fixtures::seq_a_squares<double>(),
                      HalfLineSeq<double>(1, [](long) { return 1.0; }), 1};
  CHECK_THROWS_AS(certify_positive_decreasing(eq, 100L), CannotCertifyError);
}

TEST_CASE("monotonicity transfer holds whenever trec passes with nonincreasing x") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> U(0.0, 0.4);
  const auto& fam = family("geometric");
  for (int t = 0; t < 30; ++t) {
    double rup = 1.0 + U(rng), pdown = 1.0 - U(rng);
    LinearEq<double> minor{
        HalfLineSeq<double>(1, [rup, &fam](long k) { return rup * fam.r_profile(k); }),
        HalfLineSeq<double>(1, [pdown, &fam](long k) { return pdown * fam.p_profile(k); }), 1};
    MajorantPair<double> pair{minor, fam.equation(1.0), 1, 40};
    auto x = fam.witness_trace(1.0, 41L);
    auto rep = verify_trec(pair, x, 1e-9);
    CHECK(rep.ok);
    CHECK(rep.monotonicity_ok);
    for (long k = 1; k < 40; ++k) CHECK(rep.minor_recessive.trace.delta(k) <= 0.0);
  }
}
