#include <cmath>

#include "doctest.h"
#include "sgdecay/errors.hpp"
#include "sgdecay/rates.hpp"

using namespace sgdecay;
using namespace sgdecay::rates;
using regvar::SlowlyVaryingExpr;

TEST_CASE("regime names") {
  for (int i = 0; i <= int(Regime::BothHilbertPoly); ++i) {
    const auto r = Regime(i);
    CHECK(regime_from_name(regime_name(r)) == r);
  }
  CHECK_THROWS_AS(regime_from_name("Sideways"), SpecError);
}

TEST_CASE("polynomial envelopes") {
  RateRegime r;
  r.regime = Regime::InfHilbertPoly;
  r.alpha = 2;
  CHECK(predict(r)(100.0) == doctest::Approx(0.1));
  r.regime = Regime::BothHilbertPoly;
  r.alpha = 1;
  r.beta = 2;
  for (double t : {4.0, 1e6}) CHECK(predict(r)(t) == doctest::Approx(1 / std::sqrt(t)));
  r.regime = Regime::ZeroHilbertPoly;
  r.alpha = 0;
  CHECK_THROWS_AS(predict(r), RegimeParameterError);
}

TEST_CASE("regularly varying envelopes") {
  RateRegime r;
  r.regime = Regime::InfHilbertRegVarSlower;
  r.alpha = 1;
  r.ell = SlowlyVaryingExpr::log_pow(2);
  const auto env = predict(r);
  for (double t : {1e2, 1e5, 1e9}) CHECK(env(t) * t * std::pow(std::log(t), 2) == doctest::Approx(1.0).epsilon(1e-10));

  r.alpha = 2;
  r.ell = SlowlyVaryingExpr::log_pow(1);
  for (double t : {1e4, 1e10}) {
    const double want = std::pow(t * std::log(std::sqrt(t)), -0.5);
    CHECK(predict(r)(t) == doctest::Approx(want).epsilon(1e-10));
  }

  // M(s) = s / log s inverts to t log t to first order
  r.alpha = 1;
  r.db_symmetric_form = true;
  const auto sym = predict(r);
  for (double t : {1e8, 1e12}) {
    const double ratio = sym(t) * t * std::log(t);
    CHECK(ratio < 1.0);
    CHECK(ratio > 0.8);
  }

  r.db_symmetric_form = false;
  r.ell = SlowlyVaryingExpr::log_pow(-1);
  CHECK_THROWS_AS(predict(r), RegimeParameterError);
  r.regime = Regime::ZeroHilbertRegVarSlower;
  r.ell = SlowlyVaryingExpr::log_pow(1);
  CHECK_THROWS_AS(predict(r), RegimeParameterError);  // alpha must exceed 1
  r.alpha = 2;
  CHECK_NOTHROW(predict(r));
}

TEST_CASE("faster side envelope") {
  RateRegime r;
  r.regime = Regime::InfHilbertRegVarFaster;
  r.alpha = 1;
  r.epsilon = 0.1;
  r.ell = SlowlyVaryingExpr::log_pow(-1);
  const auto env = predict(r);
  const auto closed = regvarinf_formulas(1, 1, Side::Faster, 0.1);
  // k(t) = log t has conjugate ~ 1/log t
  const double ratio = env(1e12) / closed(1e12);
  CHECK(ratio > 0.8);
  CHECK(ratio < 1.25);
  CHECK(audit_envelope(env, numeric::log_space(1e3, 1e12, 2)));
  r.epsilon = 0;
  CHECK_THROWS_AS(predict(r), RegimeParameterError);
  r.epsilon = 0.1;
  r.ell = SlowlyVaryingExpr::log_pow(1);
  CHECK_THROWS_AS(predict(r), RegimeParameterError);
}

TEST_CASE("log-corrected closed formulas") {
  const auto s = regvarinf_formulas(2, 4, Side::Slower);
  CHECK(s(1e6) == doctest::Approx(1e-3 * std::pow(std::log(1e6), -2)));
  const auto f = regvarinf_formulas(1, 2, Side::Faster, 0.5);
  CHECK(f(1e4) == doctest::Approx(1e-4 * std::pow(std::log(1e4), 2.5)));
  CHECK(f.validity_start == doctest::Approx(M_E));
  CHECK_THROWS_AS(regvarinf_formulas(1, 2, Side::Faster, 0.0), RegimeParameterError);
}

TEST_CASE("profile inverses") {
  const auto P = Profile::increasing([](double s) { return std::log1p(s); });
  for (double y : {0.5, 3.0, 20.0}) CHECK(P.inverse(y) == doctest::Approx(std::expm1(y)).epsilon(1e-12));
  const auto q = Profile::decreasing([](double s) { return 1 / (s * s); });
  for (double y : {2.0, 1e6}) CHECK(q.inverse(y) == doctest::Approx(1 / std::sqrt(y)).epsilon(1e-12));
  CHECK(q.inverse(0.5) == 1.0);  // below the range: domain edge
  const auto R = Profile::from_regvar_inf({2.0, SlowlyVaryingExpr::constant(1)});
  CHECK(R.inverse(1e6) == doctest::Approx(1e3).epsilon(1e-10));
  const auto z = Profile::from_regvar_zero({2.0, SlowlyVaryingExpr::constant(1)});
  CHECK(z(1e-3) == doctest::Approx(1e6));
  CHECK(z.inverse(1e6) == doctest::Approx(1e-3).epsilon(1e-10));
  // log correction of M = s on [0, inf)
  const auto L = Profile::increasing([](double s) { return s; }).log_corrected();
  CHECK(L(10.0) == doctest::Approx(10 * 2 * std::log(11.0)));
}

TEST_CASE("profile driven regimes") {
  ProfileInputs in;
  in.M = Profile::increasing([](double s) { return std::log1p(s); });
  in.m = Profile::decreasing([](double s) { return 1 / (s * s); });
  RateRegime r;
  r.regime = Regime::InfLower;
  r.c = 0.5;
  r.C = 2;
  CHECK(predict(r, in)(3.0) == doctest::Approx(0.5 / std::expm1(6.0)));
  r.regime = Regime::ZeroLower;
  r.c_prime = 4;
  CHECK(predict(r, in)(100.0) == doctest::Approx(0.5 / 20.0));
  r.regime = Regime::ZeroUpperGeneral;
  r.epsilon = 0.5;
  CHECK(predict(r, in)(1e4) == doctest::Approx(2 * 0.1));
  r.regime = Regime::BothLower;
  r.C_prime = 1;
  {
    const double t = 50.0;
    const double want = 0.5 * std::max(1 / std::sqrt(4 * t), 1 / std::expm1(t));
    CHECK(predict(r, in)(t) == doctest::Approx(want));
  }
  r.regime = Regime::InfUpperBanach;
  const auto up = predict(r, in);
  CHECK(audit_envelope(up, numeric::log_space(10, 1e4, 4)));  // e^-sqrt(t) underflows beyond
  r.regime = Regime::BothMartinez;
  CHECK(audit_envelope(predict(r, in), numeric::log_space(10, 1e8, 2)));
  CHECK_THROWS_AS(predict(r, {}), RegimeParameterError);
  r.c = -1;
  CHECK_THROWS_AS(predict(r, in), RegimeParameterError);
}

TEST_CASE("envelope audit") {
  RateEnvelope e;
  e.fn = [](double t) { return std::sin(t) + 2; };
  CHECK_FALSE(audit_envelope(e, numeric::lin_space(1, 100, 200)));
  e.fn = [](double t) { return 1 / t; };
  CHECK(audit_envelope(e, numeric::lin_space(1, 100, 200)));
}

TEST_CASE("iterative refinement") {
  const auto c = iterate_refinement(1, SlowlyVaryingExpr::constant(1));
  CHECK(c.stabilized_at == 0);
  CHECK(c.envelope(1e6) == doctest::Approx(1e-6));

  const auto e = iterate_refinement(1, SlowlyVaryingExpr::exp_log_pow(0.55));
  CHECK(e.stabilized_at == 2);
  CHECK(e.verdicts[1].pass == false);
  // m_2 against the two-term expansion exp(L^b + b L^(2b-1)), L = log t
  const double L = std::log(1e12), b = 0.55;
  const double ratio = std::exp(e.log_m_final(1e12) - (std::pow(L, b) + b * std::pow(L, 2 * b - 1)));
  CHECK(ratio > 0.9);
  CHECK(ratio < 1.1);

  const auto l = iterate_refinement(2, SlowlyVaryingExpr::log_pow(1));
  CHECK(l.stabilized_at == 1);
  CHECK(std::exp(l.log_m_final(1e8)) == doctest::Approx(std::log(1e8) / 2));

  CHECK_THROWS_AS(iterate_refinement(1, SlowlyVaryingExpr::log_pow(-1)), PreconditionError);
  CHECK_THROWS_AS(iterate_refinement(1, SlowlyVaryingExpr::exp_log_pow(0.55), nullptr, 1), NonConvergenceError);
}

TEST_CASE("conjugate start") {
  // k(t) = 1/log t; k# ~ log t, so the start is ~ 1
  const auto m = conjugate_start(1, SlowlyVaryingExpr::log_pow(1));
  CHECK(m(1e12) > 0.8);
  CHECK(m(1e12) < 1.25);
}

TEST_CASE("normal characterization") {
  CHECK(normal_characterization([](double s) { return 0.5 * std::log(s); }, End::Infinity).holds);
  CHECK(normal_characterization([](double s) { return 2 * std::log(s); }, End::Infinity).holds);
  CHECK(normal_characterization([](double s) { return s; }, End::Infinity).holds);
  const auto lg = normal_characterization([](double s) { return std::log(std::log(s)); }, End::Infinity);
  CHECK_FALSE(lg.holds);
  CHECK(lg.diverges);
  CHECK(lg.B_schedule.size() == 5);
  CHECK(normal_characterization([](double s) { return -std::log(s); }, End::Zero).holds);
  CHECK_FALSE(normal_characterization([](double s) { return std::log(std::log(1 / s) + 1); }, End::Zero).holds);
}

TEST_CASE("decay to resolvent") {
  const auto poly = decay_to_resolvent([](double t) { return std::pow(1 + t, -0.5); }, Variant::Zero);
  // N*(s) = s^-2 - 1
  for (double s : {1e-3, 0.1, 0.5}) CHECK(poly.inverse(s) == doctest::Approx(1 / (s * s) - 1).epsilon(1e-12));
  CHECK(poly.near_zero(0.02) == doctest::Approx(1 / (0.01 * 0.01) - 1 + 50).epsilon(1e-12));
  CHECK_FALSE(poly.at_infinity);

  const auto ex = decay_to_resolvent([](double t) { return std::exp(-t); }, Variant::Both);
  for (double s : {1e-8, 1e-2}) CHECK(ex.inverse(s) == doctest::Approx(std::log(1 / s)).epsilon(1e-12));
  CHECK(ex.at_infinity(10.0) == doctest::Approx(std::log(20.0)).epsilon(1e-12));
  CHECK(ex.inverse(2.0) == 0.0);

  const auto flat = decay_to_resolvent([](double) { return 1.0; }, Variant::Zero);
  CHECK_THROWS_AS(flat.inverse(0.5), LimitError);
  CHECK_THROWS_AS(decay_to_resolvent([](double t) { return t; }, Variant::Zero), MonotonicityError);
  CHECK_THROWS_AS(decay_to_resolvent([](double t) { return std::exp(-t); }, Variant::Zero, 1.5), DomainError);
}
