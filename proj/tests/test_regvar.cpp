#include <cmath>

#include "doctest.h"
#include "sgdecay/errors.hpp"
#include "sgdecay/regvar.hpp"

using namespace sgdecay;
using namespace sgdecay::regvar;
using E = SlowlyVaryingExpr;

namespace {

// x with log x + beta log log x = L, by plain fixed-point iteration
double logpow_root(double L, double beta) {
  double y = L;
  for (int i = 0; i < 500; ++i) y = L - beta * std::log(y);
  return y;
}

// y with y + y^beta = L
double explog_root(double L, double beta) {
  double y = L;
  for (int i = 0; i < 500; ++i) y = L - std::pow(y, beta);
  return y;
}

}  // namespace

TEST_CASE("evaluation by structural recursion") {
  CHECK(E::log_pow(2)(std::exp(3.0)) == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(E::constant(5)(1e6) == doctest::Approx(5.0).epsilon(1e-15));
  const auto p = E::product(E::log_pow(1), E::exp_log_pow(0.5));
  CHECK(p(std::exp(4.0)) == doctest::Approx(4.0 * std::exp(2.0)).epsilon(1e-14));
  CHECK(E::iter_log(2, 1)(std::exp(std::exp(1.0))) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(E::arg_power(E::log_pow(1), 2.0)(1e6) == doctest::Approx(2 * std::log(1e6)));
  CHECK(E::real_power(E::log_pow(1), -2.0)(1e6) == doctest::Approx(std::pow(std::log(1e6), -2)));
}

TEST_CASE("domain and overflow errors") {
  CHECK_THROWS_AS(E::log_pow(1)(2.0), DomainError);
  CHECK_THROWS_AS(E::log_pow(1).with_domain_start(2.0), DomainError);
  CHECK_THROWS_AS(E::exp_log_pow(1.0), DomainError);
  CHECK_THROWS_AS(E::constant(-1.0), DomainError);
  CHECK(E::iter_log(3, 1).domain_start() > std::exp(std::exp(1.0)));
  CHECK_THROWS_AS(E::real_power(E::exp_log_pow(0.9), 1000)(1e300), OverflowError);
}

TEST_CASE("index is the logarithmic derivative") {
  for (const auto& e : {E::log_pow(-2), E::exp_log_pow(0.6), E::iter_log(2, 3), E::arg_power(E::exp_log_pow(0.4), 3)}) {
    const double u = 20.0, h = 1e-5;
    const double fd = (e.log_at(u + h) - e.log_at(u - h)) / (2 * h);
    CHECK(e.index_at(u) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("string form is stable") {
  CHECK(E::product(E::log_pow(1), E::constant(2)).to_string() ==
        "mul(logpow(1), const(2))");
}

TEST_CASE("conjugate of a constant is its reciprocal") {
  const auto k = de_bruijn_conjugate(E::constant(2));
  for (double s : {1e3, 1e7, 1e12}) CHECK(k(s) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("conjugate of powers of log matches a fixed-point oracle") {
  for (double beta : {-2.0, 1.0, 3.0}) {
    const auto k = de_bruijn_conjugate(E::log_pow(beta));
    for (double s : {1e4, 1e8, 1e12}) {
      const double L = std::log(s);
      const double y = logpow_root(L, beta);
      CHECK(k(s) == doctest::Approx(std::exp(y - L)).epsilon(1e-11));
    }
  }
}

TEST_CASE("conjugate of exp((log s)^b) matches a fixed-point oracle") {
  for (double beta : {0.4, 0.6}) {
    const auto k = de_bruijn_conjugate(E::exp_log_pow(beta));
    const double L = std::log(1e10);
    CHECK(k(1e10) == doctest::Approx(std::exp(explog_root(L, beta) - L)).epsilon(1e-11));
  }
}

TEST_CASE("conjugate identity l(s) k(s l(s)) = 1") {
  for (const auto& e : {E::constant(2), E::log_pow(-2), E::log_pow(1), E::log_pow(3), E::exp_log_pow(0.4),
                        E::exp_log_pow(0.6)}) {
    const auto k = de_bruijn_conjugate(e);
    for (double s : numeric::log_space_n(1e3, 1e12, 30)) CHECK(std::abs(e(s) * k(s * e(s)) - 1.0) <= 1e-12);
  }
}

TEST_CASE("catalogued closed forms") {
  auto cf = closed_form_conjugate(E::log_pow(3));
  REQUIRE(cf);
  CHECK((*cf)(std::exp(10.0)) == doctest::Approx(1e-3));
  cf = closed_form_conjugate(E::exp_log_pow(0.6));
  REQUIRE(cf);
  const double u = 50.0;
  CHECK(cf->log_at(u) == doctest::Approx(-std::pow(u, 0.6) + 0.6 * std::pow(u, 0.2)));
  cf = closed_form_conjugate(E::real_power(E::exp_log_pow(0.55), -1.0));
  REQUIRE(cf);
  CHECK(cf->log_at(u) == doctest::Approx(std::pow(u, 0.55) + 0.55 * std::pow(u, 0.1)));
  cf = closed_form_conjugate(E::product(E::constant(4), E::log_pow(1)));
  REQUIRE(cf);
  CHECK((*cf)(std::exp(2.0)) == doctest::Approx(0.125));
  CHECK_FALSE(closed_form_conjugate(E::exp_log_pow(0.7)));
  CHECK_FALSE(closed_form_conjugate(E::iter_log(2, 1)));
}

TEST_CASE("numeric conjugate approaches the closed form monotonically") {
  const auto grid = numeric::log_space(1e3, 1e12, 4);
  for (const auto& e : {E::log_pow(1), E::log_pow(3), E::exp_log_pow(0.4), E::exp_log_pow(0.6)}) {
    const auto k = de_bruijn_conjugate(e);
    REQUIRE(k.closed_form());
    std::vector<double> dev;
    for (double s : grid) dev.push_back(std::abs(k(s) / (*k.closed_form())(s) - 1.0));
    CHECK(numeric::assess_convergence(grid, dev, 0.05).nonincreasing);
  }
}

TEST_CASE("conjugate needs an increasing tail") {
  const auto k = de_bruijn_conjugate(E::log_pow(-2));
  CHECK(std::log(k.tail_start()) > 1.9);  // s (log s)^-2 turns increasing at log s = 2
  CHECK_THROWS_AS(k(1.0), BracketError);
}

TEST_CASE("asymptotic inverse") {
  SUBCASE("pure power") {
    const auto inv = asymptotic_inverse({2.0, E::constant(1)});
    CHECK(inv(1e6) == doctest::Approx(1e3).epsilon(1e-13));
    CHECK(inv.asymptotic(1e6) == doctest::Approx(1e3).epsilon(1e-13));
  }
  SUBCASE("s log s") {
    const auto inv = asymptotic_inverse({1.0, E::log_pow(1)});
    for (double y : {1e5, 1e10}) {
      const double L = std::log(y);
      CHECK(inv(y) == doctest::Approx(std::exp(logpow_root(L, 1.0))).epsilon(1e-12));
      CHECK(inv(inv.function()(1e4) ) == doctest::Approx(1e4).epsilon(1e-12));
    }
    const auto c = inv.consistency(numeric::log_space(1e3, 1e12, 4));
    CHECK(c.verdict.nonincreasing);
    CHECK(c.ratio.back() == doctest::Approx(std::log(1e12) / logpow_root(std::log(1e12), 1.0)).epsilon(1e-9));
  }
  SUBCASE("s^a l(s^a) with l = (log)^b") {
    const double a = 2.0, b = 1.0;
    RegVarFn f{a, E::arg_power(E::log_pow(b), a)};
    const auto inv = asymptotic_inverse(f);
    CHECK(inv.asymptotic_is_catalogued());
    const double y = 1e12;
    CHECK(inv.asymptotic(y) == doctest::Approx(std::sqrt(y) * std::pow(std::log(y), -b / a)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(asymptotic_inverse({1.0, E::log_pow(1)})(1.0), BracketError);
}

TEST_CASE("slow variation audit") {
  const auto grid = numeric::log_space(1e3, 1e12, 4);
  const auto c = slow_variation_audit(E::constant(3), {0.5, 2.0, 10.0}, grid);
  CHECK(c.pass);
  CHECK(c.verdict.top == 0.0);
  const auto l3 = slow_variation_audit(E::log_pow(3), {2.0}, grid);
  CHECK(l3.pass);
  for (std::size_t k = 1; k < l3.verdict.decades.max.size(); ++k)
    CHECK(l3.verdict.decades.max[k] < l3.verdict.decades.max[k - 1]);
  // top decade maximum sits at its lower edge
  const double s_top = l3.s[l3.s.size() - 5];
  CHECK(l3.verdict.top == doctest::Approx(std::pow(1.0 + std::log(2.0) / std::log(s_top), 3) - 1.0));
  // exp((log s)^0.99) behaves like a power on any finite grid
  CHECK_FALSE(slow_variation_audit(E::exp_log_pow(0.99), {2.0}, grid).pass);
}

TEST_CASE("dB symmetry audit") {
  const auto grid = numeric::log_space(1e3, 1e12, 4);
  CHECK(db_symmetry_audit(E::log_pow(3), grid).pass);
  CHECK(db_symmetry_audit(E::log_pow(-2), grid).pass);
  CHECK(db_symmetry_audit(E::exp_log_pow(0.4), grid).pass);
  const auto f = db_symmetry_audit(E::exp_log_pow(0.6), grid);
  CHECK_FALSE(f.pass);
  const double s = grid.back(), L = std::log(s);
  CHECK(f.deviation.back() ==
        doctest::Approx(std::exp(std::pow(L + std::pow(L, 0.6), 0.6) - std::pow(L, 0.6)) - 1.0).epsilon(1e-12));
  const auto wiggle = E::product(E::log_pow(2), E::real_power(E::exp_log_pow(0.5), -1));
  CHECK_THROWS_AS(db_symmetry_audit(wiggle, grid), MonotonicityError);
}

TEST_CASE("Potter bounds") {
  const auto grid = numeric::log_space(1e3, 1e12, 2);
  const auto c = potter_bounds_audit(E::constant(1), 0.3, grid);
  CHECK(c.c == 1.0);
  CHECK(c.C == 1.0);
  const auto p5 = potter_bounds_audit(E::log_pow(5), 0.1, grid);
  CHECK(p5.pass);
  CHECK(p5.c > 0.0);
  const auto m5 = potter_bounds_audit(E::log_pow(-5), 0.1, grid);
  CHECK(m5.pass);
  // 0.1 - 5/log s > 0 exactly when log s > 50
  CHECK(std::log(m5.increasing_from) == doctest::Approx(50.0).epsilon(0.005));
}

TEST_CASE("log perturbation audit") {
  const auto grid = numeric::log_space(1e3, 1e12, 4);
  const auto a = log_perturbation_audit({1.0, E::constant(1)}, 1.0, grid);
  CHECK(a.pass);
  CHECK(a.C <= 1.0);
  CHECK(a.C > 0.8);
  CHECK(log_perturbation_audit({2.0, E::constant(1)}, 0.5, grid).pass);
  CHECK_THROWS_AS(log_perturbation_audit({2.0, E::constant(1)}, 0.25, grid), PreconditionError);
  CHECK_THROWS_AS(log_perturbation_audit({1.0, E::log_pow(-1)}, 1.0, grid), PreconditionError);
}
