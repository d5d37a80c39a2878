#include "doctest.h"

#include <cmath>

#include "sgdecay/cbf.hpp"
#include "sgdecay/errors.hpp"

using namespace sgdecay;
using namespace sgdecay::cbf;
using regvar::RegVarFn;
using regvar::SlowlyVaryingExpr;

namespace {

// int_0^inf s^{-sigma}/(s+l) ds = pi l^{-sigma} / sin(pi sigma), so for
// g(s) = s^{1-sigma}: S_g(l) = (1-sigma) pi l^{-sigma} / sin(pi sigma)
double beta_oracle(double sigma, double l) {
  return (1.0 - sigma) * M_PI * std::pow(l, -sigma) / std::sin(M_PI * sigma);
}

SpecialFn power_stieltjes(double sigma) {
  return SpecialFn(Kind::Stieltjes, {0, 0, Distribution::regvar(RegVarFn{1.0 - sigma, SlowlyVaryingExpr::constant(1)})});
}

SpecialFn delta_one(Kind k) { return SpecialFn(k, {0, 0, Distribution::atoms({{1.0, 1.0}})}); }

}  // namespace

TEST_CASE("atom triple values") {
  CHECK(delta_one(Kind::Stieltjes)(3.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(delta_one(Kind::CompleteBernstein)(3.0) == doctest::Approx(0.75).epsilon(1e-15));
  const SpecialFn empty(Kind::Stieltjes, {});
  CHECK(empty(2.0) == 0.0);
  CHECK(empty.is_zero());
  const SpecialFn lin(Kind::Stieltjes, {2.0, 0.5, Distribution::none()});
  CHECK(lin(4.0) == doctest::Approx(1.0));
}

TEST_CASE("power distribution against the Beta oracle") {
  CHECK(power_stieltjes(0.5)(4.0) == doctest::Approx(M_PI / 4).epsilon(1e-10));
  for (double sigma : {0.25, 0.5, 0.75, 0.9})
    for (double l : {1e-6, 1e-2, 1.0, 7.0, 1e4, 1e9}) {
      const double v = power_stieltjes(sigma)(l);
      CHECK(v / beta_oracle(sigma, l) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("complex evaluation against the analytic continuation") {
  // S(l) = (1-sigma) pi l^{-sigma} / sin(pi sigma) holds on the slit plane
  for (double sigma : {0.3, 0.5, 0.8})
    for (double phi : {0.5, 1.5, 2.5, -2.9}) {
      const cplx l = std::polar(5.0, phi);
      const cplx expect = (1.0 - sigma) * M_PI * std::pow(l, -sigma) / std::sin(M_PI * sigma);
      const cplx got = power_stieltjes(sigma)(l);
      CHECK(std::abs(got - expect) / std::abs(expect) < 1e-8);
    }
}

TEST_CASE("cut and integrability errors") {
  CHECK_THROWS_AS(power_stieltjes(0.5)(cplx(-1.0, 0.0)), DomainError);
  CHECK_THROWS_AS(power_stieltjes(0.5)(0.0), DomainError);
  CHECK_THROWS_AS(Distribution::regvar(RegVarFn{1.0, SlowlyVaryingExpr::constant(1)}), IntegrabilityError);
  CHECK_THROWS_AS(Distribution::regvar(RegVarFn{-0.1, SlowlyVaryingExpr::constant(1)}), IntegrabilityError);
  CHECK_THROWS_AS(Distribution::atoms({{-1.0, 1.0}}), IntegrabilityError);
  CHECK_THROWS_AS(SpecialFn(Kind::Stieltjes, {-1.0, 0.0, {}}), IntegrabilityError);
}

TEST_CASE("quadrature stability under tighter settings") {
  const auto g = Distribution::regvar(RegVarFn{0.5, SlowlyVaryingExpr::log_pow(1)});
  const SpecialFn a(Kind::Stieltjes, {0, 0, g});
  const SpecialFn b(Kind::Stieltjes, {0, 0, g}, QuadratureConfig{1e-14, 1e-15, 30});
  for (double l : {1e-3, 1.0, 1e3, 1e8}) CHECK(a(l) / b(l) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("monotonicity and limits") {
  const auto g = Distribution::regvar(RegVarFn{0.5, SlowlyVaryingExpr::log_pow(1)});
  const SpecialFn S(Kind::Stieltjes, {0.3, 0.2, g});
  const SpecialFn F(Kind::CompleteBernstein, {0.3, 0.2, g});
  double ps = S(1e-4), pf = F(1e-4);
  for (double l : numeric::log_space(1e-4, 1e6, 2)) {
    if (l == 1e-4) continue;
    const double s = S(l), f = F(l);
    CHECK(s < ps);
    CHECK(f >= pf);
    ps = s;
    pf = f;
  }
  // l S(l) -> a at 0, S(l) -> b at infinity; F(l) -> a at 0, F(l)/l -> b at infinity
  CHECK(1e-10 * S(1e-10) == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(S(1e14) == doctest::Approx(0.2).epsilon(1e-3));
  CHECK(F(1e-10) == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(F(1e14) / 1e14 == doctest::Approx(0.2).epsilon(1e-3));
}

TEST_CASE("f_g and f_m") {
  const auto atom = make_fg_fm(Distribution::atoms({{1.0, 1.0}}));
  for (double l : {0.1, 1.0, 3.0, 50.0}) {
    CHECK(atom.fg(l) == doctest::Approx(l / (1 + l)).epsilon(1e-14));
    CHECK(atom.fm(l) == doctest::Approx(l / (1 + 2 * l)).epsilon(1e-14));
  }
  const auto root = make_fg_fm(Distribution::regvar(RegVarFn{0.5, SlowlyVaryingExpr::constant(1)}));
  for (double l : {1e-4, 0.5, 9.0}) CHECK(root.fg(l) == doctest::Approx(M_PI / 2 * std::sqrt(l)).epsilon(1e-9));
  CHECK(atom.fm(1e-9) < 1e-8);
  CHECK(root.fm(1e-12) < 1e-5);
  double prev = 0.0;
  for (double l : numeric::log_space(1e-6, 1e6, 2)) {
    const double v = root.fm(l);
    CHECK(v > prev);
    CHECK(v < 1.0);
    prev = v;
  }
}

TEST_CASE("Karamata constants") {
  for (double sigma : {0.25, 0.5, 0.75}) {
    const auto rep = karamata_audit(RegVarFn{1.0 - sigma, SlowlyVaryingExpr::constant(1)}, End::Infinity,
                                    numeric::log_space(1, 1e4, 2));
    CHECK(rep.constant == doctest::Approx((1 - sigma) * M_PI / std::sin(M_PI * sigma)).epsilon(1e-12));
    for (double r : rep.ratio) CHECK(std::abs(r - 1.0) < 1e-6);
    CHECK(rep.pass);
  }
}

TEST_CASE("Karamata with a logarithmic factor") {
  // deviation decays like 1/log l
  const auto rep = karamata_audit(RegVarFn{0.5, SlowlyVaryingExpr::log_pow(1)}, End::Infinity,
                                  numeric::log_space(1e2, 1e8, 2));
  for (std::size_t i = 1; i < rep.ratio.size(); ++i) CHECK(rep.ratio[i] <= rep.ratio[i - 1] + 1e-12);
  CHECK(rep.ratio.back() > 1.0);
  CHECK(rep.ratio.back() < 1.2);
}

TEST_CASE("Karamata near zero") {
  // g(s) = s^{1/2} log(1/s) near 0
  std::vector<double> grid;
  for (double l : numeric::log_space(1e-12, 1e-3, 2)) grid.insert(grid.begin(), l);
  const auto rep = karamata_audit(RegVarFn{0.5, SlowlyVaryingExpr::log_pow(1)}, End::Zero, grid);
  CHECK(std::abs(rep.ratio.back() - 1.0) < std::abs(rep.ratio.front() - 1.0));
  const auto flat = karamata_audit(RegVarFn{0.5, SlowlyVaryingExpr::constant(1)}, End::Zero, grid);
  for (double r : flat.ratio) CHECK(r == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("sector domination") {
  const std::vector<double> phis{-3.0, -2.0, -1.0, 0.0, 0.7, 1.5707963267948966, 2.5, 3.1};
  const auto r = numeric::log_space(1e-3, 1e3, 1);
  const auto atom = sector_domination_audit(delta_one(Kind::Stieltjes), phis, r);
  CHECK(atom.pass);
  CHECK(atom.skipped == static_cast<int>(r.size()));
  const auto root = sector_domination_audit(power_stieltjes(0.5), phis, r);
  CHECK(root.pass);
  CHECK(root.worst_upper <= 1.0 + 1e-9);
  const auto at0 = sector_domination_audit(delta_one(Kind::Stieltjes), {0.0}, {2.0});
  CHECK(at0.worst_lower == doctest::Approx(1.0));
  CHECK(at0.worst_upper == doctest::Approx(1.0));
  CHECK_THROWS_AS(sector_domination_audit(SpecialFn(Kind::Stieltjes, {1.0, 0.0, {}}), phis, r), PreconditionError);
}

TEST_CASE("duality transforms") {
  const SpecialFn h = delta_one(Kind::Stieltjes);  // 1/(1+l)
  const auto t = duality_transform(h, Duality::TimesLambda);
  CHECK(t.claimed == Kind::CompleteBernstein);
  CHECK(t.audit_pass);
  CHECK(t(3.0) == doctest::Approx(0.75));

  const SpecialFn root(Kind::CompleteBernstein,
                       {0, 0, Distribution::regvar(RegVarFn{0.5, SlowlyVaryingExpr::constant(1)}, 2.0 / M_PI)});
  CHECK(root(4.0) == doctest::Approx(2.0).epsilon(1e-9));
  const auto inv = duality_transform(root, Duality::Reciprocal);
  CHECK(inv.claimed == Kind::Stieltjes);
  CHECK(inv.audit_pass);
  CHECK(inv(4.0) == doctest::Approx(0.5).epsilon(1e-9));

  const SpecialFn lin(Kind::CompleteBernstein, {0, 1.0, {}});
  const auto one = duality_transform(lin, Duality::LambdaAtInverse);
  CHECK(one.audit_pass);
  CHECK(one(7.0) == doctest::Approx(1.0));
  const auto over = duality_transform(root, Duality::OverLambda);
  CHECK(over.audit_pass);

  CHECK_THROWS_AS(duality_transform(SpecialFn(Kind::Stieltjes, {}), Duality::Reciprocal), ZeroFunctionError);
  CHECK_THROWS_AS(duality_transform(h, Duality::OverLambda), PreconditionError);
}
