#include <cmath>

#include "doctest.h"
#include "sgdecay/errors.hpp"
#include "sgdecay/numeric.hpp"

using namespace sgdecay;
using namespace sgdecay::numeric;

TEST_CASE("log_space hits both endpoints and the per-decade count") {
  auto g = log_space(1e2, 1e6, 8);
  CHECK(g.size() == 33);
  CHECK(g.front() == 1e2);
  CHECK(g.back() == 1e6);
  CHECK(g[8] == doctest::Approx(1e3).epsilon(1e-12));
}

TEST_CASE("bisection reaches full precision") {
  const double r = bisect_increasing([](double x) { return x * x - 2.0; }, 0.0, 2.0);
  CHECK(std::abs(r - std::sqrt(2.0)) < 1e-15);
  CHECK_THROWS_AS(bisect_increasing([](double x) { return x + 1.0; }, 0.0, 1.0), BracketError);
}

TEST_CASE("bracket_up doubles until the sign changes") {
  const double hi = bracket_up([](double x) { return x - 100.0; }, 0.0, 1.0);
  CHECK(hi >= 100.0);
  CHECK(hi <= 256.0);
  CHECK_THROWS_AS(bracket_up([](double) { return -1.0; }, 0.0, 1.0, 10), BracketError);
}

TEST_CASE("maximize finds an interior peak and endpoint maxima") {
  auto [x, v] = maximize([](double t) { return -(t - 0.3) * (t - 0.3); }, 0.0, 1.0);
  CHECK(x == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(v == doctest::Approx(0.0));
  auto [x2, v2] = maximize([](double t) { return t; }, 0.0, 1.0);
  CHECK(x2 == 1.0);
  CHECK(v2 == 1.0);
}

TEST_CASE("ols slope of a line") {
  std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  CHECK(ols_slope(x, y) == doctest::Approx(2.0));
}

TEST_CASE("decade maxima merge the trailing endpoint") {
  auto x = log_space(1e3, 1e6, 4);
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = 1.0 / std::log(x[i]);
  auto dm = decade_maxima(x, d);
  REQUIRE(dm.max.size() == 3);
  CHECK(dm.max[0] == doctest::Approx(1.0 / std::log(1e3)));
  CHECK(dm.max[0] > dm.max[1]);
}

TEST_CASE("convergence verdict") {
  auto x = log_space(1e3, 1e12, 4);
  std::vector<double> slow(x.size()), flat(x.size()), up(x.size()), tiny(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double L = std::log(x[i]);
    slow[i] = 3.0 / L;          // decays like 1/log, never below 0.05 here
    flat[i] = 0.0718;           // ratio tends to a constant other than 1
    up[i] = 0.01 * std::sqrt(L);
    tiny[i] = 1e-4 / L;
  }
  CHECK(assess_convergence(x, slow, 0.05).pass);
  CHECK_FALSE(assess_convergence(x, slow, 0.05).below_tolerance);
  CHECK_FALSE(assess_convergence(x, flat, 0.05).pass);
  CHECK_FALSE(assess_convergence(x, up, 0.05).pass);
  CHECK(assess_convergence(x, tiny, 0.05).below_tolerance);
  CHECK(assess_convergence(x, slow, 0.05).decay_exponent == doctest::Approx(-1.0).epsilon(0.05));
}
