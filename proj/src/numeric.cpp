#include "sgdecay/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "sgdecay/errors.hpp"

namespace sgdecay::numeric {

std::vector<double> log_space(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi >= lo) || per_decade < 1) throw DomainError("log_space: bad range");
  const double decades = std::log10(hi / lo);
  const int n = std::max(2, static_cast<int>(std::ceil(decades * per_decade - 1e-9)) + 1);
  return log_space_n(lo, hi, n);
}

std::vector<double> log_space_n(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw DomainError("log_space_n: bad range");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> lin_space(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

double bisect_increasing(const std::function<double(double)>& f, double lo, double hi) {
  const double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!(flo < 0.0 && fhi > 0.0)) throw BracketError("bisect: root not bracketed");
  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);
  std::uintmax_t iters = 400;
  auto r = boost::math::tools::bisect(f, lo, hi, tol, iters);
  return 0.5 * (r.first + r.second);
}

double bracket_up(const std::function<double(double)>& f, double lo, double step, int max_doublings) {
  for (int i = 0; i < max_doublings; ++i) {
    const double hi = lo + step;
    const double v = f(hi);
    if (std::isnan(v)) break;
    if (v >= 0.0) return hi;
    step *= 2.0;
  }
  throw BracketError("bracket_up: target not reached within the search budget");
}

std::pair<double, double> maximize(const std::function<double(double)>& f, double a, double b) {
  if (b < a) std::swap(a, b);
  auto neg = [&](double x) { return -f(x); };
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::brent_find_minima(neg, a, b, std::numeric_limits<double>::digits / 2, iters);
  std::pair<double, double> best{r.first, -r.second};
  const double fa = f(a), fb = f(b);
  if (fa > best.second) best = {a, fa};
  if (fb > best.second) best = {b, fb};
  return best;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

DecadeMaxima decade_maxima(const std::vector<double>& x, const std::vector<double>& dev) {
  DecadeMaxima out;
  if (x.empty()) return out;
  const double l0 = std::log10(x.front());
  const int total = std::max(1, static_cast<int>(std::floor(std::log10(x.back()) - l0 + 1e-9)));
  std::vector<double> lo(total, std::numeric_limits<double>::infinity()), hi(total, 0.0);
  out.max.assign(total, -1.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    int k = static_cast<int>(std::floor(std::log10(x[i]) - l0 + 1e-9));
    k = std::clamp(k, 0, total - 1);
    out.max[k] = std::max(out.max[k], dev[i]);
    lo[k] = std::min(lo[k], x[i]);
    hi[k] = std::max(hi[k], x[i]);
  }
  DecadeMaxima packed;
  for (int k = 0; k < total; ++k) {
    if (out.max[k] < 0.0) continue;
    packed.max.push_back(out.max[k]);
    packed.center.push_back(std::sqrt(lo[k] * hi[k]));
  }
  return packed;
}

ConvergenceVerdict assess_convergence(const std::vector<double>& x, const std::vector<double>& dev,
                                      double tol, double min_decay) {
  ConvergenceVerdict v;
  v.decades = decade_maxima(x, dev);
  const auto& m = v.decades.max;
  const std::size_t n = m.size();
  if (n == 0) return v;
  v.top = m.back();
  v.below_tolerance = v.top <= tol;
  v.nonincreasing = true;
  for (std::size_t k = n >= 3 ? n - 3 : 0; k + 1 < n; ++k)
    if (m[k + 1] > m[k] * (1.0 + 1e-9) + 1e-15) v.nonincreasing = false;
  std::vector<double> lx, ly;
  for (std::size_t k = n >= 3 ? n - 3 : 0; k < n; ++k) {
    const double c = v.decades.center[k];
    if (m[k] > 0.0 && c > std::exp(1.0)) {
      lx.push_back(std::log(std::log(c)));
      ly.push_back(std::log(m[k]));
    }
  }
  if (lx.size() >= 2) v.decay_exponent = ols_slope(lx, ly);
  v.pass = v.nonincreasing && (v.top == 0.0 || v.below_tolerance || v.decay_exponent <= -min_decay);
  return v;
}

}  // namespace sgdecay::numeric
