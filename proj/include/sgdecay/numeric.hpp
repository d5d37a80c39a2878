#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace sgdecay::numeric {

// log-spaced points from lo to hi (both included), `per_decade` per factor 10
std::vector<double> log_space(double lo, double hi, int per_decade);
// n log-spaced points from lo to hi
std::vector<double> log_space_n(double lo, double hi, int n);
std::vector<double> lin_space(double lo, double hi, int n);

// Root of an increasing function on [lo, hi] with f(lo) <= 0 <= f(hi).
// Bisection to (nearly) full double precision.
double bisect_increasing(const std::function<double(double)>& f, double lo, double hi);

// Starting at lo, push hi = lo + step, lo + 2 step, lo + 4 step, ... until
// f(hi) >= 0.  Throws BracketError after max_doublings.
double bracket_up(const std::function<double(double)>& f, double lo, double step,
                  int max_doublings = 200);

// Local maximum of f on [a, b] (Brent: golden section with parabolic steps).
// Returns (argmax, max); also compares the endpoints.
std::pair<double, double> maximize(const std::function<double(double)>& f, double a, double b);

// Least-squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

// Per-decade maxima of dev over samples x (x increasing toward the limit).
// A trailing lone endpoint is merged into the last full decade.
struct DecadeMaxima {
  std::vector<double> center;  // geometric centre of each decade
  std::vector<double> max;
};
DecadeMaxima decade_maxima(const std::vector<double>& x, const std::vector<double>& dev);

// Numerical stand-in for "ratio -> 1": the per-decade maxima of |ratio - 1|
// must be nonincreasing over the last three decades, and either the top
// decade is within tol or the maxima decay at least like (log x)^(-min_decay).
struct ConvergenceVerdict {
  DecadeMaxima decades;
  double top = 0.0;
  bool nonincreasing = false;
  double decay_exponent = 0.0;  // slope of log(max) against log(log(centre))
  bool below_tolerance = false;
  bool pass = false;
};
ConvergenceVerdict assess_convergence(const std::vector<double>& x, const std::vector<double>& dev,
                                      double tol, double min_decay = 0.05);

}  // namespace sgdecay::numeric
