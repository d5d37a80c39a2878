#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgdecay/numeric.hpp"

namespace sgdecay::regvar {

// Slowly varying functions from a closed grammar.  Evaluation goes through
// u = log s and returns log l(s), so very large arguments stay representable.
class SlowlyVaryingExpr {
 public:
  enum class Kind { Const, LogPow, ExpLogPow, IterLog, Product, RealPower, ArgPower };

  static SlowlyVaryingExpr constant(double c);
  static SlowlyVaryingExpr log_pow(double beta);              // (log s)^beta
  static SlowlyVaryingExpr exp_log_pow(double beta);          // exp((log s)^beta), 0<beta<1
  static SlowlyVaryingExpr iter_log(int k, double beta);      // (log_k s)^beta, k >= 2
  static SlowlyVaryingExpr product(const SlowlyVaryingExpr& a, const SlowlyVaryingExpr& b);
  static SlowlyVaryingExpr real_power(const SlowlyVaryingExpr& inner, double a);
  static SlowlyVaryingExpr arg_power(const SlowlyVaryingExpr& inner, double a);  // s -> l(s^a)

  // Same expression evaluated from a later start.  DomainError if start is
  // not above e or below what the expression needs.
  SlowlyVaryingExpr with_domain_start(double start) const;
  double domain_start() const { return domain_start_; }
  // log of the smallest s at which every logarithm in the tree is positive
  double required_log_start() const;

  Kind kind() const;
  double param() const;  // c, beta or a depending on kind
  int order() const;     // k for IterLog
  SlowlyVaryingExpr left() const;   // Product
  SlowlyVaryingExpr right() const;  // Product
  SlowlyVaryingExpr inner() const;  // RealPower, ArgPower

  double operator()(double s) const;
  double log_eval(double s) const;
  // log l(e^u); domain check on u only via the tree's own logarithms
  double log_at(double u) const;
  // d log l / d log s at s = e^u
  double index_at(double u) const;

  std::string to_string() const;
  bool operator==(const SlowlyVaryingExpr& o) const;

  struct Node;  // opaque tree node

 private:
  explicit SlowlyVaryingExpr(std::shared_ptr<const Node> n);
  std::shared_ptr<const Node> node_;
  double domain_start_ = 3.0;
};

double eval(const SlowlyVaryingExpr& ell, double s);

// f(s) = s^index * l(s)
struct RegVarFn {
  double index = 0.0;
  SlowlyVaryingExpr slow = SlowlyVaryingExpr::constant(1.0);

  double operator()(double s) const;
  double log_at(double u) const { return index * u + slow.log_at(u); }
};

// Smallest u0 >= u_start such that u -> phi(u) is strictly increasing on a
// sampled tail [u0, ...] (64 samples, then a 4x refined finite-difference
// check).  MonotonicityError if the budget is exhausted.
double find_increasing_tail(const std::function<double(double)>& phi, double u_start);

struct ClosedForm {
  std::string formula;
  std::function<double(double)> log_at;  // log of the value at s = e^u
  double operator()(double s) const;
};

// Catalogued de Bruijn conjugate of l, if the expression matches a known
// pattern (powers of log, exp((log s)^beta) with beta < 2/3, constant factors).
std::optional<ClosedForm> closed_form_conjugate(const SlowlyVaryingExpr& ell);

// k(s) = (s l(s))^{-1}(s) / s, the exact numeric de Bruijn conjugate.
class ConjugateFn {
 public:
  ConjugateFn(SlowlyVaryingExpr base, double tail_log_start);

  const SlowlyVaryingExpr& base() const { return base_; }
  double tail_start() const;
  // smallest s at which k is defined: tail_start * l(tail_start)
  double min_argument() const;
  double operator()(double s) const;
  double log_at(double v) const;  // log k(e^v)
  const std::optional<ClosedForm>& closed_form() const { return closed_; }

 private:
  SlowlyVaryingExpr base_;
  double u0_;
  std::optional<ClosedForm> closed_;
};

ConjugateFn de_bruijn_conjugate(const SlowlyVaryingExpr& ell);

// Exact numeric inverse of f = s^alpha l(s) and the asymptotic form
// s^{1/alpha} m^#(s)^{1/alpha}, with m(x) = l(x^{1/alpha}).
class AsymptoticInverse {
 public:
  explicit AsymptoticInverse(const RegVarFn& f);

  const RegVarFn& function() const { return f_; }
  double tail_start() const;
  double operator()(double y) const;
  double log_at(double ly) const;  // log f^{-1}(e^ly)
  // closed asymptotic form; falls back to the numeric conjugate when the
  // slow part is not catalogued (then it coincides with the exact inverse)
  double asymptotic(double y) const;
  bool asymptotic_is_catalogued() const { return conj_.closed_form().has_value(); }
  std::string asymptotic_formula() const;

  struct Consistency {
    std::vector<double> y, ratio;  // exact / asymptotic
    numeric::ConvergenceVerdict verdict;
  };
  Consistency consistency(const std::vector<double>& y_grid, double tol = 0.05) const;

 private:
  RegVarFn f_;
  double u0_;
  ConjugateFn conj_;
};

AsymptoticInverse asymptotic_inverse(const RegVarFn& f);

struct RatioAudit {
  std::vector<double> s;
  std::vector<double> deviation;  // |ratio - 1|
  numeric::ConvergenceVerdict verdict;
  bool pass = false;
};

// |l(lambda s)/l(s) - 1| for every lambda; deviation is the max over lambda.
RatioAudit slow_variation_audit(const SlowlyVaryingExpr& ell, const std::vector<double>& lambdas,
                                const std::vector<double>& s_grid, double tol = 0.05);

// |l(s l(s))/l(s) - 1|; l must be monotone on the grid.
RatioAudit db_symmetry_audit(const SlowlyVaryingExpr& ell, const std::vector<double>& s_grid,
                             double tol = 0.05);

struct PotterReport {
  double c = 0.0, C = 0.0;         // c (s/t)^g <= l(t)/l(s) <= C (t/s)^g over pairs t >= s
  double increasing_from = 0.0;    // s^g l(s) increasing beyond this s (0 if never found)
  double decreasing_from = 0.0;    // s^-g l(s) decreasing beyond this s
  bool pass = false;
};
PotterReport potter_bounds_audit(const SlowlyVaryingExpr& ell, double gamma,
                                 const std::vector<double>& s_grid);

struct LogPerturbationReport {
  std::vector<double> s, ratio;  // f^{-1}(s) / ((f log)^{-1}(s) (log s)^delta)
  double C = 0.0;
  bool bounded_trend = false;
  bool pass = false;
};
LogPerturbationReport log_perturbation_audit(const RegVarFn& f, double delta,
                                             const std::vector<double>& s_grid);

}  // namespace sgdecay::regvar
