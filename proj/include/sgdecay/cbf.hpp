#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "sgdecay/numeric.hpp"
#include "sgdecay/regvar.hpp"

namespace sgdecay::cbf {

using cplx = std::complex<double>;

struct Atom {
  double s = 0.0;  // location, > 0
  double w = 0.0;  // mass, > 0
};

enum class End { Infinity, Zero };

// Increasing distribution function g on (0, inf) generating the measure mu.
//
// Regularly varying case, end = Infinity: g(s) = scale * s^p l(s) for
// s >= a = l.domain_start(); below a the slow factor is frozen at l(a)
// (for p = 0 the continuation is linear so that g(0+) = 0).
// end = Zero: g(s) = scale * s^p l(1/s) for s <= 1/a and a pure power above.
class Distribution {
 public:
  enum class Kind { None, Atoms, RegVar };

  static Distribution none() { return {}; }
  static Distribution atoms(std::vector<Atom> list);
  static Distribution regvar(const regvar::RegVarFn& g, double scale = 1.0, End end = End::Infinity);

  Kind kind() const { return kind_; }
  const std::vector<Atom>& atom_list() const { return atoms_; }
  const regvar::RegVarFn& regvar_fn() const { return *rv_; }
  double scale() const { return scale_; }
  End end() const { return end_; }

  double value(double s) const;
  double log_value_at(double u) const;  // log g(e^u)
  double index_at(double u) const;      // d log g / d log s at s = e^u
  // the log-coordinate where the continuation rule changes
  double kink() const;

 private:
  Kind kind_ = Kind::None;
  std::vector<Atom> atoms_;
  std::optional<regvar::RegVarFn> rv_;
  double scale_ = 1.0;
  End end_ = End::Infinity;
};

struct StieltjesTriple {
  double a = 0.0;
  double b = 0.0;
  Distribution g;
};

enum class Kind { Stieltjes, CompleteBernstein };

struct QuadratureConfig {
  double rel_tol = 1e-12;   // Gauss-Kronrod error target relative to the L1 norm
  double tail_tol = 1e-12;  // truncation bound relative to the value scale
  unsigned max_depth = 20;
};

class SpecialFn {
 public:
  SpecialFn(Kind kind, StieltjesTriple triple, QuadratureConfig cfg = {});

  Kind kind() const { return kind_; }
  const StieltjesTriple& triple() const { return triple_; }
  const QuadratureConfig& config() const { return cfg_; }

  cplx operator()(cplx lambda) const;
  double operator()(double lambda) const;
  // int dmu(s)/(s + lambda) alone
  cplx measure_part(cplx lambda) const;
  bool is_zero() const;

 private:
  Kind kind_;
  StieltjesTriple triple_;
  QuadratureConfig cfg_;
};

cplx eval_special(const SpecialFn& fn, cplx lambda);

// f_g(l) = S_g(1/l) and f_m = f_g / (1 + f_g)
struct FgFm {
  SpecialFn stieltjes;
  cplx fg(cplx lambda) const;
  cplx fm(cplx lambda) const;
  double fg(double lambda) const { return fg(cplx(lambda)).real(); }
  double fm(double lambda) const { return fm(cplx(lambda)).real(); }
};
FgFm make_fg_fm(const Distribution& g);

struct KaramataReport {
  std::vector<double> lambda, ratio;  // S_g(l) l^sigma / (Gamma(sigma)Gamma(2-sigma) l_end(l))
  double constant = 0.0;              // Gamma(sigma)Gamma(2-sigma)
  numeric::ConvergenceVerdict verdict;
  bool pass = false;
};
// g has index 1 - sigma; lambda_grid is ordered toward the chosen end
KaramataReport karamata_audit(const regvar::RegVarFn& g, End end, const std::vector<double>& lambda_grid,
                              double tol = 0.05);

struct SectorReport {
  int checked = 0, skipped = 0, violations = 0;
  double worst_lower = 0.0;  // max of lower bound / |g(l)|
  double worst_upper = 0.0;  // max of |g(l)| / upper bound
  bool pass = false;
};
SectorReport sector_domination_audit(const SpecialFn& fn, const std::vector<double>& phi_grid,
                                     const std::vector<double>& r_grid);

enum class Duality { Reciprocal, TimesLambda, OverLambda, LambdaAtInverse };

struct TransformedFn {
  Kind claimed;
  std::function<cplx(cplx)> value;
  bool audit_pass = false;
  double operator()(double lambda) const { return value(cplx(lambda)).real(); }
};
// 1/f, l h(l), f(l)/l, l f(1/l) with the resulting class checked on samples
TransformedFn duality_transform(const SpecialFn& fn, Duality which);

}  // namespace sgdecay::cbf
