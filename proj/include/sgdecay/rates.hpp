#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgdecay/numeric.hpp"
#include "sgdecay/regvar.hpp"

namespace sgdecay::rates {

enum class Regime {
  InfUpperBanach,
  InfLower,
  InfHilbertPoly,
  InfHilbertRegVarSlower,
  InfHilbertRegVarFaster,
  ZeroLower,
  ZeroUpperGeneral,
  ZeroHilbertPoly,
  ZeroHilbertRegVarSlower,
  BothLower,
  BothMartinez,
  BothHilbertPoly
};

std::string regime_name(Regime r);
Regime regime_from_name(const std::string& name);  // SpecError on unknown names

struct RateRegime {
  Regime regime = Regime::InfHilbertPoly;
  double alpha = 1.0;
  double beta = 0.0;
  double epsilon = 0.1;
  std::optional<regvar::SlowlyVaryingExpr> ell;
  // use 1/M^{-1}(t) with M(s) = s^alpha / l(s) (needs a dB-symmetric l)
  bool db_symmetric_form = false;
  double c = 1.0, c_prime = 1.0, C = 1.0, C_prime = 1.0;
};

// A monotone resolvent profile with its generalized inverse.
//   increasing (s -> inf): inverse(y) = inf{s >= lo : P(s) >= y}
//   decreasing (s -> 0):   inverse(y) = sup{s <= hi : P(s) >= y}
class Profile {
 public:
  static Profile increasing(std::function<double(double)> fn, double lo = 0.0);
  static Profile decreasing(std::function<double(double)> fn, double hi = 1.0);
  // M(s) = s^alpha l(s), inverted through the regvar machinery
  static Profile from_regvar_inf(const regvar::RegVarFn& f);
  // m(s) = f(1/s)
  static Profile from_regvar_zero(const regvar::RegVarFn& f);

  bool is_increasing() const { return increasing_; }
  double operator()(double s) const { return fn_(s); }
  double inverse(double y) const;
  // smallest level y at which the inverse leaves its domain edge
  double range_start() const;
  // M (log(1+M) + log(1+s)) or m log((1+m)/s)
  Profile log_corrected() const;

 private:
  std::function<double(double)> fn_;
  std::function<double(double)> exact_inverse_;
  bool increasing_ = true;
  double edge_ = 0.0;  // lo or hi
};

struct ProfileInputs {
  std::optional<Profile> M, m, Mlog, mlog;
};

struct RateEnvelope {
  std::function<double(double)> fn;
  std::string provenance;
  double validity_start = 0.0;
  double operator()(double t) const { return fn(t); }
};

RateEnvelope predict(const RateRegime& regime, const ProfileInputs& inputs = {});

// positive and eventually decreasing on the grid
bool audit_envelope(const RateEnvelope& env, const std::vector<double>& t_grid);

enum class Side { Slower, Faster };
RateEnvelope regvarinf_formulas(double alpha, double beta, Side side, double epsilon = 0.1);

struct RefinementReport {
  std::vector<double> t;
  std::vector<std::vector<double>> log_m;      // log m_n on the grid, n = 0, 1, ...
  std::vector<std::vector<double>> deviation;  // |m_{n+1}/m_n - 1|
  std::vector<numeric::ConvergenceVerdict> verdicts;
  int stabilized_at = -1;
  RateEnvelope envelope;                       // (t m_n(t))^{-1/alpha} at the stabilized n
  std::function<double(double)> log_m_final;   // log m_n(t) for any t
};

// m_{n+1}(t) = l(t^{1/alpha} m_n(t)^{1/alpha}), started from m0 (default 1)
RefinementReport iterate_refinement(double alpha, const regvar::SlowlyVaryingExpr& ell,
                                    std::function<double(double)> m0 = nullptr, int max_iter = 8,
                                    const std::vector<double>& t_grid = {}, double tol = 0.02);
// the alternative start k^#(t)/log t with k(t) = 1/l(t^{1/alpha})
std::function<double(double)> conjugate_start(double alpha, const regvar::SlowlyVaryingExpr& ell);

enum class End { Infinity, Zero };
struct NormalReport {
  bool holds = false;
  double B = 0.0;                 // on the finest grid
  std::vector<double> B_schedule;  // along the refinement schedule
  std::vector<double> extent;      // decades covered by each grid
  bool diverges = false;
};
// checks P(tau)/P(s) >= c log(tau/s) - B (End::Infinity, 1 <= s <= tau)
// or P(tau)/P(s) >= c log(s/tau) - B (End::Zero, tau <= s <= 1); the profile
// is supplied as log P to keep fast growth representable
NormalReport normal_characterization(const std::function<double(double)>& log_profile, End end, double c = 1.0);

enum class Variant { Zero, Both };
struct ResolventBounds {
  std::function<double(double)> near_zero;                   // N*(c|s|) + 1/|s|
  std::function<double(double)> at_infinity;                 // N*(c/|s|), Both only
  std::function<double(double)> inverse;                     // N*
};
ResolventBounds decay_to_resolvent(std::function<double(double)> N, Variant variant, double c = 0.5);
// min{t >= 0 : N(t) <= s}
double decay_inverse(const std::function<double(double)>& N, double s);

}  // namespace sgdecay::rates
