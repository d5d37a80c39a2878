#pragma once

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sgdecay/cbf.hpp"
#include "sgdecay/regvar.hpp"

namespace sgdecay::opmodel {

using cplx = std::complex<double>;

// Real part a(u) > 0 of a spectral curve {a(u) + iu : u >= s0}.
//   power_law:     a(u) = c * w^p * (log w)^q, w = shift + |u|
//   zero_singular: a(u) = min(|u|^alpha0, |u|^-alpha_inf), a(0) = 0
class Curve {
 public:
  enum class Shape { PowerLaw, ZeroSingular };

  static Curve power_law(double c, double shift, double p, double q, double s0 = 0.0, bool symmetric = true);
  static Curve zero_singular(double alpha0, double alpha_inf);

  Shape shape() const { return shape_; }
  double s0() const { return s0_; }
  bool symmetric() const { return symmetric_; }
  const std::vector<double>& params() const { return params_; }

  double a(double u) const;
  // a lower bound for inf_{v >= u} a(v), exact for the catalogue shapes
  double tail_inf(double u) const;

 private:
  Shape shape_ = Shape::PowerLaw;
  std::vector<double> params_;
  double s0_ = 0.0;
  bool symmetric_ = true;
};

class Observable {
 public:
  enum class Kind { InvA, BofA, AIA2, FracComb, PowBofA, Wop, Vop, CBFof, Identity };

  static Observable inv_a();
  static Observable b_of_a();
  static Observable aia2();
  static Observable frac_comb(double alpha, double beta);  // l^a / (1+l)^(a+b)
  static Observable pow_b_of_a(double gamma);              // (l/(1+l))^g
  static Observable w_op(double alpha, double beta, const regvar::SlowlyVaryingExpr& ell);
  static Observable v_op(double alpha, double beta, const regvar::SlowlyVaryingExpr& ell);
  static Observable cbf_of(const cbf::SpecialFn& f);
  static Observable identity();

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const std::optional<regvar::SlowlyVaryingExpr>& ell() const { return ell_; }
  std::shared_ptr<const cbf::SpecialFn> special() const { return fn_; }

  cplx symbol(cplx lambda) const;  // value at lambda, lambda != 0
  bool singular_at_zero() const;
  double symbol_at_zero() const;  // limit at 0 when not singular
  // decreasing bound of |symbol| over {Re l >= 0, |l| >= u}; nullopt if none is known
  std::optional<double> tail_envelope(double u) const;
  std::string name() const;

 private:
  Kind kind_ = Kind::Identity;
  double alpha_ = 0.0, beta_ = 0.0;
  std::optional<regvar::SlowlyVaryingExpr> ell_;
  std::shared_ptr<const cbf::SpecialFn> fn_;  // S_g for Wop, the Stieltjes S_g behind f_g for Vop, f for CBFof
};

struct SymbolTable;  // cached samples of a(u) and log|r| on the curve grid

class SpectralModel {
 public:
  enum class Variant { Diagonal, Curve };

  static SpectralModel diagonal(std::vector<cplx> eigenvalues, std::string name = "diagonal");
  static SpectralModel curve(const Curve& c, std::string name = "curve");
  // named catalogue entries
  static SpectralModel catalogue(const std::string& name);
  static std::vector<std::string> catalogue_names();

  Variant variant() const { return impl_->variant; }
  const std::string& name() const { return impl_->name; }
  const std::vector<cplx>& eigenvalues() const { return impl_->eig; }
  const Curve& curve_shape() const { return impl_->curve; }
  bool contains_zero() const;

  // grid of curve parameters used for suprema (u >= s0 up to u_max)
  std::vector<double> parameter_grid(double u_max = 1e20) const;
  std::shared_ptr<SymbolTable> table(const Observable& obs, double u_max) const;

 private:
  struct Impl {
    Variant variant = Variant::Diagonal;
    std::string name;
    std::vector<cplx> eig;
    Curve curve;
    mutable std::mutex mu;
    mutable std::map<std::string, std::shared_ptr<SymbolTable>> tables;
  };
  std::shared_ptr<Impl> impl_;
};

struct SymbolTable {
  std::vector<double> u, a, log_r;  // log|r(a(u) + iu)|, -inf where r vanishes
};

// sup over the spectrum of 1/|is + l|; +inf if -is lies in the spectrum
double resolvent_norm(const SpectralModel& model, double s);

// exact sup over the spectrum of |exp(-t l) r(l)|
double semigroup_norm(const SpectralModel& model, double t, const Observable& obs);

enum class ProfileKind { Mcap, mcap, Mlog, mlog, M2, m2 };
double resolvent_profile(const SpectralModel& model, ProfileKind kind, double s);

// memoized callable view of a profile
class ResolventProfile {
 public:
  ResolventProfile(SpectralModel model, ProfileKind kind) : model_(std::move(model)), kind_(kind) {}
  double operator()(double s) const;
  ProfileKind kind() const { return kind_; }

 private:
  SpectralModel model_;
  ProfileKind kind_;
  mutable std::mutex mu_;
  mutable std::map<double, double> memo_;
};

struct CancelResult {
  double value = 0.0;  // +inf when divergent
  bool finite = true;
  cplx witness;        // spectral location of the sup (or of the divergence)
  std::string note;
};
// sup over the spectrum of |r(l)| / Re l
CancelResult cancel_sup(const SpectralModel& model, const Observable& obs);

struct SectorialityReport {
  std::vector<double> lambda, value;  // sup over the spectrum of l / |l + g(mu)|
  double C = 0.0;
  double top_slope = 0.0, bottom_slope = 0.0;  // per-decade trend of log sup at both ends
  bool growth = false;
  bool pass = false;
};
SectorialityReport sectoriality_audit(const SpectralModel& model, const std::function<cplx(cplx)>& g,
                                      const std::vector<double>& lambda_grid);

}  // namespace sgdecay::opmodel
