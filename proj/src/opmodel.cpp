#include "sgdecay/opmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sgdecay/errors.hpp"
#include "sgdecay/numeric.hpp"

namespace sgdecay::opmodel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGridLow = 1e-16;
constexpr double kGridHigh = 1e20;
constexpr int kPerDecade = 256;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// minimum of f on [lo, hi]: coarse linear and geometric grids, then Brent
double min_on(const std::function<double(double)>& f, double lo, double hi) {
  if (!(hi > lo)) return f(lo);
  std::vector<double> pts = numeric::lin_space(lo, hi, 65);
  if (lo > 0.0 && hi / lo > 10.0) {
    const auto g = numeric::log_space_n(lo, hi, 65);
    pts.insert(pts.end(), g.begin(), g.end());
  }
  std::sort(pts.begin(), pts.end());
  std::size_t best = 0;
  double fb = kInf;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double v = f(pts[i]);
    if (v < fb) fb = v, best = i;
  }
  const double a = pts[best == 0 ? 0 : best - 1];
  const double b = pts[std::min(best + 1, pts.size() - 1)];
  if (b > a) {
    const auto r = numeric::maximize([&](double u) { return -f(u); }, a, b);
    fb = std::min(fb, -r.second);
  }
  return fb;
}

}  // namespace

// ---------------------------------------------------------------- curves

Curve Curve::power_law(double c, double shift, double p, double q, double s0, bool symmetric) {
  if (!(c > 0.0) || !std::isfinite(c)) throw SpecError("curve scale must be positive");
  if (!(s0 >= 0.0)) throw SpecError("curve start must be nonnegative");
  if (!(shift + s0 > 0.0)) throw SpecError("curve needs shift + s0 > 0");
  if (q != 0.0 && !(shift + s0 > 1.0)) throw SpecError("logarithmic curve needs shift + s0 > 1");
  Curve k;
  k.shape_ = Shape::PowerLaw;
  k.params_ = {c, shift, p, q};
  k.s0_ = s0;
  k.symmetric_ = symmetric;
  return k;
}

Curve Curve::zero_singular(double alpha0, double alpha_inf) {
  if (!(alpha0 > 0.0) || !(alpha_inf >= 0.0)) throw SpecError("zero-singular curve needs alpha0 > 0, alpha_inf >= 0");
  Curve k;
  k.shape_ = Shape::ZeroSingular;
  k.params_ = {alpha0, alpha_inf};
  k.s0_ = 0.0;
  k.symmetric_ = true;
  return k;
}

double Curve::a(double u) const {
  const double x = std::abs(u);
  if (shape_ == Shape::PowerLaw) {
    const double w = params_[1] + x;
    double la = std::log(params_[0]) + params_[2] * std::log(w);
    if (params_[3] != 0.0) la += params_[3] * std::log(std::log(w));
    return std::exp(la);
  }
  if (x == 0.0) return 0.0;
  return std::min(std::pow(x, params_[0]), std::pow(x, -params_[1]));
}

double Curve::tail_inf(double u) const {
  u = std::max(u, s0_);
  if (shape_ == Shape::ZeroSingular) return params_[1] > 0.0 ? 0.0 : a(u);
  const double p = params_[2], q = params_[3];
  if (p < 0.0 || (p == 0.0 && q < 0.0)) return 0.0;
  if (p == 0.0 && q == 0.0) return params_[0];
  if (p > 0.0 && q < 0.0) {
    // minimum of w^p (log w)^q at log w = -q/p
    const double turn = std::exp(-q / p) - params_[1];
    return a(std::max(u, turn));
  }
  return a(u);  // increasing
}

// ---------------------------------------------------------------- observables

Observable Observable::inv_a() {
  Observable o;
  o.kind_ = Kind::InvA;
  return o;
}
Observable Observable::b_of_a() {
  Observable o;
  o.kind_ = Kind::BofA;
  return o;
}
Observable Observable::aia2() {
  Observable o;
  o.kind_ = Kind::AIA2;
  return o;
}
Observable Observable::frac_comb(double alpha, double beta) {
  Observable o;
  o.kind_ = Kind::FracComb;
  o.alpha_ = alpha;
  o.beta_ = beta;
  return o;
}
Observable Observable::pow_b_of_a(double gamma) {
  if (!(gamma >= 0.0)) throw SpecError("power of B(A) needs gamma >= 0");
  Observable o;
  o.kind_ = Kind::PowBofA;
  o.alpha_ = gamma;
  return o;
}
Observable Observable::w_op(double alpha, double beta, const regvar::SlowlyVaryingExpr& ell) {
  if (!(alpha > 0.0) || !(beta > 0.0 && beta <= 1.0)) throw SpecError("W operator needs alpha > 0, beta in (0,1]");
  Observable o;
  o.kind_ = Kind::Wop;
  o.alpha_ = alpha;
  o.beta_ = beta;
  o.ell_ = ell;
  o.fn_ = std::make_shared<cbf::SpecialFn>(
      cbf::Kind::Stieltjes,
      cbf::StieltjesTriple{0, 0, cbf::Distribution::regvar(regvar::RegVarFn{1.0 - beta, ell})});
  return o;
}
Observable Observable::v_op(double alpha, double beta, const regvar::SlowlyVaryingExpr& ell) {
  if (!(alpha >= 1.0) || !(beta > 0.0 && beta <= 1.0)) throw SpecError("V operator needs alpha >= 1, beta in (0,1]");
  Observable o;
  o.kind_ = Kind::Vop;
  o.alpha_ = alpha;
  o.beta_ = beta;
  o.ell_ = ell;
  o.fn_ = std::make_shared<cbf::SpecialFn>(
      cbf::make_fg_fm(cbf::Distribution::regvar(regvar::RegVarFn{1.0 - beta, ell})).stieltjes);
  return o;
}
Observable Observable::cbf_of(const cbf::SpecialFn& f) {
  Observable o;
  o.kind_ = Kind::CBFof;
  o.fn_ = std::make_shared<cbf::SpecialFn>(f);
  return o;
}
Observable Observable::identity() { return Observable{}; }

cplx Observable::symbol(cplx l) const {
  switch (kind_) {
    case Kind::InvA:
      return 1.0 / l;
    case Kind::BofA:
      return l / (1.0 + l);
    case Kind::AIA2:
      return l / ((1.0 + l) * (1.0 + l));
    case Kind::FracComb:
      return std::exp(alpha_ * std::log(l) - (alpha_ + beta_) * std::log(1.0 + l));
    case Kind::PowBofA:
      return alpha_ == 0.0 ? cplx(1.0) : std::exp(alpha_ * std::log(l / (1.0 + l)));
    case Kind::Wop:
      return std::exp(-(alpha_ - beta_) * std::log(l)) * (*fn_)(l);
    case Kind::Vop: {
      const cplx f = (*fn_)(1.0 / l);
      const cplx b = std::exp((alpha_ - beta_) * std::log(l / (1.0 + l)));
      return b * f / (1.0 + f);
    }
    case Kind::CBFof:
      return (*fn_)(l);
    case Kind::Identity:
      return 1.0;
  }
  return 0.0;
}

bool Observable::singular_at_zero() const {
  switch (kind_) {
    case Kind::InvA:
    case Kind::Wop:
      return true;
    case Kind::FracComb:
      return alpha_ < 0.0;
    case Kind::CBFof:
      if (fn_->kind() == cbf::Kind::CompleteBernstein) return false;
      return fn_->triple().a > 0.0 || fn_->triple().g.kind() == cbf::Distribution::Kind::RegVar;
    default:
      return false;
  }
}

double Observable::symbol_at_zero() const {
  if (singular_at_zero()) throw PreconditionError(name() + " is singular at 0");
  switch (kind_) {
    case Kind::FracComb:
      return alpha_ == 0.0 ? 1.0 : 0.0;
    case Kind::PowBofA:
      return alpha_ == 0.0 ? 1.0 : 0.0;
    case Kind::CBFof: {
      const auto& tr = fn_->triple();
      if (fn_->kind() == cbf::Kind::CompleteBernstein) return tr.a;
      double v = tr.b;
      for (const auto& at : tr.g.atom_list()) v += at.w / at.s;
      return v;
    }
    case Kind::Identity:
      return 1.0;
    default:
      return 0.0;
  }
}

std::optional<double> Observable::tail_envelope(double u) const {
  switch (kind_) {
    case Kind::InvA:
    case Kind::AIA2:
      return 1.0 / u;
    case Kind::BofA:
    case Kind::PowBofA:
    case Kind::Identity:
      return 1.0;
    case Kind::FracComb:
      if (beta_ >= 0.0 && alpha_ + beta_ >= 0.0) return std::pow(u, -beta_);
      return std::nullopt;
    case Kind::Wop:
      // sector domination: |S(l)| <= sqrt(2) S(|l|) on the right half-plane
      return std::sqrt(2.0) * std::pow(u, beta_ - alpha_) * (*fn_)(u);
    case Kind::Vop:
      return 1.0;
    case Kind::CBFof: {
      const auto& tr = fn_->triple();
      if (fn_->kind() == cbf::Kind::Stieltjes)
        return tr.a / u + tr.b + std::sqrt(2.0) * fn_->measure_part(u).real();
      if (tr.b != 0.0 || tr.g.kind() == cbf::Distribution::Kind::RegVar) return std::nullopt;
      double mass = 0.0;
      for (const auto& at : tr.g.atom_list()) mass += at.w;
      return tr.a + mass;
    }
  }
  return std::nullopt;
}

std::string Observable::name() const {
  switch (kind_) {
    case Kind::InvA:
      return "InvA";
    case Kind::BofA:
      return "BofA";
    case Kind::AIA2:
      return "AIA2";
    case Kind::FracComb:
      return "FracComb(" + fmt(alpha_) + "," + fmt(beta_) + ")";
    case Kind::PowBofA:
      return "PowBofA(" + fmt(alpha_) + ")";
    case Kind::Wop:
      return "Wop(" + fmt(alpha_) + "," + fmt(beta_) + "," + ell_->to_string() + ")";
    case Kind::Vop:
      return "Vop(" + fmt(alpha_) + "," + fmt(beta_) + "," + ell_->to_string() + ")";
    case Kind::CBFof: {
      std::ostringstream os;
      os << "CBFof@" << fn_.get();
      return os.str();
    }
    case Kind::Identity:
      return "Identity";
  }
  return "?";
}

// ---------------------------------------------------------------- models

SpectralModel SpectralModel::diagonal(std::vector<cplx> eigenvalues, std::string name) {
  if (eigenvalues.empty()) throw SpecError("diagonal model needs at least one eigenvalue");
  if (eigenvalues.size() > 1000000) throw SpecError("diagonal models are capped at 10^6 eigenvalues");
  for (const auto& l : eigenvalues) {
    if (!std::isfinite(l.real()) || !std::isfinite(l.imag())) throw SpecError("eigenvalues must be finite");
    if (l.real() < 0.0) throw SpecError("eigenvalues must lie in the closed right half-plane");
    if (l.real() == 0.0 && l.imag() != 0.0) throw SpecError("imaginary-axis eigenvalues are admitted only at 0");
  }
  SpectralModel m;
  m.impl_ = std::make_shared<Impl>();
  m.impl_->variant = Variant::Diagonal;
  m.impl_->name = std::move(name);
  m.impl_->eig = std::move(eigenvalues);
  return m;
}

SpectralModel SpectralModel::curve(const Curve& c, std::string name) {
  SpectralModel m;
  m.impl_ = std::make_shared<Impl>();
  m.impl_->variant = Variant::Curve;
  m.impl_->name = std::move(name);
  m.impl_->curve = c;
  return m;
}

std::vector<std::string> SpectralModel::catalogue_names() {
  return {"borto-a0.5", "borto-a1", "borto-a2", "log-growth", "regvarinf-a1-b2", "zero-a1", "zero-a2", "both-a1-b2"};
}

SpectralModel SpectralModel::catalogue(const std::string& name) {
  if (name == "borto-a0.5") return curve(Curve::power_law(1, 1, -0.5, 0), name);
  if (name == "borto-a1") return curve(Curve::power_law(1, 1, -1, 0), name);
  if (name == "borto-a2") return curve(Curve::power_law(1, 1, -2, 0), name);
  if (name == "log-growth") return curve(Curve::power_law(1, 0, 0, -1, 2, false), name);
  if (name == "regvarinf-a1-b2") return curve(Curve::power_law(1, M_E, -1, 2), name);
  if (name == "zero-a1") return curve(Curve::zero_singular(1, 0), name);
  if (name == "zero-a2") return curve(Curve::zero_singular(2, 0), name);
  if (name == "both-a1-b2") return curve(Curve::zero_singular(1, 2), name);
  throw SpecError("unknown catalogue model '" + name + "'");
}

bool SpectralModel::contains_zero() const {
  if (variant() == Variant::Diagonal)
    return std::any_of(impl_->eig.begin(), impl_->eig.end(), [](cplx l) { return l == cplx(0.0); });
  return impl_->curve.s0() == 0.0 && impl_->curve.a(0.0) == 0.0;
}

std::vector<double> SpectralModel::parameter_grid(double u_max) const {
  const Curve& c = impl_->curve;
  if (c.s0() > 0.0) return numeric::log_space(c.s0(), std::max(u_max, c.s0()), kPerDecade);
  std::vector<double> g{0.0};
  const auto rest = numeric::log_space(kGridLow, u_max, kPerDecade);
  g.insert(g.end(), rest.begin(), rest.end());
  return g;
}

std::shared_ptr<SymbolTable> SpectralModel::table(const Observable& obs, double u_max) const {
  const std::string key = obs.name();
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->tables.find(key);
    if (it != impl_->tables.end() && it->second->u.back() >= u_max) return it->second;
  }
  auto tab = std::make_shared<SymbolTable>();
  const Curve& c = impl_->curve;
  tab->u = parameter_grid(u_max);
  for (double u : tab->u) {
    const double a = c.a(u);
    double lr;
    if (a == 0.0 && u == 0.0) {
      lr = std::log(std::abs(obs.symbol_at_zero()));
    } else {
      lr = std::log(std::abs(obs.symbol(cplx(a, u))));
    }
    tab->a.push_back(a);
    tab->log_r.push_back(lr);
  }
  std::lock_guard<std::mutex> lock(impl_->mu);
  auto& slot = impl_->tables[key];
  if (!slot || slot->u.back() < tab->u.back()) slot = tab;
  return slot;
}

// ---------------------------------------------------------------- resolvent

namespace {

// min over u in [lo, hi] (hi may be inf) of a(u)
double min_a(const Curve& c, double lo, double hi) {
  std::vector<double> pts;
  if (lo == 0.0) pts.push_back(0.0);
  const double glo = std::max(lo, kGridLow);
  const double ghi = std::isfinite(hi) ? hi : std::max(kGridHigh, 10.0 * glo);
  if (ghi >= glo) {
    const auto g = numeric::log_space(glo, ghi, kPerDecade);
    pts.insert(pts.end(), g.begin(), g.end());
  }
  std::size_t best = 0;
  double fb = kInf;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double v = c.a(pts[i]);
    if (v < fb) fb = v, best = i;
  }
  if (pts.size() > 1) {
    const double a = pts[best == 0 ? 0 : best - 1];
    const double b = pts[std::min(best + 1, pts.size() - 1)];
    if (b > a) fb = std::min(fb, -numeric::maximize([&](double u) { return -c.a(u); }, a, b).second);
  }
  if (!std::isfinite(hi)) fb = std::min(fb, c.tail_inf(ghi));
  return fb;
}

// squared distance from {(a(u), u) : u >= s0} to the segment {0} x [y0, y1]
double dist2_to_segment(const Curve& c, double y0, double y1) {
  const double s0 = c.s0();
  double best = kInf;
  const double lo = std::max(y0, s0);
  if (lo <= y1) {
    const double m = min_a(c, lo, y1);
    best = std::min(best, m * m);
  }
  if (y0 > s0) {
    const double w = c.a(y0);
    const double from = std::max(s0, y0 - w);
    best = std::min(best, min_on([&](double u) { return c.a(u) * c.a(u) + (y0 - u) * (y0 - u); }, from, y0));
  }
  if (std::isfinite(y1)) {
    const double k = std::max(y1, s0);
    const double d = std::sqrt(c.a(k) * c.a(k) + (k - y1) * (k - y1));
    best = std::min(best, min_on([&](double u) { return c.a(u) * c.a(u) + (u - y1) * (u - y1); }, k, y1 + d));
  }
  return best;
}

double inv_sqrt(double d2) { return d2 > 0.0 ? 1.0 / std::sqrt(d2) : kInf; }

// sup of 1/|ir + l| over the spectrum and over frequencies r with y0 <= |r| <= y1
double band_norm(const SpectralModel& m, double y0, double y1) {
  if (m.variant() == SpectralModel::Variant::Diagonal) {
    double best = kInf;
    for (const auto& l : m.eigenvalues()) {
      const double y = std::abs(l.imag());
      const double off = y < y0 ? y0 - y : (y > y1 ? y - y1 : 0.0);
      best = std::min(best, l.real() * l.real() + off * off);
    }
    return inv_sqrt(best);
  }
  return inv_sqrt(dist2_to_segment(m.curve_shape(), y0, y1));
}

}  // namespace

double resolvent_norm(const SpectralModel& model, double s) {
  if (!std::isfinite(s)) throw DomainError("frequency must be finite");
  if (model.variant() == SpectralModel::Variant::Diagonal) {
    double best = kInf;
    for (const auto& l : model.eigenvalues()) best = std::min(best, std::abs(cplx(0.0, s) + l));
    return best > 0.0 ? 1.0 / best : kInf;
  }
  const Curve& c = model.curve_shape();
  // the upper branch a(u) + iu meets -is at u = -s; the mirrored branch at u = s
  double d2 = dist2_to_segment(c, -s, -s);
  if (c.symmetric()) d2 = std::min(d2, dist2_to_segment(c, s, s));
  return inv_sqrt(d2);
}

double resolvent_profile(const SpectralModel& model, ProfileKind kind, double s) {
  switch (kind) {
    case ProfileKind::Mcap:
      if (!(s >= 0.0)) throw DomainError("M(s) needs s >= 0");
      return band_norm(model, 0.0, s);
    case ProfileKind::mcap:
      if (!(s > 0.0)) throw DomainError("m(s) needs s > 0");
      return band_norm(model, s, kInf);
    case ProfileKind::M2:
      if (!(s >= 1.0)) throw DomainError("M2(s) needs s >= 1");
      return band_norm(model, 1.0, s);
    case ProfileKind::m2:
      if (!(s > 0.0 && s <= 1.0)) throw DomainError("m2(s) needs 0 < s <= 1");
      return band_norm(model, s, 1.0);
    case ProfileKind::Mlog: {
      const double M = resolvent_profile(model, ProfileKind::Mcap, s);
      return M * (std::log1p(M) + std::log1p(s));
    }
    case ProfileKind::mlog: {
      const double m = resolvent_profile(model, ProfileKind::m2, s);
      return m * std::log((1.0 + m) / s);
    }
  }
  return 0.0;
}

double ResolventProfile::operator()(double s) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(s);
    if (it != memo_.end()) return it->second;
  }
  const double v = resolvent_profile(model_, kind_, s);
  std::lock_guard<std::mutex> lock(mu_);
  memo_.emplace(s, v);
  return v;
}

// ---------------------------------------------------------------- semigroup

namespace {

double log_abs_symbol(const Curve& c, const Observable& obs, double u) {
  const double a = c.a(u);
  if (a == 0.0 && u == 0.0) return std::log(std::abs(obs.symbol_at_zero()));
  return std::log(std::abs(obs.symbol(cplx(a, u))));
}

void check_zero(const SpectralModel& m, const Observable& obs) {
  if (m.contains_zero() && obs.singular_at_zero())
    throw PreconditionError(obs.name() + " is singular at the spectral point 0 of " + m.name());
}

}  // namespace

double semigroup_norm(const SpectralModel& model, double t, const Observable& obs) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and nonnegative");
  check_zero(model, obs);
  if (model.variant() == SpectralModel::Variant::Diagonal) {
    double best = 0.0;
    for (const auto& l : model.eigenvalues()) {
      const double r = l == cplx(0.0) ? std::abs(obs.symbol_at_zero()) : std::abs(obs.symbol(l));
      best = std::max(best, std::exp(-t * l.real()) * r);
    }
    return best;
  }
  const Curve& c = model.curve_shape();
  // grid tops 1e20, 1e60, ..., 1e300
  for (int decade = int(std::lround(std::log10(kGridHigh))); decade <= 300; decade += 40) {
    const auto tab = model.table(obs, std::pow(10.0, decade));
    std::size_t best = 0;
    double lb = -kInf;
    for (std::size_t i = 0; i < tab->u.size(); ++i) {
      const double v = -t * tab->a[i] + tab->log_r[i];
      if (v > lb) lb = v, best = i;
    }
    if (std::isfinite(lb)) {
      const double a = tab->u[best == 0 ? 0 : best - 1];
      const double b = tab->u[std::min(best + 1, tab->u.size() - 1)];
      if (b > a) {
        const auto r = numeric::maximize([&](double u) { return -t * c.a(u) + log_abs_symbol(c, obs, u); }, a, b);
        lb = std::max(lb, r.second);
      }
    }
    const double top = tab->u.back();
    const auto env = obs.tail_envelope(top);
    if (!env) throw TailError("no decreasing envelope for " + obs.name() + " on " + model.name());
    const double tail = -t * c.tail_inf(top) + std::log(*env);
    if (tail <= lb) return std::exp(lb);
    if (tail <= lb + 1e-6) return std::exp(tail);  // sup approached at infinity
  }
  throw TailError("tail of " + obs.name() + " on " + model.name() + " could not be certified at t=" + fmt(t));
}

// ---------------------------------------------------------------- cancellation

CancelResult cancel_sup(const SpectralModel& model, const Observable& obs) {
  check_zero(model, obs);
  CancelResult res;
  if (model.variant() == SpectralModel::Variant::Diagonal) {
    for (const auto& l : model.eigenvalues()) {
      if (l.real() == 0.0) {
        if (obs.symbol_at_zero() != 0.0) {
          res.value = kInf;
          res.finite = false;
          res.witness = l;
          res.note = "symbol does not vanish at the spectral point 0";
          return res;
        }
        continue;
      }
      const double v = std::abs(obs.symbol(l)) / l.real();
      if (v > res.value) res.value = v, res.witness = l;
    }
    return res;
  }
  const Curve& c = model.curve_shape();
  const auto tab = model.table(obs, kGridHigh);
  const std::size_t n = tab->u.size();
  std::vector<double> v(n, -kInf);
  for (std::size_t i = 0; i < n; ++i) {
    if (tab->a[i] == 0.0) {
      if (std::isfinite(tab->log_r[i])) {
        res = {kInf, false, cplx(0.0), "symbol does not vanish at the spectral point 0"};
        return res;
      }
      continue;
    }
    v[i] = tab->log_r[i] - std::log(tab->a[i]);
  }
  // divergence: per-decade maxima strictly increasing toward either end
  auto decade_max = [&](double lo, double hi) {
    double m = -kInf;
    for (std::size_t i = 0; i < n; ++i)
      if (tab->u[i] >= lo && tab->u[i] <= hi) m = std::max(m, v[i]);
    return m;
  };
  const double top = tab->u.back();
  const double t1 = decade_max(top / 1e3, top / 1e2), t2 = decade_max(top / 1e2, top / 10), t3 = decade_max(top / 10, top);
  if (t2 > t1 + 1e-9 && t3 > t2 + 1e-9) {
    res = {kInf, false, cplx(c.a(top), top), "ratio grows without bound as |Im l| -> inf"};
    return res;
  }
  if (c.s0() == 0.0 && c.a(0.0) == 0.0) {
    const double b1 = decade_max(kGridLow, kGridLow * 10), b2 = decade_max(kGridLow * 10, kGridLow * 100),
                 b3 = decade_max(kGridLow * 100, kGridLow * 1000);
    if (b1 > b2 + 1e-9 && b2 > b3 + 1e-9) {
      res = {kInf, false, cplx(0.0), "ratio grows without bound as l -> 0"};
      return res;
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (v[i] > v[best]) best = i;
  double lv = v[best];
  double ub = tab->u[best];
  const double a = tab->u[best == 0 ? 0 : best - 1];
  const double b = tab->u[std::min(best + 1, n - 1)];
  if (b > a && a > 0.0) {
    const auto r = numeric::maximize(
        [&](double u) { return log_abs_symbol(c, obs, u) - std::log(c.a(u)); }, a, b);
    if (r.second > lv) lv = r.second, ub = r.first;
  }
  res.value = std::exp(lv);
  res.witness = cplx(c.a(ub), ub);
  res.note = "supremum attained on the sampled curve";
  return res;
}

// ---------------------------------------------------------------- sectoriality

SectorialityReport sectoriality_audit(const SpectralModel& model, const std::function<cplx(cplx)>& g,
                                      const std::vector<double>& lambda_grid) {
  std::vector<cplx> spec;
  if (model.variant() == SpectralModel::Variant::Diagonal) {
    spec = model.eigenvalues();
  } else {
    const Curve& c = model.curve_shape();
    for (double u : model.parameter_grid(1e12)) {
      spec.emplace_back(c.a(u), u);
      if (c.symmetric() && u > 0.0) spec.emplace_back(c.a(u), -u);
    }
  }
  std::vector<cplx> gv;
  for (const auto& mu : spec) {
    const cplx v = g(mu);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) continue;
    if (v.real() < -1e-12 * (1.0 + std::abs(v))) throw PreconditionError("symbol leaves the closed right half-plane");
    gv.push_back(v);
  }
  if (gv.empty()) throw PreconditionError("symbol is not finite on the spectrum");
  SectorialityReport rep;
  for (double l : lambda_grid) {
    if (!(l > 0.0)) throw DomainError("sectoriality grid must be positive");
    double m = 0.0;
    for (const auto& v : gv) m = std::max(m, l / std::abs(l + v));
    rep.lambda.push_back(l);
    rep.value.push_back(m);
    rep.C = std::max(rep.C, m);
  }
  const auto dm = numeric::decade_maxima(rep.lambda, rep.value);
  const std::size_t k = dm.max.size();
  if (k >= 3) {
    std::vector<double> xt, yt, xb, yb;
    for (std::size_t i = k - 3; i < k; ++i) xt.push_back(std::log10(dm.center[i])), yt.push_back(std::log10(dm.max[i]));
    for (std::size_t i = 0; i < 3; ++i) xb.push_back(std::log10(dm.center[i])), yb.push_back(std::log10(dm.max[i]));
    rep.top_slope = numeric::ols_slope(xt, yt);
    rep.bottom_slope = numeric::ols_slope(xb, yb);
  }
  rep.growth = rep.top_slope > 0.01 || rep.bottom_slope < -0.01 || !std::isfinite(rep.C);
  rep.pass = !rep.growth;
  return rep;
}

}  // namespace sgdecay::opmodel
