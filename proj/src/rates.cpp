#include "sgdecay/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "sgdecay/errors.hpp"

namespace sgdecay::rates {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::map<Regime, std::string>& names() {
  static const std::map<Regime, std::string> m{
      {Regime::InfUpperBanach, "InfUpperBanach"},
      {Regime::InfLower, "InfLower"},
      {Regime::InfHilbertPoly, "InfHilbertPoly"},
      {Regime::InfHilbertRegVarSlower, "InfHilbertRegVarSlower"},
      {Regime::InfHilbertRegVarFaster, "InfHilbertRegVarFaster"},
      {Regime::ZeroLower, "ZeroLower"},
      {Regime::ZeroUpperGeneral, "ZeroUpperGeneral"},
      {Regime::ZeroHilbertPoly, "ZeroHilbertPoly"},
      {Regime::ZeroHilbertRegVarSlower, "ZeroHilbertRegVarSlower"},
      {Regime::BothLower, "BothLower"},
      {Regime::BothMartinez, "BothMartinez"},
      {Regime::BothHilbertPoly, "BothHilbertPoly"},
  };
  return m;
}

// smallest x >= x0 with f(x) >= 0 for nondecreasing f, by doubling steps then bisection
double first_crossing(const std::function<double(double)>& f, double x0) {
  double lo = x0, step = 1.0;
  int k = 0;
  while (!(f(lo + step) >= 0.0)) {
    lo += step;
    step *= 2.0;
    if (++k > 60) throw BracketError("profile does not reach the requested level");
  }
  double hi = lo + step;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

bool slow_increasing(const regvar::SlowlyVaryingExpr& ell) {
  const double u0 = std::log(ell.domain_start());
  for (double u : numeric::log_space_n(std::max(u0, 1e-3), 700.0, 200))
    if (ell.index_at(std::max(u, u0)) < -1e-14) return false;
  return true;
}

bool slow_decreasing(const regvar::SlowlyVaryingExpr& ell) {
  const double u0 = std::log(ell.domain_start());
  for (double u : numeric::log_space_n(std::max(u0, 1e-3), 700.0, 200))
    if (ell.index_at(std::max(u, u0)) > 1e-14) return false;
  return true;
}

const regvar::SlowlyVaryingExpr& need_ell(const RateRegime& r) {
  if (!r.ell) throw RegimeParameterError(regime_name(r.regime) + " needs a slowly varying part");
  return *r.ell;
}

const Profile& need(const std::optional<Profile>& p, const char* what, Regime r) {
  if (!p) throw RegimeParameterError(regime_name(r) + " needs the profile " + what);
  return *p;
}

Profile log_or(const std::optional<Profile>& lg, const std::optional<Profile>& base, const char* what, Regime r) {
  if (lg) return *lg;
  return need(base, what, r).log_corrected();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

std::string regime_name(Regime r) { return names().at(r); }

Regime regime_from_name(const std::string& name) {
  for (const auto& [k, v] : names())
    if (v == name) return k;
  throw SpecError("unknown regime '" + name + "'");
}

// ---------------------------------------------------------------- profiles

Profile Profile::increasing(std::function<double(double)> fn, double lo) {
  if (!(lo >= 0.0)) throw DomainError("profile start must be nonnegative");
  Profile p;
  p.fn_ = std::move(fn);
  p.increasing_ = true;
  p.edge_ = lo;
  return p;
}

Profile Profile::decreasing(std::function<double(double)> fn, double hi) {
  if (!(hi > 0.0)) throw DomainError("profile end must be positive");
  Profile p;
  p.fn_ = std::move(fn);
  p.increasing_ = false;
  p.edge_ = hi;
  return p;
}

Profile Profile::from_regvar_inf(const regvar::RegVarFn& f) {
  auto inv = std::make_shared<regvar::AsymptoticInverse>(f);
  Profile p;
  p.fn_ = [f](double s) { return f(s); };
  p.exact_inverse_ = [inv](double y) { return (*inv)(y); };
  p.increasing_ = true;
  p.edge_ = inv->tail_start();
  return p;
}

Profile Profile::from_regvar_zero(const regvar::RegVarFn& f) {
  auto inv = std::make_shared<regvar::AsymptoticInverse>(f);
  Profile p;
  p.fn_ = [f](double s) { return f(1.0 / s); };
  p.exact_inverse_ = [inv](double y) { return 1.0 / (*inv)(y); };
  p.increasing_ = false;
  p.edge_ = 1.0 / inv->tail_start();
  return p;
}

double Profile::range_start() const { return fn_(edge_); }

double Profile::inverse(double y) const {
  if (!(y > range_start())) return edge_;
  if (exact_inverse_) return exact_inverse_(y);
  if (increasing_) {
    const double x0 = edge_ > 0.0 ? std::log(edge_) : -50.0;
    return std::exp(first_crossing([&](double x) { return fn_(std::exp(x)) - y; }, x0));
  }
  const double x0 = -std::log(edge_);
  return std::exp(-first_crossing([&](double x) { return fn_(std::exp(-x)) - y; }, x0));
}

Profile Profile::log_corrected() const {
  const auto f = fn_;
  if (increasing_)
    return increasing([f](double s) {
      const double M = f(s);
      return M * (std::log1p(M) + std::log1p(s));
    }, edge_);
  return decreasing([f](double s) {
    const double m = f(s);
    return m * std::log((1.0 + m) / s);
  }, std::min(edge_, 1.0));
}

// ---------------------------------------------------------------- predict

RateEnvelope predict(const RateRegime& r, const ProfileInputs& in) {
  const Regime g = r.regime;
  const std::string name = regime_name(g);
  if (!(r.c > 0 && r.c_prime > 0 && r.C > 0 && r.C_prime > 0))
    throw RegimeParameterError(name + ": constants must be positive");
  RateEnvelope env;
  auto power_env = [&](double a, const std::string& what) {
    if (!(a > 0.0)) throw RegimeParameterError(name + " needs a positive exponent");
    const double C = r.C;
    env.fn = [C, a](double t) { return C * std::pow(t, -1.0 / a); };
    env.provenance = name + ": " + what;
    env.validity_start = 0.0;
  };
  auto slower_env = [&]() {
    const auto& ell = need_ell(r);
    if (!(r.alpha > 0.0)) throw RegimeParameterError(name + " needs alpha > 0");
    if (!slow_increasing(ell)) throw RegimeParameterError(name + " needs an increasing slowly varying part");
    const double a = r.alpha, C = r.C;
    env.fn = [ell, a, C](double t) {
      const double v = std::log(t);
      return C * std::exp(-(v + ell.log_at(v / a)) / a);
    };
    env.provenance = name + ": C (t l(t^(1/alpha)))^(-1/alpha), l = " + ell.to_string();
    env.validity_start = std::pow(ell.domain_start(), a);
  };

  switch (g) {
    case Regime::InfUpperBanach: {
      const Profile P = log_or(in.Mlog, in.M, "M", g);
      const double c = r.c, C = r.C;
      env.fn = [P, c, C](double t) { return C / P.inverse(c * t); };
      env.provenance = name + ": C / M_log^{-1}(c t)";
      env.validity_start = P.range_start() / c;
      break;
    }
    case Regime::InfLower: {
      const Profile P = need(in.M, "M", g);
      const double c = r.c, C = r.C;
      env.fn = [P, c, C](double t) { return c / P.inverse(C * t); };
      env.provenance = name + ": c / M^{-1}(C t)";
      env.validity_start = P.range_start() / C;
      break;
    }
    case Regime::InfHilbertPoly:
      power_env(r.alpha, "C t^(-1/alpha), alpha = " + fmt(r.alpha));
      break;
    case Regime::InfHilbertRegVarSlower:
      if (r.db_symmetric_form) {
        const auto& ell = need_ell(r);
        if (!slow_increasing(ell)) throw RegimeParameterError(name + " needs an increasing slowly varying part");
        auto inv = std::make_shared<regvar::AsymptoticInverse>(
            regvar::RegVarFn{r.alpha, regvar::SlowlyVaryingExpr::real_power(ell, -1.0)});
        const double C = r.C;
        env.fn = [inv, C](double t) { return C / (*inv)(t); };
        env.provenance = name + ": C / M^{-1}(t), M(s) = s^alpha / l(s), l = " + ell.to_string();
        env.validity_start = inv->function()(inv->tail_start());
      } else {
        slower_env();
      }
      break;
    case Regime::InfHilbertRegVarFaster: {
      const auto& ell = need_ell(r);
      if (!(r.epsilon > 0.0))
        throw RegimeParameterError(name + " is only available for epsilon > 0; the epsilon = 0 case is open");
      if (!(r.alpha > 0.0)) throw RegimeParameterError(name + " needs alpha > 0");
      if (!slow_decreasing(ell)) throw RegimeParameterError(name + " needs a decreasing slowly varying part");
      using SV = regvar::SlowlyVaryingExpr;
      const SV k = SV::real_power(SV::arg_power(ell, 1.0 / r.alpha), -1.0);
      auto conj = std::make_shared<regvar::ConjugateFn>(regvar::de_bruijn_conjugate(k));
      const double a = r.alpha, e = r.epsilon, C = r.C;
      env.fn = [conj, a, e, C](double t) {
        const double v = std::log(t);
        return C * std::exp(e * std::log(v) - (v + conj->log_at(v)) / a);
      };
      env.provenance = name + ": C (log t)^eps / (t k#(t))^(1/alpha), k(t) = 1/l(t^(1/alpha)), l = " + ell.to_string();
      env.validity_start = std::max(M_E, conj->min_argument());
      break;
    }
    case Regime::ZeroLower: {
      const Profile P = need(in.m, "m", g);
      const double c = r.c, cp = r.c_prime;
      env.fn = [P, c, cp](double t) { return c * P.inverse(cp * t); };
      env.provenance = name + ": c m^{-1}(c' t)";
      env.validity_start = P.range_start() / cp;
      break;
    }
    case Regime::ZeroUpperGeneral: {
      const Profile P = need(in.m, "m", g);
      if (!(r.epsilon > 0.0 && r.epsilon < 1.0)) throw RegimeParameterError(name + " needs epsilon in (0,1)");
      const double e = r.epsilon, C = r.C;
      env.fn = [P, e, C](double t) { return C * P.inverse(std::pow(t, 1.0 - e)); };
      env.provenance = name + ": C m^{-1}(t^(1-eps)), eps = " + fmt(e);
      env.validity_start = std::pow(P.range_start(), 1.0 / (1.0 - e));
      break;
    }
    case Regime::ZeroHilbertPoly:
      power_env(r.alpha, "C t^(-1/alpha), alpha = " + fmt(r.alpha));
      break;
    case Regime::ZeroHilbertRegVarSlower:
      if (!(r.alpha > 1.0)) throw RegimeParameterError(name + " needs alpha > 1");
      slower_env();
      break;
    case Regime::BothLower: {
      const Profile Pm = need(in.m, "m", g), PM = need(in.M, "M", g);
      const double c = r.c, cp = r.c_prime, Cp = r.C_prime;
      env.fn = [Pm, PM, c, cp, Cp](double t) { return c * std::max(Pm.inverse(cp * t), 1.0 / PM.inverse(Cp * t)); };
      env.provenance = name + ": c max(m^{-1}(c' t), 1/M^{-1}(C' t))";
      env.validity_start = std::max(Pm.range_start() / cp, PM.range_start() / Cp);
      break;
    }
    case Regime::BothMartinez: {
      const Profile Pm = log_or(in.mlog, in.m, "m", g), PM = log_or(in.Mlog, in.M, "M", g);
      const double C = r.C, cp = r.c_prime, Cp = r.C_prime;
      env.fn = [Pm, PM, C, cp, Cp](double t) { return C * std::max(Pm.inverse(cp * t), 1.0 / PM.inverse(Cp * t)); };
      env.provenance = name + ": C max(m_log^{-1}(c' t), 1/M_log^{-1}(C' t))";
      env.validity_start = std::max(Pm.range_start() / cp, PM.range_start() / Cp);
      break;
    }
    case Regime::BothHilbertPoly: {
      if (!(r.alpha > 0.0 && r.beta > 0.0)) throw RegimeParameterError(name + " needs alpha, beta > 0");
      const double gam = std::max(r.alpha, r.beta);
      power_env(gam, "C t^(-1/gamma), gamma = max(alpha, beta) = " + fmt(gam));
      break;
    }
  }
  return env;
}

bool audit_envelope(const RateEnvelope& env, const std::vector<double>& t_grid) {
  std::vector<double> v;
  for (double t : t_grid) {
    if (t < env.validity_start || t <= 0.0) continue;
    const double x = env(t);
    if (!(x > 0.0) || !std::isfinite(x)) return false;
    v.push_back(x);
  }
  if (v.size() < 2) return false;
  for (std::size_t i = v.size() / 2 + 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] * (1.0 + 1e-12)) return false;
  return true;
}

RateEnvelope regvarinf_formulas(double alpha, double beta, Side side, double epsilon) {
  if (!(alpha > 0.0) || !(beta >= 0.0)) throw RegimeParameterError("log-corrected power envelope needs alpha > 0, beta >= 0");
  RateEnvelope env;
  env.validity_start = M_E;
  if (side == Side::Slower) {
    env.fn = [alpha, beta](double t) { return std::pow(t, -1.0 / alpha) * std::pow(std::log(t), -beta / alpha); };
    env.provenance = "t^(-1/alpha) (log t)^(-beta/alpha)";
  } else {
    if (!(epsilon > 0.0))
      throw RegimeParameterError("faster-side envelope is only available for epsilon > 0; the epsilon = 0 case is open");
    env.fn = [alpha, beta, epsilon](double t) {
      return std::pow(t, -1.0 / alpha) * std::pow(std::log(t), epsilon + beta / alpha);
    };
    env.provenance = "t^(-1/alpha) (log t)^(eps + beta/alpha)";
  }
  return env;
}

// ---------------------------------------------------------------- refinement

RefinementReport iterate_refinement(double alpha, const regvar::SlowlyVaryingExpr& ell,
                                    std::function<double(double)> m0, int max_iter,
                                    const std::vector<double>& t_grid, double tol) {
  if (!(alpha > 0.0)) throw RegimeParameterError("refinement needs alpha > 0");
  if (!slow_increasing(ell)) throw PreconditionError("refinement needs an increasing slowly varying part");
  if (!m0) m0 = [](double) { return 1.0; };
  RefinementReport rep;
  rep.t = t_grid.empty() ? numeric::log_space(1e3, 1e12, 8) : t_grid;
  std::vector<double> cur;
  for (double t : rep.t) {
    const double v = m0(t);
    if (!(v > 0.0)) throw PreconditionError("starting function must be positive");
    cur.push_back(std::log(v));
  }
  rep.log_m.push_back(cur);
  for (int n = 0; n < max_iter; ++n) {
    std::vector<double> next, dev;
    for (std::size_t i = 0; i < rep.t.size(); ++i) {
      next.push_back(ell.log_at((std::log(rep.t[i]) + cur[i]) / alpha));
      dev.push_back(std::abs(std::expm1(next.back() - cur[i])));
    }
    rep.log_m.push_back(next);
    rep.deviation.push_back(dev);
    rep.verdicts.push_back(numeric::assess_convergence(rep.t, dev, tol));
    if (rep.verdicts.back().pass) {
      rep.stabilized_at = n;
      break;
    }
    cur = next;
  }
  if (rep.stabilized_at < 0) {
    std::ostringstream os;
    os << "refinement did not stabilize after " << max_iter << " iterations; last per-decade deviations:";
    for (double d : rep.verdicts.back().decades.max) os << ' ' << d;
    throw NonConvergenceError(os.str());
  }
  const int n = rep.stabilized_at;
  const auto start = m0;
  rep.log_m_final = [start, ell, alpha, n](double t) {
    double lm = std::log(start(t));
    for (int k = 0; k < n; ++k) lm = ell.log_at((std::log(t) + lm) / alpha);
    return lm;
  };
  const auto lmf = rep.log_m_final;
  rep.envelope.fn = [lmf, alpha](double t) { return std::exp(-(std::log(t) + lmf(t)) / alpha); };
  rep.envelope.provenance = "refined (t m_" + std::to_string(n) + "(t))^(-1/alpha), l = " + ell.to_string();
  rep.envelope.validity_start = std::pow(ell.domain_start(), alpha);
  return rep;
}

std::function<double(double)> conjugate_start(double alpha, const regvar::SlowlyVaryingExpr& ell) {
  using SV = regvar::SlowlyVaryingExpr;
  const SV k = SV::real_power(SV::arg_power(ell, 1.0 / alpha), -1.0);
  auto conj = std::make_shared<regvar::ConjugateFn>(regvar::de_bruijn_conjugate(k));
  return [conj](double t) {
    const double v = std::log(t);
    return std::exp(conj->log_at(v)) / v;
  };
}

// ---------------------------------------------------------------- normal models

NormalReport normal_characterization(const std::function<double(double)>& log_profile, End end, double c) {
  if (!(c > 0.0)) throw DomainError("normal characterization needs c > 0");
  NormalReport rep;
  for (int decades : {4, 8, 16, 32, 64}) {
    const double lo = end == End::Infinity ? 1.0 : std::pow(10.0, -decades);
    const double hi = end == End::Infinity ? std::pow(10.0, decades) : 1.0;
    const auto s = numeric::log_space(lo, hi, 8);
    std::vector<double> lp;
    for (double x : s) lp.push_back(log_profile(x));
    double B = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        // Infinity: s = s_i <= tau = s_j;  Zero: tau = s_i <= s = s_j
        const double num = end == End::Infinity ? lp[j] : lp[i];
        const double den = end == End::Infinity ? lp[i] : lp[j];
        const double ratio = std::exp(num - den);
        if (std::isnan(ratio)) continue;
        B = std::max(B, c * std::log(s[j] / s[i]) - ratio);
      }
    rep.B_schedule.push_back(B);
    rep.extent.push_back(decades);
  }
  const auto& b = rep.B_schedule;
  const std::size_t k = b.size();
  const double d1 = b[k - 2] - b[k - 3], d2 = b[k - 1] - b[k - 2];
  rep.diverges = d1 > 1e-9 * (1.0 + b[k - 3]) && d2 > 1e-9 * (1.0 + b[k - 2]) && d2 >= 0.5 * d1;
  rep.B = b.back();
  rep.holds = !rep.diverges;
  return rep;
}

// ---------------------------------------------------------------- decay to resolvent

double decay_inverse(const std::function<double(double)>& N, double s) {
  if (!(s > 0.0)) throw DomainError("level must be positive");
  if (N(0.0) <= s) return 0.0;
  double hi = 1.0;
  while (N(hi) > s) {
    hi *= 2.0;
    if (hi > 1e300) throw LimitError("decay function does not reach the level " + fmt(s));
  }
  double lo = hi == 1.0 ? 0.0 : hi / 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (N(mid) <= s)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

ResolventBounds decay_to_resolvent(std::function<double(double)> N, Variant variant, double c) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("decay inversion needs c in (0,1)");
  double prev = N(0.0);
  for (double t : numeric::log_space(1e-3, 1e6, 4)) {
    const double v = N(t);
    if (v > prev * (1.0 + 1e-12) + 1e-300) throw MonotonicityError("decay function is not nonincreasing");
    prev = v;
  }
  ResolventBounds out;
  out.inverse = [N](double s) { return decay_inverse(N, s); };
  out.near_zero = [N, c](double s) {
    const double a = std::abs(s);
    return decay_inverse(N, c * a) + 1.0 / a;
  };
  if (variant == Variant::Both) out.at_infinity = [N, c](double s) { return decay_inverse(N, c / std::abs(s)); };
  return out;
}

}  // namespace sgdecay::rates
