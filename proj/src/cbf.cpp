#include "sgdecay/cbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sgdecay/errors.hpp"

namespace sgdecay::cbf {

// ---------------------------------------------------------------- distribution

Distribution Distribution::atoms(std::vector<Atom> list) {
  for (const auto& a : list)
    if (!(a.s > 0.0) || !(a.w >= 0.0) || !std::isfinite(a.s) || !std::isfinite(a.w))
      throw IntegrabilityError("atoms need positive locations and nonnegative masses");
  Distribution d;
  d.kind_ = Kind::Atoms;
  d.atoms_ = std::move(list);
  return d;
}

Distribution Distribution::regvar(const regvar::RegVarFn& g, double scale, End end) {
  if (!(g.index >= 0.0 && g.index < 1.0))
    throw IntegrabilityError("distribution index must lie in [0,1) for the integrability certificate");
  if (end == End::Zero && !(g.index > 0.0)) throw IntegrabilityError("near-zero distribution needs positive index");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw IntegrabilityError("distribution scale must be positive");
  Distribution d;
  d.kind_ = Kind::RegVar;
  d.rv_ = g;
  d.scale_ = scale;
  d.end_ = end;
  return d;
}

double Distribution::kink() const {
  const double la = std::log(rv_->slow.domain_start());
  return end_ == End::Infinity ? la : -la;
}

double Distribution::log_value_at(double u) const {
  const double p = rv_->index;
  const double ls = std::log(scale_);
  const double k = kink();
  if (end_ == End::Infinity) {
    if (u >= k) return ls + p * u + rv_->slow.log_at(u);
    const double q = p > 0.0 ? p : 1.0;
    return ls + p * k + rv_->slow.log_at(k) + q * (u - k);
  }
  if (u <= k) return ls + p * u + rv_->slow.log_at(-u);
  return ls + p * u + rv_->slow.log_at(-k);
}

double Distribution::index_at(double u) const {
  const double p = rv_->index;
  const double k = kink();
  if (end_ == End::Infinity) return u >= k ? p + rv_->slow.index_at(u) : (p > 0.0 ? p : 1.0);
  return u <= k ? p - rv_->slow.index_at(-u) : p;
}

double Distribution::value(double s) const {
  switch (kind_) {
    case Kind::None:
      return 0.0;
    case Kind::Atoms: {
      double v = 0.0;
      for (const auto& a : atoms_)
        if (a.s <= s) v += a.w;
      return v;
    }
    case Kind::RegVar:
      return s > 0.0 ? std::exp(log_value_at(std::log(s))) : 0.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------- quadrature

namespace {

// int_0^inf g(s)/(s+lambda)^2 ds, the density form of int dg(s)/(s+lambda)
cplx density_integral(const Distribution& g, cplx lambda, const QuadratureConfig& cfg) {
  const double r = std::abs(lambda);
  const double phi = std::arg(lambda);
  const double K = 2.0 / (1.0 + std::cos(phi));  // |s+l|^2 >= (s+r)^2 / K
  const double lr = std::log(r);
  const double scale_ref = std::exp(g.log_value_at(lr) - lr);

  auto lower_bound = [&](double u) { return K * std::exp(g.log_value_at(u) + u - 2.0 * lr); };
  auto upper_bound = [&](double u) {
    double eps = 0.0;
    for (double v = u; v <= u + 200.0; v += 10.0) eps = std::max(eps, g.index_at(v));
    if (!(eps < 1.0)) return std::numeric_limits<double>::infinity();
    return K * std::exp(g.log_value_at(u) - u) / (1.0 - eps);
  };

  double u_lo = lr - 4.0, u_hi = lr + 4.0;
  for (int i = 0; lower_bound(u_lo) > cfg.tail_tol * scale_ref; ++i) {
    if (i > 400) throw IntegrabilityError("lower truncation could not be certified");
    u_lo -= 2.0;
  }
  for (int i = 0; upper_bound(u_hi) > cfg.tail_tol * scale_ref; ++i) {
    if (i > 400) throw IntegrabilityError("upper truncation could not be certified");
    u_hi += 2.0;
  }

  auto h = [&](double u) -> cplx {
    const double w = std::exp(u);
    const cplx d = w + lambda;
    return std::exp(g.log_value_at(u) + u) / (d * d);
  };

  std::vector<double> cuts{u_lo, lr, u_hi};
  const double k = g.kink();
  if (k > u_lo && k < u_hi) cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  cplx total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(h, cuts[i], cuts[i + 1], cfg.max_depth,
                                                                           cfg.rel_tol, &err);
  }
  return total;
}

void check_slit(cplx lambda) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
    throw DomainError("lambda must be finite");
  if (lambda.imag() == 0.0 && lambda.real() <= 0.0) throw DomainError("lambda lies on the cut (-inf, 0]");
}

}  // namespace

SpecialFn::SpecialFn(Kind kind, StieltjesTriple triple, QuadratureConfig cfg)
    : kind_(kind), triple_(std::move(triple)), cfg_(cfg) {
  if (!(triple_.a >= 0.0) || !(triple_.b >= 0.0)) throw IntegrabilityError("triple needs a, b >= 0");
}

bool SpecialFn::is_zero() const {
  if (triple_.a != 0.0 || triple_.b != 0.0) return false;
  switch (triple_.g.kind()) {
    case Distribution::Kind::None:
      return true;
    case Distribution::Kind::Atoms:
      return std::all_of(triple_.g.atom_list().begin(), triple_.g.atom_list().end(),
                         [](const Atom& a) { return a.w == 0.0; });
    case Distribution::Kind::RegVar:
      return false;
  }
  return true;
}

cplx SpecialFn::measure_part(cplx lambda) const {
  check_slit(lambda);
  const auto& g = triple_.g;
  switch (g.kind()) {
    case Distribution::Kind::None:
      return 0.0;
    case Distribution::Kind::Atoms: {
      cplx v = 0.0;
      for (const auto& a : g.atom_list()) v += a.w / (a.s + lambda);
      return v;
    }
    case Distribution::Kind::RegVar:
      return density_integral(g, lambda, cfg_);
  }
  return 0.0;
}

cplx SpecialFn::operator()(cplx lambda) const {
  const cplx m = measure_part(lambda);
  if (kind_ == Kind::Stieltjes) return triple_.a / lambda + triple_.b + m;
  return triple_.a + triple_.b * lambda + lambda * m;
}

double SpecialFn::operator()(double lambda) const { return (*this)(cplx(lambda)).real(); }

cplx eval_special(const SpecialFn& fn, cplx lambda) { return fn(lambda); }

// ---------------------------------------------------------------- f_g, f_m

cplx FgFm::fg(cplx lambda) const {
  check_slit(lambda);
  return stieltjes(1.0 / lambda);
}

cplx FgFm::fm(cplx lambda) const {
  const cplx f = fg(lambda);
  return f / (1.0 + f);
}

FgFm make_fg_fm(const Distribution& g) {
  return FgFm{SpecialFn(Kind::Stieltjes, StieltjesTriple{0.0, 0.0, g})};
}

// ---------------------------------------------------------------- audits

KaramataReport karamata_audit(const regvar::RegVarFn& g, End end, const std::vector<double>& lambda_grid,
                              double tol) {
  const double sigma = 1.0 - g.index;
  if (!(sigma > 0.0 && sigma <= 1.0)) throw IntegrabilityError("Karamata audit needs index 1 - sigma in [0,1)");
  const auto dist = Distribution::regvar(g, 1.0, end);
  // the distribution must be increasing on the sampled region
  for (double l : lambda_grid)
    if (dist.index_at(std::log(l)) < 0.0) throw PreconditionError("distribution is not increasing on the grid");
  const SpecialFn S(Kind::Stieltjes, StieltjesTriple{0.0, 0.0, dist});
  KaramataReport rep;
  rep.constant = std::tgamma(sigma) * std::tgamma(2.0 - sigma);
  std::vector<double> x, dev;
  for (double l : lambda_grid) {
    // slow factor of the distribution itself, so grids may start below the domain start
    const double slow = std::exp(dist.log_value_at(std::log(l)) - g.index * std::log(l));
    const double r = S(l) * std::pow(l, sigma) / (rep.constant * slow);
    rep.lambda.push_back(l);
    rep.ratio.push_back(r);
    x.push_back(end == End::Infinity ? l : 1.0 / l);
    dev.push_back(std::abs(r - 1.0));
  }
  rep.verdict = numeric::assess_convergence(x, dev, tol);
  rep.pass = rep.verdict.pass;
  return rep;
}

SectorReport sector_domination_audit(const SpecialFn& fn, const std::vector<double>& phi_grid,
                                     const std::vector<double>& r_grid) {
  if (fn.triple().a != 0.0 || fn.triple().b != 0.0)
    throw PreconditionError("sector domination needs the representation (0,0,mu)");
  SectorReport rep;
  constexpr double kSlack = 1e-9;
  for (double r : r_grid) {
    const double base = fn(r);
    for (double phi : phi_grid) {
      if (std::abs(phi) > M_PI - 0.05) {
        ++rep.skipped;
        continue;
      }
      const double c = std::sqrt((1.0 + std::cos(phi)) / 2.0);
      const double v = std::abs(fn(std::polar(r, phi)));
      const double lower = c * base, upper = base / c;
      ++rep.checked;
      if (v > 0.0) {
        rep.worst_lower = std::max(rep.worst_lower, lower / v);
        rep.worst_upper = std::max(rep.worst_upper, v / upper);
      }
      if (v < lower * (1.0 - kSlack) || v > upper * (1.0 + kSlack)) ++rep.violations;
    }
  }
  rep.pass = rep.violations == 0 && rep.checked > 0;
  return rep;
}

TransformedFn duality_transform(const SpecialFn& fn, Duality which) {
  if (fn.is_zero()) throw ZeroFunctionError("duality transform of the zero function");
  const bool cbf = fn.kind() == Kind::CompleteBernstein;
  TransformedFn out;
  switch (which) {
    case Duality::Reciprocal:
      out.claimed = cbf ? Kind::Stieltjes : Kind::CompleteBernstein;
      out.value = [fn](cplx l) { return 1.0 / fn(l); };
      break;
    case Duality::TimesLambda:
      if (cbf) throw PreconditionError("lambda h(lambda) is defined for Stieltjes h");
      out.claimed = Kind::CompleteBernstein;
      out.value = [fn](cplx l) { return l * fn(l); };
      break;
    case Duality::OverLambda:
      if (!cbf) throw PreconditionError("f(lambda)/lambda is defined for complete Bernstein f");
      out.claimed = Kind::Stieltjes;
      out.value = [fn](cplx l) { return fn(l) / l; };
      break;
    case Duality::LambdaAtInverse:
      if (!cbf) throw PreconditionError("lambda f(1/lambda) is defined for complete Bernstein f");
      out.claimed = Kind::CompleteBernstein;
      out.value = [fn](cplx l) { return l * fn(1.0 / l); };
      break;
  }
  const auto grid = numeric::log_space(1e-6, 1e6, 4);
  bool ok = true;
  double prev = out(grid.front());
  if (!(prev >= 0.0)) ok = false;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = out(grid[i]);
    const double slack = 1e-9 * std::max(std::abs(v), std::abs(prev));
    if (!(v >= 0.0)) ok = false;
    if (out.claimed == Kind::Stieltjes && v > prev + slack) ok = false;
    if (out.claimed == Kind::CompleteBernstein && v < prev - slack) ok = false;
    prev = v;
  }
  out.audit_pass = ok;
  return out;
}

}  // namespace sgdecay::cbf
