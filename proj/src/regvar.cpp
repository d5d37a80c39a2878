#include "sgdecay/regvar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sgdecay/errors.hpp"

namespace sgdecay::regvar {

namespace {

constexpr double kE = 2.718281828459045;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double checked_exp(double x, const char* what) {
  if (std::isnan(x)) throw DomainError(std::string(what) + ": undefined value");
  if (x > std::log(std::numeric_limits<double>::max()) || x < std::log(std::numeric_limits<double>::min()))
    throw OverflowError(std::string(what) + ": value leaves the floating range");
  return std::exp(x);
}

}  // namespace

struct SlowlyVaryingExpr::Node {
  Kind kind;
  double p = 0.0;
  int k = 0;
  std::shared_ptr<const Node> a, b;
};

SlowlyVaryingExpr::SlowlyVaryingExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {
  domain_start_ = std::max(3.0, std::exp(required_log_start()) * (1.0 + 1e-9));
}

SlowlyVaryingExpr SlowlyVaryingExpr::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("const: value must be positive and finite");
  return SlowlyVaryingExpr(std::make_shared<Node>(Node{Kind::Const, c, 0, nullptr, nullptr}));
}

SlowlyVaryingExpr SlowlyVaryingExpr::log_pow(double beta) {
  if (!std::isfinite(beta)) throw DomainError("logpow: exponent must be finite");
  return SlowlyVaryingExpr(std::make_shared<Node>(Node{Kind::LogPow, beta, 0, nullptr, nullptr}));
}

SlowlyVaryingExpr SlowlyVaryingExpr::exp_log_pow(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("explogpow: exponent must lie in (0,1)");
  return SlowlyVaryingExpr(std::make_shared<Node>(Node{Kind::ExpLogPow, beta, 0, nullptr, nullptr}));
}

SlowlyVaryingExpr SlowlyVaryingExpr::iter_log(int k, double beta) {
  if (k < 2 || k > 6) throw DomainError("iterlog: order must be in [2,6]");
  if (!std::isfinite(beta)) throw DomainError("iterlog: exponent must be finite");
  return SlowlyVaryingExpr(std::make_shared<Node>(Node{Kind::IterLog, beta, k, nullptr, nullptr}));
}

SlowlyVaryingExpr SlowlyVaryingExpr::product(const SlowlyVaryingExpr& x, const SlowlyVaryingExpr& y) {
  return SlowlyVaryingExpr(std::make_shared<Node>(Node{Kind::Product, 0.0, 0, x.node_, y.node_}));
}

SlowlyVaryingExpr SlowlyVaryingExpr::real_power(const SlowlyVaryingExpr& inner, double a) {
  if (!std::isfinite(a)) throw DomainError("pow: exponent must be finite");
  return SlowlyVaryingExpr(std::make_shared<Node>(Node{Kind::RealPower, a, 0, inner.node_, nullptr}));
}

SlowlyVaryingExpr SlowlyVaryingExpr::arg_power(const SlowlyVaryingExpr& inner, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("argpow: exponent must be positive");
  return SlowlyVaryingExpr(std::make_shared<Node>(Node{Kind::ArgPower, a, 0, inner.node_, nullptr}));
}

SlowlyVaryingExpr SlowlyVaryingExpr::with_domain_start(double start) const {
  if (!(start > kE)) throw DomainError("domain start must exceed e");
  if (!(std::log(start) > required_log_start()))
    throw DomainError("domain start " + fmt(start) + " is below what the expression requires");
  SlowlyVaryingExpr out = *this;
  out.domain_start_ = start;
  return out;
}

static double req_u(const std::shared_ptr<const SlowlyVaryingExpr::Node>& n);

double SlowlyVaryingExpr::required_log_start() const { return req_u(node_); }

// smallest u such that all logarithms in the subtree have positive arguments
static double req_u(const std::shared_ptr<const SlowlyVaryingExpr::Node>& n) {
  using K = SlowlyVaryingExpr::Kind;
  switch (n->kind) {
    case K::Const:
      return -std::numeric_limits<double>::infinity();
    case K::LogPow:
    case K::ExpLogPow:
      return 0.0;
    case K::IterLog: {
      double e = 1.0;  // log^{(j)} u > 0 for j < k  <=>  u > E_{k-2}
      for (int j = 0; j < n->k - 2; ++j) e = std::exp(e);
      return e;
    }
    case K::Product:
      return std::max(req_u(n->a), req_u(n->b));
    case K::RealPower:
      return req_u(n->a);
    case K::ArgPower:
      return req_u(n->a) / n->p;
  }
  return 0.0;
}

static double log_at_node(const SlowlyVaryingExpr::Node& n, double u) {
  using K = SlowlyVaryingExpr::Kind;
  switch (n.kind) {
    case K::Const:
      return std::log(n.p);
    case K::LogPow:
      if (!(u > 0.0)) throw DomainError("logpow: log s must be positive");
      return n.p * std::log(u);
    case K::ExpLogPow:
      if (!(u > 0.0)) throw DomainError("explogpow: log s must be positive");
      return std::pow(u, n.p);
    case K::IterLog: {
      double v = u;
      for (int j = 0; j < n.k - 1; ++j) {
        if (!(v > 0.0)) throw DomainError("iterlog: iterated logarithm undefined");
        v = std::log(v);
      }
      if (!(v > 0.0)) throw DomainError("iterlog: iterated logarithm not positive");
      return n.p * std::log(v);
    }
    case K::Product:
      return log_at_node(*n.a, u) + log_at_node(*n.b, u);
    case K::RealPower:
      return n.p * log_at_node(*n.a, u);
    case K::ArgPower:
      return log_at_node(*n.a, n.p * u);
  }
  return 0.0;
}

static double index_node(const SlowlyVaryingExpr::Node& n, double u) {
  using K = SlowlyVaryingExpr::Kind;
  switch (n.kind) {
    case K::Const:
      return 0.0;
    case K::LogPow:
      return n.p / u;
    case K::ExpLogPow:
      return n.p * std::pow(u, n.p - 1.0);
    case K::IterLog: {
      double v = u, chain = 1.0;
      for (int j = 0; j < n.k - 1; ++j) {
        chain /= v;
        v = std::log(v);
      }
      return n.p * chain / v;
    }
    case K::Product:
      return index_node(*n.a, u) + index_node(*n.b, u);
    case K::RealPower:
      return n.p * index_node(*n.a, u);
    case K::ArgPower:
      return n.p * index_node(*n.a, n.p * u);
  }
  return 0.0;
}

static std::string str_node(const SlowlyVaryingExpr::Node& n) {
  using K = SlowlyVaryingExpr::Kind;
  switch (n.kind) {
    case K::Const:
      return "const(" + fmt(n.p) + ")";
    case K::LogPow:
      return "logpow(" + fmt(n.p) + ")";
    case K::ExpLogPow:
      return "explogpow(" + fmt(n.p) + ")";
    case K::IterLog:
      return "iterlog(" + std::to_string(n.k) + ", " + fmt(n.p) + ")";
    case K::Product:
      return "mul(" + str_node(*n.a) + ", " + str_node(*n.b) + ")";
    case K::RealPower:
      return "pow(" + str_node(*n.a) + ", " + fmt(n.p) + ")";
    case K::ArgPower:
      return "argpow(" + str_node(*n.a) + ", " + fmt(n.p) + ")";
  }
  return "";
}

SlowlyVaryingExpr::Kind SlowlyVaryingExpr::kind() const { return node_->kind; }
double SlowlyVaryingExpr::param() const { return node_->p; }
int SlowlyVaryingExpr::order() const { return node_->k; }

SlowlyVaryingExpr SlowlyVaryingExpr::left() const {
  if (node_->kind != Kind::Product) throw DomainError("left(): not a product");
  return SlowlyVaryingExpr(node_->a);
}
SlowlyVaryingExpr SlowlyVaryingExpr::right() const {
  if (node_->kind != Kind::Product) throw DomainError("right(): not a product");
  return SlowlyVaryingExpr(node_->b);
}
SlowlyVaryingExpr SlowlyVaryingExpr::inner() const {
  if (node_->kind != Kind::RealPower && node_->kind != Kind::ArgPower)
    throw DomainError("inner(): not a power node");
  return SlowlyVaryingExpr(node_->a);
}

double SlowlyVaryingExpr::log_at(double u) const { return log_at_node(*node_, u); }
double SlowlyVaryingExpr::index_at(double u) const { return index_node(*node_, u); }

double SlowlyVaryingExpr::log_eval(double s) const {
  if (!(s >= domain_start_)) throw DomainError("argument " + fmt(s) + " below domain start " + fmt(domain_start_));
  return log_at(std::log(s));
}

double SlowlyVaryingExpr::operator()(double s) const { return checked_exp(log_eval(s), "eval"); }

std::string SlowlyVaryingExpr::to_string() const { return str_node(*node_); }

bool SlowlyVaryingExpr::operator==(const SlowlyVaryingExpr& o) const {
  return domain_start_ == o.domain_start_ && to_string() == o.to_string();
}

double eval(const SlowlyVaryingExpr& ell, double s) { return ell(s); }

double RegVarFn::operator()(double s) const {
  return checked_exp(index * std::log(s) + slow.log_eval(s), "regvar eval");
}

// ---------------------------------------------------------------- tails

double find_increasing_tail(const std::function<double(double)>& phi, double u_start) {
  double uc = u_start;
  for (int attempt = 0; attempt < 80; ++attempt) {
    const double lo = std::max(uc, 1e-6);
    const double hi = std::max(lo * 1e4, lo + 50.0);
    bool ok = true;
    for (int n : {64, 256}) {
      const auto grid = numeric::log_space_n(lo, hi, n);
      double prev = phi(grid[0]);
      for (int i = 1; i < n; ++i) {
        const double cur = phi(grid[i]);
        if (!(cur > prev)) {
          uc = grid[i];
          ok = false;
          break;
        }
        prev = cur;
      }
      if (!ok) break;
    }
    if (ok) return lo;
  }
  throw MonotonicityError("no increasing tail found within the search budget");
}

// ---------------------------------------------------------------- closed forms

namespace {

// l = exp(logc) (log s)^b exp(kappa (log s)^beta)
struct Monomial {
  double logc = 0.0, b = 0.0, kappa = 0.0, beta = 0.0;
  bool ok = true;
};

Monomial canonical(const SlowlyVaryingExpr& e) {
  using K = SlowlyVaryingExpr::Kind;
  Monomial m;
  switch (e.kind()) {
    case K::Const:
      m.logc = std::log(e.param());
      return m;
    case K::LogPow:
      m.b = e.param();
      return m;
    case K::ExpLogPow:
      m.kappa = 1.0;
      m.beta = e.param();
      return m;
    case K::IterLog:
      m.ok = false;
      return m;
    case K::Product: {
      const Monomial x = canonical(e.left()), y = canonical(e.right());
      m.ok = x.ok && y.ok;
      m.logc = x.logc + y.logc;
      m.b = x.b + y.b;
      if (x.kappa != 0.0 && y.kappa != 0.0) {
        if (x.beta != y.beta) m.ok = false;
        m.kappa = x.kappa + y.kappa;
        m.beta = x.beta;
      } else {
        m.kappa = x.kappa + y.kappa;
        m.beta = x.kappa != 0.0 ? x.beta : y.beta;
      }
      return m;
    }
    case K::RealPower: {
      m = canonical(e.inner());
      const double a = e.param();
      m.logc *= a;
      m.b *= a;
      m.kappa *= a;
      return m;
    }
    case K::ArgPower: {
      m = canonical(e.inner());
      const double a = e.param();
      m.logc += m.b * std::log(a);
      m.kappa *= std::pow(a, m.beta);
      return m;
    }
  }
  m.ok = false;
  return m;
}

}  // namespace

double ClosedForm::operator()(double s) const { return checked_exp(log_at(std::log(s)), "closed form"); }

std::optional<ClosedForm> closed_form_conjugate(const SlowlyVaryingExpr& ell) {
  const Monomial m = canonical(ell);
  if (!m.ok) return std::nullopt;
  const double logc = m.logc;
  const std::string cfac = logc == 0.0 ? "" : fmt(std::exp(-logc)) + "*";
  if (m.kappa == 0.0) {
    const double b = m.b;
    ClosedForm cf;
    cf.formula = cfac + "(log s)^(" + fmt(-b) + ")";
    cf.log_at = [logc, b](double u) { return -logc - b * std::log(u); };
    return cf;
  }
  const double kappa = m.kappa, beta = m.beta;
  if (m.b != 0.0 || std::abs(std::abs(kappa) - 1.0) > 1e-12 || !(beta < 2.0 / 3.0)) return std::nullopt;
  ClosedForm cf;
  if (beta < 0.5) {
    cf.formula = cfac + "exp(" + fmt(-kappa) + "*(log s)^" + fmt(beta) + ")";
    cf.log_at = [logc, kappa, beta](double u) { return -logc - kappa * std::pow(u, beta); };
  } else {
    cf.formula = cfac + "exp(" + fmt(-kappa) + "*(log s)^" + fmt(beta) + " + " + fmt(beta) + "*(log s)^" +
                 fmt(2 * beta - 1) + ")";
    cf.log_at = [logc, kappa, beta](double u) {
      return -logc - kappa * std::pow(u, beta) + beta * std::pow(u, 2 * beta - 1);
    };
  }
  return cf;
}

// ---------------------------------------------------------------- conjugate

ConjugateFn::ConjugateFn(SlowlyVaryingExpr base, double tail_log_start)
    : base_(std::move(base)), u0_(tail_log_start), closed_(closed_form_conjugate(base_)) {}

double ConjugateFn::tail_start() const { return std::exp(u0_); }

double ConjugateFn::min_argument() const { return std::exp(u0_ + base_.log_at(u0_)); }

double ConjugateFn::log_at(double v) const {
  auto f = [&](double u) { return u + base_.log_at(u) - v; };
  if (f(u0_) > 0.0) throw BracketError("conjugate: argument below the image of the verified tail");
  const double hi = numeric::bracket_up(f, u0_, std::max(1.0, 0.5 * std::abs(u0_)));
  const double u = numeric::bisect_increasing(f, u0_, hi);
  return u - v;
}

double ConjugateFn::operator()(double s) const { return checked_exp(log_at(std::log(s)), "conjugate"); }

ConjugateFn de_bruijn_conjugate(const SlowlyVaryingExpr& ell) {
  const double u0 = find_increasing_tail([&](double u) { return u + ell.log_at(u); },
                                         std::log(ell.domain_start()));
  return ConjugateFn(ell, u0);
}

// ---------------------------------------------------------------- inverse

namespace {

SlowlyVaryingExpr rescaled_slow(const RegVarFn& f) {
  if (!(f.index > 0.0)) throw DomainError("asymptotic inverse needs a positive index");
  const double start = std::max(3.0, std::exp(std::log(f.slow.domain_start()) * f.index) * (1.0 + 1e-12));
  auto m = SlowlyVaryingExpr::arg_power(f.slow, 1.0 / f.index);
  return m.with_domain_start(std::max(start, m.domain_start()));
}

}  // namespace

AsymptoticInverse::AsymptoticInverse(const RegVarFn& f)
    : f_(f),
      u0_(find_increasing_tail([&](double u) { return f.log_at(u); }, std::log(f.slow.domain_start()))),
      conj_(de_bruijn_conjugate(rescaled_slow(f))) {}

double AsymptoticInverse::tail_start() const { return std::exp(u0_); }

double AsymptoticInverse::log_at(double ly) const {
  auto g = [&](double u) { return f_.log_at(u) - ly; };
  if (g(u0_) > 0.0) throw BracketError("inverse: target below f(tail_start)");
  const double hi = numeric::bracket_up(g, u0_, std::max(1.0, 0.5 * std::abs(u0_)));
  return numeric::bisect_increasing(g, u0_, hi);
}

double AsymptoticInverse::operator()(double y) const { return checked_exp(log_at(std::log(y)), "inverse"); }

double AsymptoticInverse::asymptotic(double y) const {
  const double ly = std::log(y);
  const double lk = conj_.closed_form() ? conj_.closed_form()->log_at(ly) : conj_.log_at(ly);
  return checked_exp((ly + lk) / f_.index, "asymptotic inverse");
}

std::string AsymptoticInverse::asymptotic_formula() const {
  const std::string k = conj_.closed_form() ? conj_.closed_form()->formula : std::string("k#(s) (numeric)");
  return "s^(1/" + fmt(f_.index) + ") * [" + k + "]^(1/" + fmt(f_.index) + ")";
}

AsymptoticInverse::Consistency AsymptoticInverse::consistency(const std::vector<double>& y_grid, double tol) const {
  Consistency c;
  std::vector<double> dev;
  for (double y : y_grid) {
    const double r = (*this)(y) / asymptotic(y);
    c.y.push_back(y);
    c.ratio.push_back(r);
    dev.push_back(std::abs(r - 1.0));
  }
  c.verdict = numeric::assess_convergence(c.y, dev, tol);
  return c;
}

AsymptoticInverse asymptotic_inverse(const RegVarFn& f) { return AsymptoticInverse(f); }

// ---------------------------------------------------------------- audits

RatioAudit slow_variation_audit(const SlowlyVaryingExpr& ell, const std::vector<double>& lambdas,
                                const std::vector<double>& s_grid, double tol) {
  RatioAudit a;
  for (double s : s_grid) {
    const double ls = ell.log_eval(s);
    double worst = 0.0;
    for (double lam : lambdas) {
      if (!(lam > 0.0)) throw DomainError("slow variation audit: lambda must be positive");
      const double r = std::exp(ell.log_eval(lam * s) - ls);
      worst = std::max(worst, std::abs(r - 1.0));
    }
    a.s.push_back(s);
    a.deviation.push_back(worst);
  }
  a.verdict = numeric::assess_convergence(a.s, a.deviation, tol);
  a.pass = a.verdict.pass;
  return a;
}

RatioAudit db_symmetry_audit(const SlowlyVaryingExpr& ell, const std::vector<double>& s_grid, double tol) {
  bool up = true, down = true;
  for (double s : s_grid) {
    const double d = ell.index_at(std::log(s));
    if (d < -1e-15) up = false;
    if (d > 1e-15) down = false;
  }
  if (!up && !down) throw MonotonicityError("dB-symmetry audit needs a monotone slowly varying function");
  RatioAudit a;
  for (double s : s_grid) {
    const double u = std::log(s);
    const double lu = ell.log_eval(s);
    if (u + lu < std::log(ell.domain_start())) throw DomainError("s l(s) falls below the domain start");
    const double r = std::exp(ell.log_at(u + lu) - lu);
    a.s.push_back(s);
    a.deviation.push_back(std::abs(r - 1.0));
  }
  a.verdict = numeric::assess_convergence(a.s, a.deviation, tol);
  a.pass = a.verdict.pass;
  return a;
}

namespace {

// smallest s on a long tail beyond which pred(u) holds at every sample
double eventually(const SlowlyVaryingExpr& ell, const std::function<bool(double)>& pred) {
  const double u0 = std::log(ell.domain_start());
  const auto grid = numeric::log_space_n(u0, std::max(u0 * 1e4, 1e5), 4000);
  int last_fail = -1;
  for (int i = 0; i < static_cast<int>(grid.size()); ++i)
    if (!pred(grid[i])) last_fail = i;
  if (last_fail == static_cast<int>(grid.size()) - 1) return 0.0;
  const double u = grid[last_fail + 1];
  return u > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(u);
}

}  // namespace

PotterReport potter_bounds_audit(const SlowlyVaryingExpr& ell, double gamma, const std::vector<double>& s_grid) {
  if (!(gamma > 0.0)) throw DomainError("Potter audit: gamma must be positive");
  PotterReport r;
  r.c = std::numeric_limits<double>::infinity();
  r.C = 0.0;
  std::vector<double> lv;
  for (double s : s_grid) lv.push_back(ell.log_eval(s));
  for (std::size_t i = 0; i < s_grid.size(); ++i)
    for (std::size_t j = i; j < s_grid.size(); ++j) {
      const double lr = lv[j] - lv[i];
      const double lq = std::log(s_grid[j] / s_grid[i]);
      r.c = std::min(r.c, std::exp(lr + gamma * lq));
      r.C = std::max(r.C, std::exp(lr - gamma * lq));
    }
  r.increasing_from = eventually(ell, [&](double u) { return gamma + ell.index_at(u) > 0.0; });
  r.decreasing_from = eventually(ell, [&](double u) { return -gamma + ell.index_at(u) < 0.0; });
  r.pass = r.c > 0.0 && std::isfinite(r.C) && r.increasing_from > 0.0 && r.decreasing_from > 0.0;
  return r;
}

LogPerturbationReport log_perturbation_audit(const RegVarFn& f, double delta, const std::vector<double>& s_grid) {
  const double a = f.index;
  if (!(a > 0.0)) throw PreconditionError("log perturbation: index must be positive");
  bool increasing = true;
  for (double s : s_grid)
    if (f.slow.index_at(std::log(s)) < -1e-15) increasing = false;
  const bool at_edge = std::abs(delta - 1.0 / a) <= 1e-12 * std::max(1.0, 1.0 / a);
  if (!(delta > 1.0 / a && !at_edge) && !(at_edge && increasing))
    throw PreconditionError("log perturbation: needs delta > 1/alpha, or delta = 1/alpha with increasing l");
  const RegVarFn flog{a, SlowlyVaryingExpr::product(f.slow, SlowlyVaryingExpr::log_pow(1.0))
                             .with_domain_start(f.slow.domain_start())};
  const AsymptoticInverse inv(f), inv_log(flog);
  LogPerturbationReport r;
  std::vector<double> lx, ly;
  for (double s : s_grid) {
    const double ls = std::log(s);
    const double q = std::exp(inv.log_at(ls) - inv_log.log_at(ls) - delta * std::log(ls));
    r.s.push_back(s);
    r.ratio.push_back(q);
    r.C = std::max(r.C, q);
  }
  const auto dm = numeric::decade_maxima(r.s, r.ratio);
  const std::size_t n = dm.max.size();
  for (std::size_t k = n >= 3 ? n - 3 : 0; k < n; ++k) {
    lx.push_back(std::log(std::log(dm.center[k])));
    ly.push_back(std::log(dm.max[k]));
  }
  const double growth = lx.size() >= 2 ? numeric::ols_slope(lx, ly) : 0.0;
  r.bounded_trend = growth <= 0.1;
  r.pass = std::isfinite(r.C) && r.bounded_trend;
  return r;
}

}  // namespace sgdecay::regvar
