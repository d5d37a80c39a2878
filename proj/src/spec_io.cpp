#include "sgdecay/spec_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sgdecay/errors.hpp"

namespace sgdecay::spec_io {

using nlohmann::json;
using regvar::SlowlyVaryingExpr;

// ---------------------------------------------------------------- expressions

namespace {

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  SlowlyVaryingExpr parse() {
    auto e = expr();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw SpecError("expression '" + s_ + "': " + what + " at offset " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string ident() {
    skip();
    const std::size_t b = pos_;
    while (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (b == pos_) fail("expected a function name");
    return s_.substr(b, pos_ - b);
  }
  double number() {
    skip();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(v)) fail("expected a finite number");
    pos_ += end - begin;
    return v;
  }
  SlowlyVaryingExpr expr() {
    const std::string f = ident();
    expect('(');
    SlowlyVaryingExpr out = SlowlyVaryingExpr::constant(1.0);
    try {
      if (f == "const") {
        out = SlowlyVaryingExpr::constant(number());
      } else if (f == "logpow") {
        out = SlowlyVaryingExpr::log_pow(number());
      } else if (f == "explogpow") {
        out = SlowlyVaryingExpr::exp_log_pow(number());
      } else if (f == "iterlog") {
        const double k = number();
        expect(',');
        const double b = number();
        if (k != std::floor(k) || k < 2 || k > 8) fail("iterlog order must be an integer in [2, 8]");
        out = SlowlyVaryingExpr::iter_log(int(k), b);
      } else if (f == "mul") {
        const auto a = expr();
        expect(',');
        out = SlowlyVaryingExpr::product(a, expr());
      } else if (f == "pow" || f == "argpow") {
        const auto a = expr();
        expect(',');
        const double p = number();
        out = f == "pow" ? SlowlyVaryingExpr::real_power(a, p) : SlowlyVaryingExpr::arg_power(a, p);
      } else {
        fail("unknown function '" + f + "'");
      }
    } catch (const SpecError&) {
      throw;
    } catch (const Error& e) {
      fail(e.what());
    }
    expect(')');
    return out;
  }
};

// ---------------------------------------------------------------- json helpers

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw SpecError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw SpecError(where + ": unknown key '" + k + "'");
}

double num(const json& j, const std::string& key, double dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) throw SpecError(where + "." + key + " must be a number");
  return j[key].get<double>();
}

std::optional<double> opt_num(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  return num(j, key, 0.0, where);
}

std::string str(const json& j, const std::string& key, const std::string& dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_string()) throw SpecError(where + "." + key + " must be a string");
  return j[key].get<std::string>();
}

std::optional<std::string> opt_str(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  return str(j, key, "", where);
}

bool boolean(const json& j, const std::string& key, bool dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_boolean()) throw SpecError(where + "." + key + " must be a boolean");
  return j[key].get<bool>();
}

std::pair<double, double> range(const json& j, const std::string& key, std::pair<double, double> dflt,
                                const std::string& where) {
  if (!j.contains(key)) return dflt;
  const auto& r = j[key];
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
    throw SpecError(where + "." + key + " must be [lo, hi]");
  return {r[0].get<double>(), r[1].get<double>()};
}

const json& required(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw SpecError(where + ": missing required key '" + key + "'");
  return j[key];
}

ModelSpec parse_model(const json& j) {
  const std::string w = "model";
  ModelSpec m;
  if (!j.is_object()) throw SpecError("model must be an object");
  m.variant = str(j, "variant", "catalogue", w);
  if (m.variant == "catalogue") {
    check_keys(j, {"variant", "name"}, w);
    if (!required(j, "name", w).is_string()) throw SpecError("model.name must be a string");
    m.name = j["name"].get<std::string>();
  } else if (m.variant == "curve") {
    check_keys(j, {"variant", "name", "primitive", "params", "s0", "symmetric"}, w);
    m.name = str(j, "name", "curve", w);
    if (!required(j, "primitive", w).is_string()) throw SpecError("model.primitive must be a string");
    m.primitive = j["primitive"].get<std::string>();
    const auto& p = required(j, "params", w);
    if (!p.is_array()) throw SpecError("model.params must be an array");
    for (const auto& x : p) {
      if (!x.is_number()) throw SpecError("model.params must hold numbers");
      m.params.push_back(x.get<double>());
    }
    m.s0 = num(j, "s0", 0.0, w);
    m.symmetric = boolean(j, "symmetric", true, w);
  } else if (m.variant == "diagonal") {
    check_keys(j, {"variant", "name", "eigenvalues"}, w);
    m.name = str(j, "name", "diagonal", w);
    const auto& e = required(j, "eigenvalues", w);
    if (!e.is_array() || e.empty()) throw SpecError("model.eigenvalues must be a nonempty array");
    for (const auto& x : e) {
      if (x.is_number())
        m.eigenvalues.emplace_back(x.get<double>(), 0.0);
      else if (x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number())
        m.eigenvalues.emplace_back(x[0].get<double>(), x[1].get<double>());
      else
        throw SpecError("model.eigenvalues entries must be numbers or [re, im]");
    }
  } else {
    throw SpecError("model.variant must be catalogue, curve or diagonal");
  }
  return m;
}

json model_json(const ModelSpec& m) {
  json j{{"variant", m.variant}, {"name", m.name}};
  if (m.variant == "curve") {
    j["primitive"] = m.primitive;
    j["params"] = m.params;
    j["s0"] = m.s0;
    j["symmetric"] = m.symmetric;
  } else if (m.variant == "diagonal") {
    auto e = json::array();
    for (const auto& z : m.eigenvalues) e.push_back({z.real(), z.imag()});
    j["eigenvalues"] = e;
  }
  return j;
}

ObservableSpec parse_observable(const json& j) {
  const std::string w = "observable";
  check_keys(j, {"kind", "alpha", "beta", "ell"}, w);
  ObservableSpec o;
  o.kind = str(j, "kind", "InvA", w);
  o.alpha = num(j, "alpha", 0.0, w);
  o.beta = num(j, "beta", 0.0, w);
  o.ell = opt_str(j, "ell", w);
  return o;
}

json observable_json(const ObservableSpec& o) {
  json j{{"kind", o.kind}, {"alpha", o.alpha}, {"beta", o.beta}};
  if (o.ell) j["ell"] = *o.ell;
  return j;
}

RegimeSpec parse_regime(const json& j) {
  const std::string w = "regime";
  check_keys(j, {"regime", "alpha", "beta", "epsilon", "ell", "db_symmetric_form", "c", "c_prime", "C", "C_prime"},
             w);
  RegimeSpec r;
  if (!required(j, "regime", w).is_string()) throw SpecError("regime.regime must be a string");
  r.regime = j["regime"].get<std::string>();
  r.alpha = num(j, "alpha", 1.0, w);
  r.beta = num(j, "beta", 0.0, w);
  r.epsilon = num(j, "epsilon", 0.1, w);
  r.ell = opt_str(j, "ell", w);
  r.db_symmetric_form = boolean(j, "db_symmetric_form", false, w);
  r.c = num(j, "c", 1.0, w);
  r.c_prime = num(j, "c_prime", 1.0, w);
  r.C = num(j, "C", 1.0, w);
  r.C_prime = num(j, "C_prime", 1.0, w);
  return r;
}

json regime_json(const RegimeSpec& r) {
  json j{{"regime", r.regime}, {"alpha", r.alpha},  {"beta", r.beta}, {"epsilon", r.epsilon},
         {"db_symmetric_form", r.db_symmetric_form}, {"c", r.c}, {"c_prime", r.c_prime},
         {"C", r.C},           {"C_prime", r.C_prime}};
  if (r.ell) j["ell"] = *r.ell;
  return j;
}

ReferenceSpec parse_reference(const json& j) {
  const std::string w = "reference";
  check_keys(j, {"kind", "a", "b", "scale"}, w);
  ReferenceSpec r;
  r.kind = str(j, "kind", "power", w);
  r.a = num(j, "a", 1.0, w);
  r.b = num(j, "b", 0.0, w);
  r.scale = num(j, "scale", 1.0, w);
  return r;
}

}  // namespace

SlowlyVaryingExpr parse_expr(const std::string& text) { return ExprParser(text).parse(); }

// ---------------------------------------------------------------- builders

opmodel::SpectralModel build_model(const ModelSpec& m) {
  try {
    if (m.variant == "catalogue") return opmodel::SpectralModel::catalogue(m.name);
    if (m.variant == "diagonal") return opmodel::SpectralModel::diagonal(m.eigenvalues, m.name);
    if (m.variant == "curve") {
      const auto& p = m.params;
      if (m.primitive == "power_law") {
        if (p.size() != 4) throw SpecError("power_law takes params [c, shift, p, q]");
        return opmodel::SpectralModel::curve(opmodel::Curve::power_law(p[0], p[1], p[2], p[3], m.s0, m.symmetric),
                                             m.name);
      }
      if (m.primitive == "zero_singular") {
        if (p.size() != 2) throw SpecError("zero_singular takes params [alpha0, alpha_inf]");
        return opmodel::SpectralModel::curve(opmodel::Curve::zero_singular(p[0], p[1]), m.name);
      }
      throw SpecError("unknown curve primitive '" + m.primitive + "'");
    }
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    throw SpecError(std::string("model: ") + e.what());
  }
  throw SpecError("unknown model variant '" + m.variant + "'");
}

opmodel::Observable build_observable(const ObservableSpec& o) {
  using opmodel::Observable;
  auto need_ell = [&]() {
    if (!o.ell) throw SpecError("observable " + o.kind + " needs 'ell'");
    return parse_expr(*o.ell);
  };
  try {
    if (o.kind == "InvA") return Observable::inv_a();
    if (o.kind == "BofA") return Observable::b_of_a();
    if (o.kind == "AIA2") return Observable::aia2();
    if (o.kind == "FracComb") return Observable::frac_comb(o.alpha, o.beta);
    if (o.kind == "PowBofA") return Observable::pow_b_of_a(o.alpha);
    if (o.kind == "Wop") return Observable::w_op(o.alpha, o.beta, need_ell());
    if (o.kind == "Vop") return Observable::v_op(o.alpha, o.beta, need_ell());
    if (o.kind == "Identity") return Observable::identity();
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    throw SpecError(std::string("observable: ") + e.what());
  }
  throw SpecError("unknown observable kind '" + o.kind + "'");
}

rates::RateRegime build_regime(const RegimeSpec& r) {
  rates::RateRegime out;
  out.regime = rates::regime_from_name(r.regime);
  out.alpha = r.alpha;
  out.beta = r.beta;
  out.epsilon = r.epsilon;
  if (r.ell) out.ell = parse_expr(*r.ell);
  out.db_symmetric_form = r.db_symmetric_form;
  out.c = r.c;
  out.c_prime = r.c_prime;
  out.C = r.C;
  out.C_prime = r.C_prime;
  return out;
}

rates::RateEnvelope build_reference(const ReferenceSpec& r) {
  if (!(r.scale > 0.0)) throw SpecError("reference.scale must be positive");
  rates::RateEnvelope e;
  const double a = r.a, b = r.b, C = r.scale;
  if (r.kind == "power") {
    e.fn = [a, C](double t) { return C * std::pow(t, -a); };
    e.provenance = "reference: scale t^-a";
  } else if (r.kind == "exp_sqrt") {
    e.fn = [a, C](double t) { return C * std::exp(-a * std::sqrt(t)); };
    e.provenance = "reference: scale exp(-a sqrt(t))";
  } else if (r.kind == "log_power") {
    e.fn = [a, b, C](double t) { return C * std::pow(t, -a) * std::pow(std::log(t), b); };
    e.provenance = "reference: scale t^-a (log t)^b";
    e.validity_start = M_E;
  } else {
    throw SpecError("unknown reference kind '" + r.kind + "'");
  }
  return e;
}

rates::ProfileInputs model_profiles(const opmodel::SpectralModel& m) {
  using opmodel::ProfileKind;
  using rates::Profile;
  auto view = [&](ProfileKind k) {
    auto p = std::make_shared<opmodel::ResolventProfile>(m, k);
    return [p](double s) { return (*p)(s); };
  };
  rates::ProfileInputs in;
  if (m.contains_zero()) {
    in.M = Profile::increasing(view(ProfileKind::M2), 1.0);
    in.Mlog = in.M->log_corrected();
    in.m = Profile::decreasing(view(ProfileKind::m2), 1.0);
    in.mlog = Profile::decreasing(view(ProfileKind::mlog), 1.0);
  } else {
    in.M = Profile::increasing(view(ProfileKind::Mcap), 0.0);
    in.Mlog = Profile::increasing(view(ProfileKind::Mlog), 0.0);
  }
  return in;
}

// ---------------------------------------------------------------- experiment specs

ExperimentSpec parse_spec(const json& j) {
  const std::string w = "spec";
  check_keys(j, {"version", "name", "model", "observable", "regime", "reference", "grid", "window", "tolerances",
                 "seed", "outputs"},
             w);
  ExperimentSpec s;
  s.version = str(j, "version", "", w);
  if (s.version != kSchemaVersion)
    throw SpecError("unsupported spec version '" + s.version + "', expected " + kSchemaVersion);
  s.name = str(j, "name", "", w);
  s.model = parse_model(required(j, "model", w));
  s.observable = parse_observable(required(j, "observable", w));
  if (j.contains("regime")) s.regime = parse_regime(j["regime"]);
  if (j.contains("reference")) s.reference = parse_reference(j["reference"]);
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, {"t_range", "points_per_decade", "s_range"}, "grid");
    std::tie(s.t_lo, s.t_hi) = range(g, "t_range", {s.t_lo, s.t_hi}, "grid");
    std::tie(s.s_lo, s.s_hi) = range(g, "s_range", {s.s_lo, s.s_hi}, "grid");
    if (g.contains("points_per_decade")) {
      if (!g["points_per_decade"].is_number_integer()) throw SpecError("grid.points_per_decade must be an integer");
      s.points_per_decade = g["points_per_decade"].get<int>();
    }
  }
  if (j.contains("window")) {
    const auto [lo, hi] = range(j, "window", {0, 0}, w);
    s.window_lo = lo;
    s.window_hi = hi;
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    const std::string tw = "tolerances";
    check_keys(t, {"slope", "slope_expected", "max_band", "band_lo", "band_hi"}, tw);
    s.slope_tol = num(t, "slope", s.slope_tol, tw);
    s.slope_expected = opt_num(t, "slope_expected", tw);
    s.max_band = num(t, "max_band", s.max_band, tw);
    s.band_lo = opt_num(t, "band_lo", tw);
    s.band_hi = opt_num(t, "band_hi", tw);
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw SpecError("seed must be a nonnegative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("outputs")) {
    const auto& o = j["outputs"];
    check_keys(o, {"csv", "json"}, "outputs");
    s.csv_out = opt_str(o, "csv", "outputs");
    s.json_out = opt_str(o, "json", "outputs");
  }

  if (!(s.t_lo > 0.0 && s.t_hi > s.t_lo)) throw SpecError("grid.t_range must satisfy 0 < lo < hi");
  if (!(s.s_lo > 0.0 && s.s_hi > s.s_lo)) throw SpecError("grid.s_range must satisfy 0 < lo < hi");
  if (s.points_per_decade < 1) throw SpecError("grid.points_per_decade must be positive");
  if (s.window_lo && !(*s.window_lo > 0.0 && *s.window_hi > *s.window_lo))
    throw SpecError("window must satisfy 0 < lo < hi");
  if (!(s.slope_tol > 0.0)) throw SpecError("tolerances.slope must be positive");
  // resolve every reference now so that bad names fail as schema errors
  build_model(s.model);
  build_observable(s.observable);
  if (s.regime) build_regime(*s.regime);
  if (s.reference) build_reference(*s.reference);
  return s;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot read spec file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SpecError("spec file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_spec(j);
}

json to_json(const ExperimentSpec& s) {
  json j;
  j["version"] = s.version;
  j["name"] = s.name;
  j["model"] = model_json(s.model);
  j["observable"] = observable_json(s.observable);
  if (s.regime) j["regime"] = regime_json(*s.regime);
  if (s.reference)
    j["reference"] = {{"kind", s.reference->kind}, {"a", s.reference->a}, {"b", s.reference->b},
                      {"scale", s.reference->scale}};
  j["grid"] = {{"t_range", {s.t_lo, s.t_hi}}, {"points_per_decade", s.points_per_decade}, {"s_range", {s.s_lo, s.s_hi}}};
  if (s.window_lo) j["window"] = {*s.window_lo, *s.window_hi};
  json t{{"slope", s.slope_tol}, {"max_band", s.max_band}};
  if (s.slope_expected) t["slope_expected"] = *s.slope_expected;
  if (s.band_lo) t["band_lo"] = *s.band_lo;
  if (s.band_hi) t["band_hi"] = *s.band_hi;
  j["tolerances"] = t;
  j["seed"] = s.seed;
  json o = json::object();
  if (s.csv_out) o["csv"] = *s.csv_out;
  if (s.json_out) o["json"] = *s.json_out;
  if (!o.empty()) j["outputs"] = o;
  return j;
}

bool ExperimentSpec::operator==(const ExperimentSpec& o) const { return to_json(*this) == to_json(o); }

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SpecError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw SpecError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw SpecError("cannot move output into place at '" + path + "': " + ec.message());
  }
}

}  // namespace sgdecay::spec_io
