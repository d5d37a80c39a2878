// sgdecay command-line front end.
// Exit codes: 0 pass, 1 comparison or audit failure, 2 input/schema error, 3 runtime/convergence error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sgdecay/cbf.hpp"
#include "sgdecay/errors.hpp"
#include "sgdecay/harness.hpp"
#include "sgdecay/rates.hpp"
#include "sgdecay/regvar.hpp"
#include "sgdecay/spec_io.hpp"

using namespace sgdecay;
using harness::format_double;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kInput = 2, kRuntime = 3 };

struct Common {
  std::string out;
  std::string format;
  bool quiet = false;
};

// the format default depends on the subcommand and is filled in after parsing
void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "output file (default: stdout)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--quiet", c.quiet, "suppress the summary line on stderr");
}

void emit(const Common& c, const std::string& content) {
  if (c.out.empty())
    std::cout << content;
  else
    spec_io::write_atomic(c.out, content);
}

void summary(const Common& c, const std::string& line) {
  if (!c.quiet) std::cerr << line << '\n';
}

json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << harness::csv_escape(header[i]);
  os << "\r\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << "\r\n";
  }
  return os.str();
}

json rows_json(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  auto a = json::array();
  for (const auto& r : rows) {
    json o;
    for (std::size_t i = 0; i < header.size(); ++i) o[header[i]] = num(r[i]);
    a.push_back(o);
  }
  return a;
}

// ---------------------------------------------------------------- conjugate

struct ConjugateArgs {
  std::string expr, expr_file;
  double smin = 1e3, smax = 1e12, tol = 1e-9;
  int per_decade = 4;
};

int cmd_conjugate(const ConjugateArgs& a, const Common& c) {
  std::string text = a.expr;
  if (!a.expr_file.empty()) {
    std::ifstream in(a.expr_file);
    if (!in) throw SpecError("cannot read expression file '" + a.expr_file + "'");
    std::getline(in, text, '\0');
  }
  if (text.empty()) throw SpecError("conjugate needs --expr or --expr-file");
  if (!(a.smin > 0 && a.smax > a.smin) || a.per_decade < 1) throw SpecError("invalid s grid");
  const auto ell = spec_io::parse_expr(text);
  const auto conj = regvar::de_bruijn_conjugate(ell);
  const auto& closed = conj.closed_form();

  const std::vector<std::string> header{"s", "l", "l_sharp", "closed_form", "ratio", "identity_residual"};
  std::vector<std::vector<double>> rows;
  std::vector<double> s_used, dev;
  double worst_identity = 0.0;
  for (double s : numeric::log_space(a.smin, a.smax, a.per_decade)) {
    if (s < conj.min_argument() || s < ell.domain_start()) continue;
    const double l = ell(s), k = conj(s);
    const double cf = closed ? (*closed)(s) : std::nan("");
    const double u = std::log(s), lu = ell.log_at(u);
    const double identity = std::abs(std::expm1(lu + conj.log_at(u + lu)));
    worst_identity = std::max(worst_identity, identity);
    rows.push_back({s, l, k, cf, k / cf, identity});
    if (closed) {
      s_used.push_back(s);
      dev.push_back(std::abs(k / cf - 1));
    }
  }
  if (rows.empty()) throw SpecError("no grid point lies in the domain of the conjugate");
  const bool identity_pass = worst_identity <= a.tol;
  bool closed_pass = true;
  json closed_json = nullptr;
  if (closed) {
    const auto v = numeric::assess_convergence(s_used, dev, 0.25);
    const double last = rows.back()[4];
    closed_pass = last >= 0.8 && last <= 1.25 && v.nonincreasing;
    closed_json = {{"formula", closed->formula}, {"final_ratio", num(last)}, {"nonincreasing", v.nonincreasing},
                   {"pass", closed_pass}};
  }
  const bool pass = identity_pass && closed_pass;
  if (c.format == "json")
    emit(c, dump({{"expression", ell.to_string()},
                  {"identity", {{"max_residual", num(worst_identity)}, {"tol", a.tol}, {"pass", identity_pass}}},
                  {"closed_form", closed_json},
                  {"pass", pass},
                  {"rows", rows_json(header, rows)}}));
  else
    emit(c, csv_table(header, rows));
  summary(c, std::string("conjugate ") + ell.to_string() + ": identity residual " + format_double(worst_identity) +
                 (closed ? ", closed-form ratio " + format_double(rows.back()[4]) : "") + (pass ? " PASS" : " FAIL"));
  return pass ? kPass : kFail;
}

// ---------------------------------------------------------------- spec driven commands

struct SpecArgs {
  std::string spec;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
};

spec_io::ExperimentSpec load(const SpecArgs& a) {
  if (a.spec.empty()) throw SpecError("--spec is required");
  auto s = spec_io::load_spec(a.spec);
  if (a.seed) s.seed = *a.seed;
  if (a.tol) s.slope_tol = *a.tol;
  return s;
}

rates::RateEnvelope envelope_for(const spec_io::ExperimentSpec& s, const opmodel::SpectralModel& m) {
  if (s.reference) return spec_io::build_reference(*s.reference);
  if (!s.regime) throw SpecError("spec needs a regime or a reference envelope");
  return rates::predict(spec_io::build_regime(*s.regime), spec_io::model_profiles(m));
}

int cmd_predict(const SpecArgs& a, const Common& c) {
  const auto s = load(a);
  if (!s.regime) throw SpecError("predict needs a regime");
  const auto model = spec_io::build_model(s.model);
  const auto env = rates::predict(spec_io::build_regime(*s.regime), spec_io::model_profiles(model));
  const std::vector<std::string> header{"t", "predicted"};
  std::vector<std::vector<double>> rows;
  for (double t : numeric::log_space(s.t_lo, s.t_hi, s.points_per_decade))
    if (t >= env.validity_start) rows.push_back({t, env(t)});
  if (c.format == "json")
    emit(c, dump({{"provenance", env.provenance},
                  {"validity_start", num(env.validity_start)},
                  {"config", spec_io::to_json(s)},
                  {"rows", rows_json(header, rows)}}));
  else
    emit(c, csv_table(header, rows));
  summary(c, "predict: " + env.provenance);
  return kPass;
}

int cmd_simulate(const SpecArgs& a, const Common& c) {
  const auto s = load(a);
  const auto curve = harness::run_decay_experiment(spec_io::build_model(s.model),
                                                   spec_io::build_observable(s.observable), s.t_lo, s.t_hi,
                                                   s.points_per_decade);
  if (c.format == "json") {
    auto j = harness::to_json(curve);
    j["config"] = spec_io::to_json(s);
    emit(c, dump(j));
  } else {
    emit(c, harness::to_csv(curve));
  }
  summary(c, "simulate: " + std::to_string(curve.t.size()) + " samples, " + std::to_string(curve.failures()) +
                 " failures");
  return kPass;
}

int cmd_verify(const SpecArgs& a, const Common& c) {
  const auto s = load(a);
  const auto model = spec_io::build_model(s.model);
  const auto obs = spec_io::build_observable(s.observable);
  const auto env = envelope_for(s, model);
  const auto curve = harness::run_decay_experiment(model, obs, s.t_lo, s.t_hi, s.points_per_decade);
  harness::CompareConfig cfg;
  cfg.slope_expected = s.slope_expected;
  cfg.slope_tol = s.slope_tol;
  cfg.max_band = s.max_band;
  cfg.band_lo = s.band_lo;
  cfg.band_hi = s.band_hi;
  std::optional<harness::Window> w;
  if (s.window_lo) w = harness::Window{*s.window_lo, *s.window_hi};
  const auto r = harness::compare(curve, env, w, cfg);
  json report{{"library_version", spec_io::kLibraryVersion},
              {"schema", spec_io::kSchemaVersion},
              {"seed", s.seed},
              {"config", spec_io::to_json(s)},
              {"envelope", env.provenance},
              {"sample_failures", curve.failures()},
              {"comparison", harness::to_json(r)}};
  if (s.csv_out) spec_io::write_atomic(*s.csv_out, harness::to_csv(r));
  if (s.json_out) spec_io::write_atomic(*s.json_out, dump(report));
  emit(c, c.format == "csv" ? harness::to_csv(r) : dump(report));
  summary(c, "verify " + s.name + ": slope " + format_double(r.slope_fit) + " (expected " +
                 format_double(r.slope_expected) + "), band [" + format_double(r.band_inf) + ", " +
                 format_double(r.band_sup) + "]" + (r.pass ? " PASS" : " FAIL"));
  return r.pass ? kPass : kFail;
}

// ---------------------------------------------------------------- audit

struct AuditArgs {
  std::string kind;
  harness::AuditConfig cfg;
  std::vector<std::string> transfer_models;
  double sigma = 0.5, lambda = 1e4, tol = 1e-6;
  std::string ell = "const(1)";
};

int cmd_audit(const AuditArgs& a, const Common& c) {
  if (a.kind == "karamata") {
    if (!(a.sigma > 0 && a.sigma < 1)) throw SpecError("--sigma must lie in (0,1)");
    if (!(a.lambda > 10)) throw SpecError("--lambda must exceed 10");
    const regvar::RegVarFn g{1.0 - a.sigma, spec_io::parse_expr(a.ell)};
    const auto rep = cbf::karamata_audit(g, cbf::End::Infinity, numeric::log_space(10, a.lambda, 4), a.tol);
    json j{{"kind", "karamata"},
           {"sigma", a.sigma},
           {"ell", a.ell},
           {"constant", num(rep.constant)},
           {"lambda", num(rep.lambda.back())},
           {"ratio", num(rep.ratio.back())},
           {"tol", a.tol},
           {"pass", rep.pass}};
    const std::vector<std::string> header{"lambda", "ratio"};
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < rep.lambda.size(); ++i) rows.push_back({rep.lambda[i], rep.ratio[i]});
    j["rows"] = rows_json(header, rows);
    emit(c, c.format == "csv" ? csv_table(header, rows) : dump(j));
    summary(c, "karamata sigma = " + format_double(a.sigma) + ": ratio " + format_double(rep.ratio.back()) +
                   (rep.pass ? " PASS" : " FAIL"));
    return rep.pass ? kPass : kFail;
  }
  auto cfg = a.cfg;
  cfg.transfer_models = a.transfer_models;
  const auto kind = harness::audit_from_name(a.kind);
  const auto r = harness::inequality_audit(kind, cfg);
  auto j = harness::to_json(r);
  j["config"] = {{"n", cfg.n},         {"trials", cfg.trials}, {"seed", cfg.seed},
                 {"model", cfg.model}, {"t_range", {cfg.t_lo, cfg.t_hi}}};
  if (c.format == "csv")
    emit(c, csv_table({"checked", "violations", "constant", "worst_constant"},
                      {{double(r.checked), double(r.violations), r.constant, r.worst_constant}}));
  else
    emit(c, dump(j));
  summary(c, a.kind + ": " + std::to_string(r.violations) + " violations in " + std::to_string(r.checked) +
                 " checks, worst constant " + format_double(r.worst_constant) + (r.pass ? " PASS" : " FAIL"));
  return r.pass ? kPass : kFail;
}

// ---------------------------------------------------------------- transform

struct TransformArgs {
  std::string kind = "stieltjes", duality = "reciprocal", ell = "const(1)";
  double a = 0.0, b = 0.0, index = 0.5;
  std::vector<std::string> atoms;  // s:w
  double lmin = 1e-3, lmax = 1e3;
  int per_decade = 2;
};

int cmd_transform(const TransformArgs& t, const Common& c) {
  const auto kind = t.kind == "stieltjes" ? cbf::Kind::Stieltjes : cbf::Kind::CompleteBernstein;
  cbf::Distribution dist = cbf::Distribution::none();
  if (!t.atoms.empty()) {
    std::vector<cbf::Atom> list;
    for (const auto& s : t.atoms) {
      const auto colon = s.find(':');
      if (colon == std::string::npos) throw SpecError("atom '" + s + "' must be s:w");
      try {
        list.push_back({std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))});
      } catch (const std::exception&) {
        throw SpecError("atom '" + s + "' must be s:w with numbers");
      }
    }
    dist = cbf::Distribution::atoms(list);
  } else {
    dist = cbf::Distribution::regvar(regvar::RegVarFn{t.index, spec_io::parse_expr(t.ell)});
  }
  const cbf::SpecialFn fn(kind, {t.a, t.b, dist});
  static const std::map<std::string, cbf::Duality> dualities{{"reciprocal", cbf::Duality::Reciprocal},
                                                            {"times", cbf::Duality::TimesLambda},
                                                            {"over", cbf::Duality::OverLambda},
                                                            {"inverse", cbf::Duality::LambdaAtInverse}};
  const auto tr = cbf::duality_transform(fn, dualities.at(t.duality));
  const std::vector<std::string> header{"lambda", "f", "transformed"};
  std::vector<std::vector<double>> rows;
  for (double l : numeric::log_space(t.lmin, t.lmax, t.per_decade)) rows.push_back({l, fn(l), tr(l)});
  const std::string claimed = tr.claimed == cbf::Kind::Stieltjes ? "stieltjes" : "complete_bernstein";
  if (c.format == "json")
    emit(c, dump({{"duality", t.duality}, {"claimed_class", claimed}, {"audit_pass", tr.audit_pass},
                  {"rows", rows_json(header, rows)}}));
  else
    emit(c, csv_table(header, rows));
  summary(c, "transform " + t.duality + ": claimed " + claimed + (tr.audit_pass ? " PASS" : " FAIL"));
  return tr.audit_pass ? kPass : kFail;
}

int classify(const std::exception& e) {
  if (dynamic_cast<const SpecError*>(&e) || dynamic_cast<const RegimeParameterError*>(&e) ||
      dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const ZeroFunctionError*>(&e))
    return kInput;
  return kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semigroup decay rates from resolvent growth: predictions, simulations and audits"};
  app.require_subcommand(1);

  Common common;
  ConjugateArgs conj;
  auto* c_conj = app.add_subcommand("conjugate", "de Bruijn conjugate table of a slowly varying function");
  c_conj->add_option("--expr", conj.expr, "inline expression, e.g. 'logpow(1)'");
  c_conj->add_option("--expr-file", conj.expr_file, "file holding the expression");
  c_conj->add_option("--smin", conj.smin);
  c_conj->add_option("--smax", conj.smax);
  c_conj->add_option("--per-decade", conj.per_decade);
  c_conj->add_option("--tol", conj.tol, "bound on |l(s) l#(s l(s)) - 1|");
  add_common(c_conj, common);

  SpecArgs spec;
  auto spec_flags = [&](CLI::App* cmd) {
    cmd->add_option("--spec", spec.spec, "experiment spec (JSON)")->required();
    cmd->add_option("--seed", spec.seed);
    cmd->add_option("--tol", spec.tol, "slope tolerance override");
    add_common(cmd, common);
  };
  auto* c_pred = app.add_subcommand("predict", "envelope predicted by the experiment's rate regime");
  spec_flags(c_pred);
  auto* c_sim = app.add_subcommand("simulate", "raw decay curve of the experiment's model and observable");
  spec_flags(c_sim);
  auto* c_ver = app.add_subcommand("verify", "simulate and compare against the predicted envelope");
  spec_flags(c_ver);

  AuditArgs audit;
  auto* c_aud = app.add_subcommand("audit", "inequality audits on finite models");
  c_aud->add_option("kind", audit.kind, "moment | interpolation | interpol2 | bernstein | transfer | karamata")
      ->required();
  c_aud->add_option("--n", audit.cfg.n);
  c_aud->add_option("--trials", audit.cfg.trials);
  c_aud->add_option("--seed", audit.cfg.seed);
  c_aud->add_option("--model", audit.cfg.model);
  c_aud->add_option("--transfer-model", audit.transfer_models, "restrict the transfer audit (repeatable)");
  c_aud->add_option("--t-lo", audit.cfg.t_lo);
  c_aud->add_option("--t-hi", audit.cfg.t_hi);
  c_aud->add_option("--points-per-decade", audit.cfg.points_per_decade);
  c_aud->add_option("--sigma", audit.sigma, "karamata: index is 1 - sigma");
  c_aud->add_option("--ell", audit.ell, "karamata: slowly varying factor");
  c_aud->add_option("--lambda", audit.lambda, "karamata: largest lambda");
  c_aud->add_option("--tol", audit.tol, "karamata tolerance");
  add_common(c_aud, common);

  TransformArgs tr;
  auto* c_tr = app.add_subcommand("transform", "Stieltjes / complete Bernstein dualities");
  c_tr->add_option("--kind", tr.kind)->check(CLI::IsMember({"stieltjes", "cbf"}));
  c_tr->add_option("--duality", tr.duality)->check(CLI::IsMember({"reciprocal", "times", "over", "inverse"}));
  c_tr->add_option("--a", tr.a);
  c_tr->add_option("--b", tr.b);
  c_tr->add_option("--index", tr.index, "index of the regularly varying distribution g");
  c_tr->add_option("--ell", tr.ell, "slowly varying part of g");
  c_tr->add_option("--atom", tr.atoms, "point mass s:w (repeatable; replaces g)");
  c_tr->add_option("--lmin", tr.lmin);
  c_tr->add_option("--lmax", tr.lmax);
  c_tr->add_option("--per-decade", tr.per_decade);
  add_common(c_tr, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kInput;
  }

  if (common.format.empty()) common.format = c_ver->parsed() || c_aud->parsed() ? "json" : "csv";

  try {
    if (c_conj->parsed()) return cmd_conjugate(conj, common);
    if (c_pred->parsed()) return cmd_predict(spec, common);
    if (c_sim->parsed()) return cmd_simulate(spec, common);
    if (c_ver->parsed()) return cmd_verify(spec, common);
    if (c_aud->parsed()) return cmd_audit(audit, common);
    if (c_tr->parsed()) return cmd_transform(tr, common);
  } catch (const std::exception& e) {
    const int code = classify(e);
    std::cerr << (code == kInput ? "input error: " : "runtime error: ") << e.what() << '\n';
    return code;
  }
  return kInput;
}
