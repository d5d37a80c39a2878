#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgdecay/opmodel.hpp"
#include "sgdecay/rates.hpp"
#include "sgdecay/regvar.hpp"

namespace sgdecay::spec_io {

inline constexpr const char* kSchemaVersion = "sgdecay-spec/1";
inline constexpr const char* kLibraryVersion = "1.0.0";

// Expressions: const(c) | logpow(b) | explogpow(b) | iterlog(k, b) | mul(e, e) | pow(e, a) | argpow(e, a)
// SpecError on malformed text or out-of-range parameters.
regvar::SlowlyVaryingExpr parse_expr(const std::string& text);

struct ModelSpec {
  std::string variant = "catalogue";  // catalogue | curve | diagonal
  std::string name;                   // catalogue entry or label
  std::string primitive;              // curve: power_law | zero_singular
  std::vector<double> params;         // power_law: c, shift, p, q; zero_singular: alpha0, alpha_inf
  double s0 = 0.0;
  bool symmetric = true;
  std::vector<std::complex<double>> eigenvalues;
};

struct ObservableSpec {
  std::string kind = "InvA";  // InvA BofA AIA2 FracComb PowBofA Wop Vop Identity
  double alpha = 0.0, beta = 0.0;
  std::optional<std::string> ell;
};

struct RegimeSpec {
  std::string regime = "InfHilbertPoly";
  double alpha = 1.0, beta = 0.0, epsilon = 0.1;
  std::optional<std::string> ell;
  bool db_symmetric_form = false;
  double c = 1.0, c_prime = 1.0, C = 1.0, C_prime = 1.0;
};

// closed reference envelopes
//   power:      scale * t^-a
//   exp_sqrt:   scale * exp(-a sqrt(t))
//   log_power:  scale * t^-a (log t)^b
struct ReferenceSpec {
  std::string kind = "power";
  double a = 1.0, b = 0.0, scale = 1.0;
};

struct ExperimentSpec {
  std::string version = kSchemaVersion;
  std::string name;
  ModelSpec model;
  ObservableSpec observable;
  std::optional<RegimeSpec> regime;
  std::optional<ReferenceSpec> reference;
  double t_lo = 1.0, t_hi = 1e6;
  int points_per_decade = 4;
  double s_lo = 1e-3, s_hi = 1e3;
  std::optional<double> window_lo, window_hi;
  std::optional<double> slope_expected;
  double slope_tol = 0.05;
  double max_band = 0.0;
  std::optional<double> band_lo, band_hi;
  std::uint64_t seed = 7;
  std::optional<std::string> csv_out, json_out;

  bool operator==(const ExperimentSpec& o) const;
};

ExperimentSpec parse_spec(const nlohmann::json& j);  // SpecError on schema violations
ExperimentSpec load_spec(const std::string& path);
nlohmann::json to_json(const ExperimentSpec& s);

opmodel::SpectralModel build_model(const ModelSpec& m);
opmodel::Observable build_observable(const ObservableSpec& o);
rates::RateRegime build_regime(const RegimeSpec& r);
rates::RateEnvelope build_reference(const ReferenceSpec& r);
// resolvent profiles of a model in the form the rate regimes consume
rates::ProfileInputs model_profiles(const opmodel::SpectralModel& m);

// temp file + rename
void write_atomic(const std::string& path, const std::string& content);

}  // namespace sgdecay::spec_io
