#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgdecay/opmodel.hpp"
#include "sgdecay/rates.hpp"

namespace sgdecay::harness {

// Sampled t -> ||T(t) r(A)|| on a log grid. Failed samples keep NaN and the message.
struct DecayCurve {
  std::vector<double> t, values;
  std::vector<std::string> errors;  // empty string where the sample succeeded
  std::string observable, model;

  bool ok(std::size_t i) const { return errors[i].empty(); }
  std::size_t failures() const;
  // N(t_i) = sup_{j >= i} values[j]
  std::vector<double> running_sup() const;
  // piecewise log-linear interpolation of the running sup, N(t) = N(t_0) below the grid
  // and +0 above it; suitable for rates::decay_to_resolvent
  std::function<double(double)> decay_function() const;
};

DecayCurve run_decay_experiment(const opmodel::SpectralModel& model, const opmodel::Observable& obs,
                                double t_lo, double t_hi, int points_per_decade);

struct Window {
  double lo = 0.0, hi = 0.0;
};

struct CompareConfig {
  std::optional<double> slope_expected;  // default: fitted slope of the envelope itself
  double slope_tol = 0.05;
  double max_band = 0.0;  // sup/inf bound on measured/predicted, 0 disables
  std::optional<double> band_lo, band_hi;  // absolute bounds on measured/predicted
};

struct ComparisonRow {
  double t, measured, predicted_lower, predicted_upper, ratio;
};

struct ComparisonReport {
  Window window;
  double slope_fit = 0.0, slope_expected = 0.0;
  double band_inf = 0.0, band_sup = 0.0;
  bool slope_pass = false, band_pass = false, pass = false;
  std::vector<ComparisonRow> rows;

  double band_ratio() const { return band_sup / band_inf; }
};

// default window [t_max / 1e4, t_max]; WindowError below two decades of usable overlap.
// ratio = measured / upper; the lower envelope only fills its CSV column.
ComparisonReport compare(const DecayCurve& curve, const rates::RateEnvelope& upper,
                         std::optional<Window> window = std::nullopt, const CompareConfig& cfg = {},
                         const rates::RateEnvelope* lower = nullptr);

// ---------------------------------------------------------------- inequality audits

enum class AuditKind { Moment, Interpolation, Interpol2, Bernstein, Transfer };
std::string audit_name(AuditKind k);
AuditKind audit_from_name(const std::string& name);  // SpecError on unknown names

struct AuditConfig {
  int n = 64;               // diagonal size for moment / bernstein
  int trials = 1000;
  std::uint64_t seed = 7;
  std::string model = "borto-a2";          // interpolation / interpol2
  std::vector<std::string> transfer_models;  // empty: the whole catalogue
  double t_lo = 1e2, t_hi = 1e6;
  int points_per_decade = 4;
};

struct AuditReport {
  AuditKind kind = AuditKind::Moment;
  std::uint64_t seed = 0;
  long checked = 0;
  long violations = 0;
  double constant = 1.0;        // constant the inequality was checked with
  double worst_constant = 0.0;  // smallest constant that would have sufficed
  bool pass = false;
  std::vector<std::string> notes;
};

AuditReport inequality_audit(AuditKind kind, const AuditConfig& cfg = {});

// constant for ||f(A)x|| <= C ||x|| f(||Ax||/||x||) frozen from the reference calibration
inline constexpr double kBernsteinConstant = 1.0;
inline constexpr std::uint64_t kBernsteinReferenceSeed = 20240101;
// re-run the brute-force calibration pass on the frozen reference set
double bernstein_calibration();

// ---------------------------------------------------------------- output

std::string format_double(double x);  // 17 significant digits
std::string csv_escape(const std::string& field);
std::string to_csv(const ComparisonReport& r);
std::string to_csv(const DecayCurve& c);
nlohmann::json to_json(const ComparisonReport& r);
nlohmann::json to_json(const DecayCurve& c);
nlohmann::json to_json(const AuditReport& r);

}  // namespace sgdecay::harness
