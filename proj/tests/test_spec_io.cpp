#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sgdecay/errors.hpp"
#include "sgdecay/spec_io.hpp"

using namespace sgdecay;
using namespace sgdecay::spec_io;
using nlohmann::json;

namespace {

json borto_spec() {
  return json::parse(R"j({
    "version": "sgdecay-spec/1",
    "name": "borto",
    "model": {"variant": "catalogue", "name": "borto-a2"},
    "observable": {"kind": "InvA"},
    "regime": {"regime": "InfHilbertPoly", "alpha": 2},
    "grid": {"t_range": [100, 1e8], "points_per_decade": 4},
    "tolerances": {"slope": 0.05, "max_band": 20},
    "seed": 11
  })j");
}

}  // namespace

TEST_CASE("expression grammar") {
  const auto e = parse_expr("mul(logpow(2), pow(explogpow(0.5), -1))");
  CHECK(e.to_string() == "mul(logpow(2), pow(explogpow(0.5), -1))");
  CHECK(parse_expr(" const( 2 ) ")(100.0) == doctest::Approx(2.0));
  CHECK(parse_expr("logpow(1)")(std::exp(5.0)) == doctest::Approx(5.0));
  CHECK(parse_expr("iterlog(2, 1)")(std::exp(std::exp(3.0))) == doctest::Approx(3.0));
  CHECK(parse_expr("argpow(logpow(1), 2)")(std::exp(3.0)) == doctest::Approx(6.0));
  // printed form parses back to the same tree
  for (const char* s : {"logpow(-2)", "explogpow(0.40000000000000002)", "iterlog(3, 0.5)",
                        "argpow(mul(logpow(1), const(3)), 0.5)"}) {
    const auto a = parse_expr(s);
    CHECK(parse_expr(a.to_string()) == a);
  }
  for (const char* bad : {"", "logpow", "logpow(1", "logpow(1))", "foo(1)", "iterlog(2.5, 1)", "explogpow(1.5)",
                          "mul(logpow(1))", "logpow(x)"})
    CHECK_THROWS_AS(parse_expr(bad), SpecError);
}

TEST_CASE("spec parsing and round trip") {
  const auto s = parse_spec(borto_spec());
  CHECK(s.name == "borto");
  CHECK(s.t_hi == 1e8);
  CHECK(s.seed == 11);
  CHECK(s.max_band == 20);
  CHECK(s.regime->alpha == 2);
  CHECK(parse_spec(to_json(s)) == s);
  CHECK(to_json(parse_spec(to_json(s))) == to_json(s));

  auto j = json::parse(R"j({
    "version": "sgdecay-spec/1",
    "model": {"variant": "diagonal", "eigenvalues": [1, [0.5, 2.0]]},
    "observable": {"kind": "Wop", "alpha": 1.5, "beta": 0.5, "ell": "logpow(1)"},
    "reference": {"kind": "exp_sqrt", "a": 2},
    "window": [10, 1e4],
    "tolerances": {"band_lo": 0.999, "band_hi": 1.001},
    "outputs": {"csv": "a,b.csv"}
  })j");
  const auto d = parse_spec(j);
  CHECK(d.model.eigenvalues.size() == 2);
  CHECK(d.model.eigenvalues[1] == std::complex<double>(0.5, 2.0));
  CHECK(*d.band_hi == 1.001);
  CHECK(*d.csv_out == "a,b.csv");
  CHECK(parse_spec(to_json(d)) == d);

  j = json::parse(R"j({
    "version": "sgdecay-spec/1",
    "model": {"variant": "curve", "primitive": "power_law", "params": [1, 2.718281828459045, -1, 2]},
    "observable": {"kind": "FracComb", "alpha": 1, "beta": 2}
  })j");
  CHECK(parse_spec(to_json(parse_spec(j))) == parse_spec(j));
}

TEST_CASE("schema violations") {
  auto bad = [](const std::function<void(json&)>& edit) {
    auto j = borto_spec();
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(parse_spec(bad([](json& j) { j["version"] = "v0"; })), SpecError);
  CHECK_THROWS_AS(parse_spec(bad([](json& j) { j.erase("model"); })), SpecError);
  CHECK_THROWS_AS(parse_spec(bad([](json& j) { j["model"]["name"] = "nope"; })), SpecError);
  CHECK_THROWS_AS(parse_spec(bad([](json& j) { j["extra"] = 1; })), SpecError);
  CHECK_THROWS_AS(parse_spec(bad([](json& j) { j["grid"]["t_range"] = {5, 1}; })), SpecError);
  CHECK_THROWS_AS(parse_spec(bad([](json& j) { j["grid"]["points_per_decade"] = 0; })), SpecError);
  CHECK_THROWS_AS(parse_spec(bad([](json& j) { j["regime"]["regime"] = "Sideways"; })), SpecError);
  CHECK_THROWS_AS(parse_spec(bad([](json& j) { j["regime"]["ell"] = "logpow("; })), SpecError);
  CHECK_THROWS_AS(parse_spec(bad([](json& j) { j["observable"]["kind"] = "Wop"; })), SpecError);
  CHECK_THROWS_AS(parse_spec(bad([](json& j) { j["seed"] = -3; })), SpecError);
  CHECK_THROWS_AS(parse_spec(bad([](json& j) { j["model"]["params"] = {1}; })), SpecError);
  CHECK_THROWS_AS(load_spec("/nonexistent/spec.json"), SpecError);
}

TEST_CASE("builders") {
  const auto ref = build_reference({"exp_sqrt", 2.0, 0.0, 1.0});
  CHECK(ref(16.0) == doctest::Approx(std::exp(-8.0)));
  CHECK(build_reference({"log_power", 1.0, 2.0, 1.0})(1e4) == doctest::Approx(1e-4 * std::pow(std::log(1e4), 2)));
  CHECK_THROWS_AS(build_reference({"wiggle", 1, 0, 1}), SpecError);
  const auto reg = build_regime({"BothHilbertPoly", 1.0, 2.0});
  CHECK(reg.regime == rates::Regime::BothHilbertPoly);
  const auto z = model_profiles(opmodel::SpectralModel::catalogue("zero-a2"));
  CHECK(z.m);
  CHECK(z.mlog);
  CHECK(z.M->is_increasing());
  const auto b = model_profiles(opmodel::SpectralModel::catalogue("borto-a1"));
  CHECK_FALSE(b.m);
  CHECK((*b.M)(10.0) > 0.0);
}

TEST_CASE("atomic writes") {
  const auto dir = std::filesystem::temp_directory_path() / "sgdecay_spec_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "out.txt").string();
  write_atomic(path, "first");
  write_atomic(path, "second");
  std::ifstream in(path);
  std::string got;
  in >> got;
  CHECK(got == "second");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK_THROWS_AS(write_atomic((dir / "missing" / "x.txt").string(), "x"), SpecError);
  std::filesystem::remove_all(dir);
}
