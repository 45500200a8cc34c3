#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "krein/io.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace krein;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("kreintool-test-" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) { return io::read_text(p); }

}  // namespace

TEST_CASE("format_full round-trips doubles exactly") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 200; ++i) {
    const double v = dist(rng) * std::pow(10.0, static_cast<int>(rng() % 17) - 8);
    CHECK(std::stod(io::format_full(v)) == v);
  }
  CHECK(std::stod(io::format_full(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("pencil JSON round-trip preserves every coefficient bit") {
  std::mt19937_64 rng(11);
  const StarEvenPencil p = oracle::random_pencil(rng, 4, 2);
  const StarEvenPencil back = io::pencil_from_json(io::pencil_to_json(p));
  REQUIRE(back.coeffs.size() == p.coeffs.size());
  for (size_t j = 0; j < p.coeffs.size(); ++j) {
    CHECK(back.coeffs[j].rows() == p.coeffs[j].rows());
    CHECK((back.coeffs[j] - p.coeffs[j]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("wave and profile JSON round-trips") {
  Kdv5Params params = Kdv5Params::with_b(-8.0 / 15.0);
  const PeriodicWave w = solve_periodic_wave(params, 0.01, 16);
  const PeriodicWave wback = io::wave_from_json(io::wave_to_json(w));
  CHECK((wback.coeffs - w.coeffs).cwiseAbs().maxCoeff() == 0.0);
  CHECK(wback.ell == w.ell);
  CHECK(wback.epsilon == w.epsilon);

  BridgeGrid g;
  g.n = 128;
  g.half_length = 20.0;
  const PulseProfile pulse = solve_primary_pulse(1.2, g);
  const auto [pback, gback] = io::profile_from_json(io::profile_to_json(pulse, g));
  CHECK(gback.n == g.n);
  CHECK(gback.half_length == g.half_length);
  CHECK((pback.u - pulse.u).cwiseAbs().maxCoeff() == 0.0);
  CHECK(pback.c == pulse.c);
  CHECK(pback.peaks == pulse.peaks);
}

TEST_CASE("spectrum CSV carries the documented header") {
  Matrix a0 = Matrix::Zero(2, 2);
  a0(0, 0) = -1.0;
  a0(1, 1) = 1.0;
  Matrix a1(2, 2);
  a1 << 0.0, 1.0, -1.0, 0.0;
  const SpectrumReport rep = polynomial_spectrum(validate_pencil({a0, a1}));
  const std::string csv = io::spectrum_to_csv(rep);
  CHECK(csv.rfind("re,im,algebraic,geometric,krein_index,essential_band,origin_cluster,residual",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 eigenvalues
}

TEST_CASE("structured errors serialize code and message") {
  const std::string text = io::error_to_json("ConfigInvalid", "unknown key: bogus");
  CHECK(text.find("\"ConfigInvalid\"") != std::string::npos);
  CHECK(text.find("unknown key: bogus") != std::string::npos);
}

TEST_CASE("core-demo scenario writes its artifact set and manifest") {
  kreintool::RunConfig config;
  config.scenario = "core-demo";
  config.output_dir = fresh_dir("core-demo").string();
  const std::vector<std::string> artifacts = kreintool::run(config);
  for (const std::string& name :
       {std::string("pencil.json"), std::string("spectrum.json"), std::string("spectrum.csv"),
        std::string("spectrum.svg"), std::string("manifest.json")}) {
    CAPTURE(name);
    CHECK(std::find(artifacts.begin(), artifacts.end(), name) != artifacts.end());
    CHECK(fs::exists(fs::path(config.output_dir) / name));
  }
  const std::string spectrum = slurp(fs::path(config.output_dir) / "spectrum.json");
  CHECK(spectrum.find("\"k_r\": 1") != std::string::npos);
  const std::string manifest = slurp(fs::path(config.output_dir) / "manifest.json");
  CHECK(manifest.find("core-demo") != std::string::npos);
  CHECK(manifest.find("spectrum.csv") != std::string::npos);
  const std::string svg = slurp(fs::path(config.output_dir) / "spectrum.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("unknown parameter keys are rejected before any compute") {
  kreintool::RunConfig config;
  config.scenario = "core-demo";
  config.parameters["bogus"] = "1";
  config.output_dir = fresh_dir("badkey").string();
  CHECK_THROWS_AS(kreintool::run(config), ConfigInvalid);

  kreintool::RunConfig bad_scenario;
  bad_scenario.scenario = "no-such-scenario";
  bad_scenario.output_dir = fresh_dir("badscen").string();
  CHECK_THROWS_AS(kreintool::run(bad_scenario), ConfigInvalid);
}

TEST_CASE("reruns with identical config are byte-identical") {
  kreintool::RunConfig config;
  config.scenario = "kdv5-dispersion";
  config.parameters["points"] = "41";
  config.parameters["mu-max"] = "0.5";

  const fs::path dir_a = fresh_dir("disp-a");
  const fs::path dir_b = fresh_dir("disp-b");
  config.output_dir = dir_a.string();
  const std::vector<std::string> first = kreintool::run(config);
  config.output_dir = dir_b.string();
  const std::vector<std::string> second = kreintool::run(config);
  REQUIRE(first == second);
  for (const std::string& name : first) {
    CAPTURE(name);
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  }
}

TEST_CASE("dispersion figure encodes negative-signature stretches as dashed") {
  kreintool::RunConfig config;
  config.scenario = "kdv5-dispersion";
  config.parameters["points"] = "101";
  config.output_dir = fresh_dir("disp-svg").string();
  kreintool::run(config);
  const std::string svg = slurp(fs::path(config.output_dir) / "dispersion.svg");
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  CHECK(svg.find("polyline") == std::string::npos);  // everything is path data
  const std::string csv = slurp(fs::path(config.output_dir) / "dispersion.csv");
  CHECK(csv.rfind("mu,", 0) == 0);
}

TEST_CASE("tolerance environment overrides reach the scenario runner") {
  const char* key = "KREINTOOL_TOL_RESID";
  setenv(key, "0.125", 1);
  const Tolerances tol = kreintool::tolerances_from_env();
  CHECK(tol.resid == 0.125);
  unsetenv(key);
  const Tolerances fresh = kreintool::tolerances_from_env();
  CHECK(fresh.resid == Tolerances{}.resid);
}
