#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "krein/io.hpp"
#include "krein/types.hpp"
#include "scenarios.hpp"

namespace {

// Scenario parameters arrive as free-form "--key value" pairs so each
// scenario can own its keyword set; CLI11 handles the fixed options and
// help, the remainder is folded into the parameter map here.
int fold_parameters(const std::vector<std::string>& args,
                    std::map<std::string, std::string>& params) {
  for (size_t i = 0; i < args.size(); ++i) {
    const std::string& tok = args[i];
    if (tok.rfind("--", 0) != 0 || tok.size() <= 2) {
      std::cerr << "unexpected argument '" << tok << "'; scenario parameters are --key value\n";
      return 2;
    }
    std::string key = tok.substr(2);
    std::string value;
    const size_t eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= args.size()) {
        std::cerr << "parameter --" << key << " is missing its value\n";
        return 2;
      }
      value = args[++i];
    }
    if (params.count(key)) {
      std::cerr << "parameter --" << key << " given twice\n";
      return 2;
    }
    params[key] = value;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Spectral toolbox for star-even operator pencils: Krein matrices, "
      "index censuses, and the travelling-wave demo applications"};
  app.allow_extras();

  std::string scenario;
  std::string out_dir;
  long seed = 0;
  bool list = false;
  app.add_option("scenario", scenario, "one of: " + [] {
        std::string s;
        for (const auto& n : kreintool::scenario_names()) s += n + " ";
        return s;
      }());
  app.add_option("--out", out_dir, "output directory for artifacts");
  app.add_option("--seed", seed, "recorded in the manifest for reproducibility");
  app.add_flag("--list", list, "print the scenarios with their parameters and exit");

  CLI11_PARSE(app, argc, argv);

  if (list) {
    std::cout << kreintool::scenario_help();
    return 0;
  }
  if (scenario.empty()) {
    std::cerr << app.help() << '\n' << kreintool::scenario_help();
    return 2;
  }

  kreintool::RunConfig config;
  config.scenario = scenario;
  config.output_dir = out_dir;
  config.seed = seed;
  if (const int rc = fold_parameters(app.remaining(), config.parameters); rc != 0) return rc;

  try {
    const std::vector<std::string> artifacts = kreintool::run(config);
    for (const std::string& name : artifacts) std::cout << name << '\n';
    return 0;
  } catch (const krein::Error& e) {
    const std::string payload = krein::io::error_to_json(e.code, e.what());
    std::cerr << payload;
    if (!config.output_dir.empty()) {
      try {
        std::filesystem::create_directories(config.output_dir);
        krein::io::write_text(config.output_dir / "error.json", payload);
      } catch (const std::exception&) {
        // the stderr copy is the contract; the file is best-effort
      }
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << krein::io::error_to_json("Internal", e.what());
    return 1;
  }
}
