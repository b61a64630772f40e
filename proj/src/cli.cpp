#include "arpen/error.hpp"
#include "arpen/io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <ostream>

namespace arpen {

namespace {

// Flag values are gathered into a JSON overlay and applied after the config
// file, so a flag always wins over the file.
struct Flags {
  std::string command;
  std::string config;
  nlohmann::json overlay = nlohmann::json::object();
  nlohmann::json sim = nlohmann::json::object();
};

template <typename T>
CLI::Option* option(CLI::App& app, const std::string& name, nlohmann::json& target,
                    const std::string& key, const std::string& help) {
  return app.add_option_function<T>(name, [&target, key](const T& v) { target[key] = v; }, help);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized regression with AR(p) errors under normal or Student-t innovations"};
  app.set_version_flag("--version", std::string(version()));
  Flags f;

  app.add_option("command", f.command, "fit | tune | select-order | simulate")
      ->required()
      ->check(CLI::IsMember({"fit", "tune", "select-order", "simulate"}));
  app.add_option("--config", f.config, "JSON run configuration; flags override its values");

  auto& o = f.overlay;
  option<std::string>(app, "--data", o, "data", "CSV file with a header row");
  option<std::string>(app, "--response", o, "response", "response column (default y)");
  option<std::string>(app, "--covariates", o, "covariates", "comma-separated covariate columns (default: all others)");
  option<int>(app, "--ar-order", o, "ar_order", "AR order p for fit and tune");
  app.add_flag_callback("--intercept", [&o] { o["intercept"] = true; }, "add an intercept column");
  option<std::string>(app, "--family", o, "family", "normal | t")
      ->check(CLI::IsMember({"normal", "t"}));
  option<double>(app, "--nu", o, "nu", "t degrees of freedom (fixed, or the start value with --estimate-nu)");
  app.add_flag_callback("--estimate-nu", [&o] { o["estimate_nu"] = true; }, "estimate nu by ECM");
  option<std::string>(app, "--penalty", o, "penalty", "none | lasso | scad | ridge | bridge | elasticnet");
  option<double>(app, "--lambda", o, "lambda", "penalty weight (lambda1 for the elastic net)");
  option<double>(app, "--gamma", o, "gamma", "bridge exponent");
  option<double>(app, "--lambda2", o, "lambda2", "elastic-net ridge weight");
  option<double>(app, "--alpha", o, "alpha", "SCAD knot parameter (default 3.7)");
  option<int>(app, "--p-max", o, "p_max", "largest AR order tried by select-order and simulate");
  option<double>(app, "--level", o, "level", "confidence level (default 0.95)");
  app.add_flag_callback("--no-intervals", [&o] { o["intervals"] = false; }, "skip standard errors");
  option<std::uint64_t>(app, "--seed", o, "seed", "simulation seed");
  option<int>(app, "--reps", o, "reps", "simulation replications");
  option<unsigned>(app, "--threads", o, "threads", "worker threads for simulate (0: all cores)");
  option<std::string>(app, "--out", o, "out", "report file, written atomically");
  option<std::string>(app, "--format", o, "format", "table | csv")->check(CLI::IsMember({"table", "csv"}));

  auto& s = f.sim;
  option<int>(app, "--case", s, "case", "simulation case 1, 2 or 3");
  option<int>(app, "--n", s, "n", "simulated series length");
  option<int>(app, "--sim-ar-order", s, "ar_order", "true AR order of the simulated errors");
  option<std::string>(app, "--innovation", s, "innovation", "normal | t")
      ->check(CLI::IsMember({"normal", "t"}));
  option<double>(app, "--sim-nu", s, "nu", "degrees of freedom of simulated t innovations");
  option<double>(app, "--sigma", s, "sigma", "innovation scale");
  option<double>(app, "--contamination", s, "contamination_rate", "Case 3 contamination rate");
  option<double>(app, "--rho", s, "rho", "covariate correlation rho^|i-j|");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  RunConfig config;
  try {
    if (!f.config.empty()) apply_config_file(config, f.config);
    o["command"] = f.command;
    if (!s.empty()) o["simulate"] = s;
    apply_config_json(config, o.dump());
    if (config.command == Command::Simulate && !config.sim) config.sim.emplace();
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return exit_code(ex.kind());
  }
  return run(config, out, err);
}

}  // namespace arpen
