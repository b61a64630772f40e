#include "arpen/io.hpp"

#include "arpen/error.hpp"
#include "arpen/inference.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <unistd.h>

namespace arpen {

using nlohmann::json;

const char* version() { return ARPEN_VERSION; }

// CSV -------------------------------------------------------------------------

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t line,
                  const std::string& column) {
  if (cell.empty()) {
    throw DataError(fmt::format("{}: line {}, column '{}': missing value", source, line, column));
  }
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw DataError(fmt::format("{}: line {}, column '{}': cannot parse '{}' as a number", source,
                                line, column, cell));
  }
  return v;
}

}  // namespace

TimeSeriesDataset parse_csv(std::istream& in, const std::string& source, const std::string& response,
                            const std::vector<std::string>& covariates) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    for (auto& h : split_line(line)) header.push_back(trim(h));
    break;
  }
  if (header.empty()) throw DataError(fmt::format("{}: no header row", source));

  std::map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j].empty()) throw DataError(fmt::format("{}: header column {} is empty", source, j + 1));
    if (!index.emplace(header[j], j).second) {
      throw DataError(fmt::format("{}: duplicate column '{}'", source, header[j]));
    }
  }
  auto column = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw DataError(fmt::format("{}: column '{}' not found", source, name));
    return it->second;
  };
  const std::size_t y_col = column(response);
  std::vector<std::string> names = covariates;
  if (names.empty()) {
    for (const auto& h : header) {
      if (h != response) names.push_back(h);
    }
  }
  std::vector<std::size_t> x_cols;
  for (const auto& n : names) {
    if (n == response) throw ConfigError(fmt::format("response '{}' is also listed as a covariate", n));
    x_cols.push_back(column(n));
  }

  std::vector<double> ys;
  std::vector<std::vector<double>> xs;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError(fmt::format("{}: line {} has {} fields, expected {}", source, line_no,
                                  cells.size(), header.size()));
    }
    for (auto& c : cells) c = trim(c);
    ys.push_back(parse_cell(cells[y_col], source, line_no, response));
    std::vector<double> row;
    for (std::size_t k = 0; k < x_cols.size(); ++k) {
      row.push_back(parse_cell(cells[x_cols[k]], source, line_no, names[k]));
    }
    xs.push_back(std::move(row));
  }
  if (ys.empty()) throw DataError(fmt::format("{}: no data rows", source));

  const auto n = static_cast<Eigen::Index>(ys.size());
  const auto m = static_cast<Eigen::Index>(x_cols.size());
  Eigen::VectorXd y(n);
  Eigen::MatrixXd x(n, m);
  for (Eigen::Index t = 0; t < n; ++t) {
    y[t] = ys[static_cast<std::size_t>(t)];
    for (Eigen::Index j = 0; j < m; ++j) x(t, j) = xs[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
  }
  return make_dataset(std::move(y), std::move(x), std::move(names), response);
}

TimeSeriesDataset ingest_csv(const std::string& path, const std::string& response,
                             const std::vector<std::string>& covariates) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open data file '{}'", path));
  return parse_csv(in, path, response, covariates);
}

void write_dataset_csv(const TimeSeriesDataset& data, std::ostream& out) {
  data.validate();
  out << data.response_name;
  for (Eigen::Index j = 0; j < data.covariates(); ++j) out << ',' << data.column_name(j);
  out << '\n';
  for (Eigen::Index t = 0; t < data.size(); ++t) {
    out << fmt::format("{:.17g}", data.y[t]);
    for (Eigen::Index j = 0; j < data.covariates(); ++j) out << fmt::format(",{:.17g}", data.x(t, j));
    out << '\n';
  }
}

void write_dataset_csv(const TimeSeriesDataset& data, const std::string& path) {
  std::ostringstream os;
  write_dataset_csv(data, os);
  write_file_atomic(path, os.str());
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += fmt::format(".tmp{}", static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write '{}'", tmp.string()));
    out << contents;
    out.flush();
    if (!out) throw DataError(fmt::format("write to '{}' failed", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError(fmt::format("cannot move report into place at '{}'", path));
  }
}

// Configuration ---------------------------------------------------------------

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Fit: return "fit";
    case Command::Tune: return "tune";
    case Command::SelectOrder: return "select-order";
    case Command::Simulate: return "simulate";
  }
  return "unknown";
}

Command parse_command(std::string_view name) {
  if (name == "fit") return Command::Fit;
  if (name == "tune") return Command::Tune;
  if (name == "select-order") return Command::SelectOrder;
  if (name == "simulate") return Command::Simulate;
  throw ConfigError(fmt::format("unknown command '{}'", name));
}

void RunConfig::validate() const {
  if (command != Command::Simulate && !data_path) {
    throw ConfigError(fmt::format("{} requires a data file (--data)", to_string(command)));
  }
  if (command == Command::Simulate && !sim) throw ConfigError("simulate requires a simulation block");
  if (model.p < 0) throw ConfigError("--ar-order must be non-negative");
  if (p_max < 0) throw ConfigError("--p-max must be non-negative");
  if (model.family.kind == Family::TFixed && !(model.family.nu > 0.0) && command != Command::Simulate) {
    throw ConfigError("the t family needs --nu (or --estimate-nu)");
  }
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  if (command == Command::Fit) penalty.validate();
  grid.validate();
  options.validate();
}

namespace {

ErrorFamily family_from_name(const std::string& name, const ErrorFamily& current) {
  if (name == "normal") return ErrorFamily::normal();
  if (name == "t") return current.is_t() ? current : ErrorFamily::t_fixed(current.nu);
  throw ConfigError(fmt::format("unknown family '{}' (expected normal or t)", name));
}

std::vector<double> grid_from_json(const json& j, const char* key) {
  if (j.is_array()) return j.get<std::vector<double>>();
  if (j.is_object()) {
    return step_grid(j.at("from").get<double>(), j.at("to").get<double>(), j.at("step").get<double>());
  }
  throw ConfigError(fmt::format("grid '{}' must be a list or {{from, to, step}}", key));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::string> names_from_json(const json& j) {
  if (j.is_string()) {
    std::vector<std::string> out;
    for (auto& s : split_line(j.get<std::string>())) {
      if (!trim(s).empty()) out.push_back(trim(s));
    }
    return out;
  }
  return j.get<std::vector<std::string>>();
}

SimCase sim_case_from_int(int c) {
  if (c < 1 || c > 3) throw ConfigError(fmt::format("simulation case must be 1, 2 or 3 (got {})", c));
  return static_cast<SimCase>(c);
}

void apply_sim(SimCaseConfig& s, const json& j) {
  if (j.contains("case")) s.sim_case = sim_case_from_int(j["case"].get<int>());
  if (j.contains("n")) s.n = j["n"].get<int>();
  if (j.contains("ar_order")) {
    s.ar_order_true = j["ar_order"].get<int>();
    s.phi_true.resize(0);
  }
  if (j.contains("phi")) {
    s.phi_true = vector_from_json(j["phi"]);
    s.ar_order_true = static_cast<int>(s.phi_true.size());
  }
  if (j.contains("beta")) s.beta_true = vector_from_json(j["beta"]);
  if (j.contains("innovation")) {
    const auto v = j["innovation"].get<std::string>();
    if (v == "normal") s.innovation = InnovationKind::Normal;
    else if (v == "t") s.innovation = InnovationKind::TDist;
    else throw ConfigError(fmt::format("unknown innovation '{}' (expected normal or t)", v));
  }
  if (j.contains("nu")) s.nu = j["nu"].get<double>();
  if (j.contains("sigma")) s.sigma_true = j["sigma"].get<double>();
  if (j.contains("contamination_rate")) s.contamination_rate = j["contamination_rate"].get<double>();
  if (j.contains("contamination_mean")) s.contamination_mean = j["contamination_mean"].get<double>();
  if (j.contains("contamination_sd")) s.contamination_sd = j["contamination_sd"].get<double>();
  if (j.contains("burn_in")) s.burn_in = j["burn_in"].get<int>();
  if (j.contains("rho")) {
    const double rho = j["rho"].get<double>();
    if (!(std::abs(rho) < 1.0)) throw ConfigError("rho must lie in (-1, 1)");
    const Eigen::Index m = (s.beta_true.size() ? s.beta_true : default_beta(s.sim_case)).size();
    s.covariate_cov = ar1_covariance(m, rho);
  }
}

}  // namespace

void apply_config_json(RunConfig& c, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& ex) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", ex.what()));
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    if (j.contains("command")) c.command = parse_command(j["command"].get<std::string>());
    if (j.contains("data")) c.data_path = j["data"].get<std::string>();
    if (j.contains("response")) c.response = j["response"].get<std::string>();
    if (j.contains("covariates")) c.covariates = names_from_json(j["covariates"]);
    if (j.contains("ar_order")) c.model.p = j["ar_order"].get<int>();
    if (j.contains("intercept")) c.model.intercept = j["intercept"].get<bool>();
    if (j.contains("family")) {
      c.model.family = family_from_name(j["family"].get<std::string>(), c.model.family);
      c.family_given = true;
    }
    if (j.contains("nu")) {
      c.model.family.nu = j["nu"].get<double>();
      if (!c.model.family.is_t()) {
        c.model.family.kind = Family::TFixed;
        c.family_given = true;
      }
    }
    if (j.value("estimate_nu", false)) {
      c.model.family.kind = Family::TEstimated;
      if (!(c.model.family.nu > 0.0)) c.model.family.nu = 5.0;
      c.family_given = true;
    }
    if (j.contains("penalty")) c.penalty.kind = parse_penalty_kind(j["penalty"].get<std::string>());
    if (j.contains("lambda")) c.penalty.lambda = j["lambda"].get<double>();
    if (j.contains("gamma")) c.penalty.gamma = j["gamma"].get<double>();
    if (j.contains("lambda2")) c.penalty.lambda2 = j["lambda2"].get<double>();
    if (j.contains("alpha")) {
      c.penalty.alpha = j["alpha"].get<double>();
      c.grid.scad_alpha = c.penalty.alpha;
    }
    if (j.contains("grid")) {
      const json& g = j["grid"];
      if (g.contains("lambda")) c.grid.lambda_grid = grid_from_json(g["lambda"], "lambda");
      if (g.contains("gamma")) c.grid.gamma_grid = grid_from_json(g["gamma"], "gamma");
      if (g.contains("lambda2")) c.grid.lambda2_grid = grid_from_json(g["lambda2"], "lambda2");
    }
    if (j.contains("solver")) {
      const json& s = j["solver"];
      if (s.contains("eta")) c.options.eta = s["eta"].get<double>();
      if (s.contains("max_iter")) c.options.max_iter = s["max_iter"].get<int>();
      if (s.contains("prune_eps")) c.options.prune_eps = s["prune_eps"].get<double>();
      if (s.contains("nu_low")) c.options.nu_bracket.low = s["nu_low"].get<double>();
      if (s.contains("nu_high")) c.options.nu_bracket.high = s["nu_high"].get<double>();
    }
    if (j.contains("p_max")) c.p_max = j["p_max"].get<int>();
    if (j.contains("level")) c.level = j["level"].get<double>();
    if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
    if (j.contains("intervals")) c.intervals = j["intervals"].get<bool>();
    if (j.contains("simulate")) {
      if (!c.sim) c.sim.emplace();
      apply_sim(*c.sim, j["simulate"]);
    }
    if (j.contains("seed")) {
      if (!c.sim) c.sim.emplace();
      c.sim->seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("reps")) {
      if (!c.sim) c.sim.emplace();
      c.sim->reps = j["reps"].get<int>();
    }
    if (j.contains("out")) c.output_path = j["out"].get<std::string>();
    if (j.contains("format")) {
      const auto f = j["format"].get<std::string>();
      if (f == "table") c.output_format = ReportFormat::Table;
      else if (f == "csv") c.output_format = ReportFormat::Csv;
      else throw ConfigError(fmt::format("unknown format '{}' (expected table or csv)", f));
    }
  } catch (const json::exception& ex) {
    throw ConfigError(fmt::format("config: {}", ex.what()));
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::ostringstream os;
  os << in.rdbuf();
  try {
    apply_config_json(config, os.str());
  } catch (const ConfigError& ex) {
    throw ConfigError(fmt::format("{}: {}", path, ex.what()));
  }
}

namespace {

ErrorFamily study_family(const RunConfig& c, const SimCaseConfig& s) {
  if (!c.family_given) {
    return s.innovation == InnovationKind::TDist ? ErrorFamily::t_fixed(s.nu) : ErrorFamily::normal();
  }
  ErrorFamily f = c.model.family;
  if (f.is_t() && !(f.nu > 0.0)) f.nu = s.nu;
  return f;
}

}  // namespace

std::string describe_config(const RunConfig& c) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json j;
  j["command"] = std::string(to_string(c.command));
  if (c.data_path) {
    j["data"] = *c.data_path;
    j["response"] = c.response;
    j["covariates"] = c.covariates;
  }
  if (c.command == Command::Simulate && c.sim) {
    j["family"] = study_family(c, c.sim->resolved()).describe();
  } else {
    j["ar_order"] = c.model.p;
    j["intercept"] = c.model.intercept;
    j["family"] = c.model.family.describe();
    j["penalty"] = c.penalty.describe();
  }
  j["grid"] = {{"lambda", c.grid.lambda_grid},
               {"gamma", c.grid.gamma_grid},
               {"lambda2", c.grid.lambda2_grid},
               {"alpha", c.grid.scad_alpha}};
  j["solver"] = {{"eta", c.options.eta},
                 {"max_iter", c.options.max_iter},
                 {"prune_eps", c.options.prune_eps},
                 {"nu_bracket", {c.options.nu_bracket.low, c.options.nu_bracket.high}}};
  j["p_max"] = c.p_max;
  j["level"] = c.level;
  if (c.sim) {
    const SimCaseConfig s = c.sim->resolved();
    json cov = json::array();
    for (Eigen::Index i = 0; i < s.covariate_cov.rows(); ++i) cov.push_back(vec(s.covariate_cov.row(i)));
    j["simulate"] = {{"case", static_cast<int>(s.sim_case)},
                     {"n", s.n},
                     {"phi", vec(s.phi_true)},
                     {"beta", vec(s.beta_true)},
                     {"innovation", s.innovation == InnovationKind::Normal ? "normal" : "t"},
                     {"nu", s.nu},
                     {"sigma", s.sigma_true},
                     {"contamination_rate", *s.contamination_rate},
                     {"contamination_mean", s.contamination_mean},
                     {"contamination_sd", s.contamination_sd},
                     {"covariate_cov", cov},
                     {"burn_in", s.burn_in},
                     {"reps", s.reps},
                     {"seed", s.seed},
                     {"intervals", c.intervals}};
  }
  return j.dump();
}

// Reports ---------------------------------------------------------------------

namespace {

std::string num(double v, int digits = 6) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  return fmt::format("{:.{}g}", v, digits);
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string("NA"); }

std::string family_label(const FitResult& fit) {
  if (fit.model.family.kind == Family::TEstimated && fit.state.nu) {
    return fmt::format("t(nu estimated = {})", num(*fit.state.nu));
  }
  return fit.model.family.describe();
}

/// Parameter table, fit summary and variable list for one fitted model.
void add_fit_sections(Report& report, const FitResult& fit, const TimeSeriesDataset& data,
                      const RunConfig& config, const std::string& prefix) {
  ReportSection params;
  params.title = prefix + "parameters";
  params.table.header = {"Parameter", "Estimate", "SE", "Lower", "Upper", "Note"};
  std::vector<IntervalRow> rows;
  bool information_pd = true;
  if (config.intervals) {
    const IntervalReport ci = confidence_intervals(fit, data, config.level);
    rows = ci.rows;
    information_pd = ci.information_pd;
  } else {
    const Eigen::Index k = fit.state.beta.size();
    for (Eigen::Index i = 0; i < k; ++i) {
      IntervalRow r;
      r.label = fit.model.intercept ? (i == 0 ? std::string("(intercept)") : data.column_name(i - 1))
                                    : data.column_name(i);
      r.estimate = fit.state.beta[i];
      r.pruned = !fit.active_set.empty() && !fit.active_set[static_cast<std::size_t>(i)];
      rows.push_back(r);
    }
    for (Eigen::Index j = 0; j < fit.state.phi.size(); ++j) {
      IntervalRow r;
      r.label = fmt::format("phi{}", j + 1);
      r.estimate = fit.state.phi[j];
      rows.push_back(r);
    }
    IntervalRow s;
    s.label = "sigma2";
    s.estimate = fit.state.sigma2;
    rows.push_back(s);
  }
  for (const IntervalRow& r : rows) {
    params.table.add({r.label, num(r.estimate), opt_num(r.se), opt_num(r.lower), opt_num(r.upper),
                      r.pruned ? "excluded" : ""});
  }
  if (config.intervals) {
    params.notes.push_back(fmt::format("{:g}% Wald intervals from the observed information",
                                       100.0 * config.level));
  }
  if (!information_pd) {
    params.notes.push_back("observed information is not positive definite; some intervals are NA");
  }
  report.sections.push_back(std::move(params));

  ReportSection summary;
  summary.title = prefix + "summary";
  summary.table.header = {"Quantity", "Value"};
  summary.table.add({"family", family_label(fit)});
  summary.table.add({"penalty", fit.penalty.describe()});
  summary.table.add({"ar_order", std::to_string(fit.model.p)});
  summary.table.add({"N", std::to_string(data.size())});
  summary.table.add({"T", std::to_string(fit.effective_size)});
  summary.table.add({"loglik", num(fit.loglik, 10)});
  summary.table.add({"objective", num(fit.objective, 10)});
  summary.table.add({"BIC", num(fit.bic, 10)});
  summary.table.add({"iterations", std::to_string(fit.iterations)});
  summary.table.add({"converged", fit.converged ? "yes" : "no"});
  summary.table.add({"stationary", fit.stationarity_ok ? "yes" : "no"});
  report.sections.push_back(std::move(summary));

  std::vector<std::string> selected;
  const Eigen::VectorXd slopes = fit.slopes();
  for (Eigen::Index j = 0; j < slopes.size(); ++j) {
    if (slopes[j] != 0.0) selected.push_back(data.column_name(j));
  }
  ReportSection vars;
  vars.title = prefix + "selected variables";
  vars.table.header = {"Variable", "Estimate"};
  for (Eigen::Index j = 0; j < slopes.size(); ++j) {
    if (slopes[j] != 0.0) vars.table.add({data.column_name(j), num(slopes[j])});
  }
  vars.notes.push_back(fmt::format("{} of {} covariates kept", selected.size(), slopes.size()));

  // Informational only: expected signs for the household electricity model.
  static const std::map<std::string, int> expected{{"LY", 1}, {"LPRICE", -1}, {"CDD", 1}, {"HDD", 1}};
  for (Eigen::Index j = 0; j < slopes.size(); ++j) {
    const auto it = expected.find(data.column_name(j));
    if (it == expected.end()) continue;
    const char* want = it->second > 0 ? "positive" : "negative";
    const char* got = slopes[j] > 0 ? "positive" : slopes[j] < 0 ? "negative" : "zero";
    vars.notes.push_back(fmt::format("{}: expected {}, estimated {}{}", it->first, want, got,
                                     (slopes[j] * it->second > 0) ? "" : " (differs)"));
  }
  report.sections.push_back(std::move(vars));

  if (!fit.converged) {
    report.warnings.push_back(fmt::format("{}fit did not converge after {} iterations (last change {})",
                                          prefix, fit.iterations, num(fit.last_change)));
  }
  if (!fit.nu_bracketed) report.warnings.push_back("nu score had no root in the bracket; nu is at an endpoint");
}

Table tuning_table(const TuningReport& tr) {
  Table t;
  t.header = {"lambda", "gamma", "lambda2", "df", "loglik", "BIC", "converged", "selected"};
  for (std::size_t i = 0; i < tr.table.size(); ++i) {
    const TuningRow& r = tr.table[i];
    const bool bridge = r.penalty.kind == PenaltyKind::Bridge;
    const bool enet = r.penalty.kind == PenaltyKind::ElasticNet;
    t.add({num(r.penalty.lambda), bridge ? num(r.penalty.gamma) : "", enet ? num(r.penalty.lambda2) : "",
           r.failed ? "NA" : std::to_string(r.df), r.failed ? "NA" : num(r.loglik, 10), num(r.bic, 10),
           r.failed ? "failed" : (r.converged ? "yes" : "no"), i == tr.best_index ? "*" : ""});
  }
  return t;
}

void note_tuning(Report& report, const TuningReport& tr) {
  int failed = 0, nonconv = 0;
  for (const TuningRow& r : tr.table) {
    if (r.failed) ++failed;
    else if (!r.converged) ++nonconv;
  }
  if (failed) report.warnings.push_back(fmt::format("{} grid points failed numerically", failed));
  if (nonconv) report.warnings.push_back(fmt::format("{} grid points did not converge", nonconv));
  if (!tr.best_converged) report.warnings.push_back("no grid point converged; best row is unconverged");
}

TimeSeriesDataset load_data(const RunConfig& c) {
  return ingest_csv(*c.data_path, c.response, c.covariates);
}


}  // namespace

Report build_report(const RunConfig& config) {
  config.validate();
  Report report;
  report.header.push_back(fmt::format("arpen {}", version()));
  report.header.push_back(fmt::format("command: {}", to_string(config.command)));
  report.header.push_back(fmt::format("seed: {}", config.sim ? std::to_string(config.sim->seed) : "none"));
  report.header.push_back(fmt::format("config: {}", describe_config(config)));

  switch (config.command) {
    case Command::Fit: {
      const TimeSeriesDataset data = load_data(config);
      const FitResult f = fit(data, config.model, config.penalty, config.options);
      add_fit_sections(report, f, data, config, "");
      break;
    }
    case Command::Tune: {
      const TimeSeriesDataset data = load_data(config);
      config.model.validate(data);
      const TuningReport tr = grid_search(data, config.model, config.penalty.kind, config.grid, config.options);
      ReportSection s;
      s.title = "tuning grid";
      s.table = tuning_table(tr);
      s.notes.push_back(fmt::format("selected {}", tr.best_hyperparams.describe()));
      report.sections.push_back(std::move(s));
      note_tuning(report, tr);
      add_fit_sections(report, tr.best, data, config, "selected ");
      break;
    }
    case Command::SelectOrder: {
      const TimeSeriesDataset data = load_data(config);
      const OrderSelection sel = select_ar_order(data, config.model.family, config.penalty.kind, config.p_max,
                                                 config.grid, config.options, config.model.intercept);
      ReportSection s;
      s.title = "order selection";
      s.table.header = {"p", "BIC", "selected"};
      for (const OrderCandidate& c : sel.per_p) {
        s.table.add({std::to_string(c.p), num(c.bic, 10), c.p == sel.p ? "*" : ""});
      }
      s.notes.push_back(fmt::format("chosen AR order {} ({} leading rows dropped so every order uses the same sample)",
                                    sel.p, sel.rows_dropped));
      report.sections.push_back(std::move(s));
      note_tuning(report, sel.report);
      const TimeSeriesDataset used = sel.rows_dropped > 0 ? data.tail(sel.rows_dropped) : data;
      add_fit_sections(report, sel.report.best, used, config, "selected ");
      break;
    }
    case Command::Simulate: {
      const SimCaseConfig s = config.sim->resolved();
      StudyOptions opts;
      opts.grid = config.grid;
      opts.solver = config.options;
      opts.p_max = config.p_max;
      opts.level = config.level;
      opts.intervals = config.intervals;
      opts.threads = config.threads;
      const StudyReport study = run_study(s, default_methods(study_family(config, s)), opts);

      ReportSection sel;
      sel.title = "variable selection";
      sel.table.header = {"Method", "MSE", "Correct", "Incorrect", "Cor.fit", "AR order"};
      for (const StudyRow& r : study.rows) {
        sel.table.add({r.method, fixed(r.mean_mse, 5), fixed(r.mean_correct, 2), fixed(r.mean_incorrect, 2),
                       fixed(r.cor_fit_rate, 2), std::to_string(r.ar_order_hits)});
      }
      sel.notes.push_back(fmt::format("{} of {} replications completed", study.reps_completed,
                                      study.reps_requested));
      report.sections.push_back(std::move(sel));

      ReportSection tun;
      tun.title = "tuning";
      tun.table.header = {"Method", "mean lambda", "mean gamma/lambda2", "nonconverged"};
      for (const StudyRow& r : study.rows) {
        tun.table.add({r.method, fixed(r.mean_lambda, 3), fixed(r.mean_gamma, 3), std::to_string(r.nonconverged)});
      }
      report.sections.push_back(std::move(tun));

      ReportSection est;
      est.title = "estimates";
      est.table.header = {"Method", "Coefficient", "True", "Mean", "SE", "LB", "UB"};
      for (const StudyRow& r : study.rows) {
        for (Eigen::Index i = 0; i < study.beta_true.size(); ++i) {
          if (study.beta_true[i] == 0.0) continue;
          est.table.add({r.method, fmt::format("beta{}", i + 1), fixed(study.beta_true[i], 4),
                         fixed(r.mean_estimates[i], 4), fixed(r.mean_se[i], 4), fixed(r.mean_lb[i], 4),
                         fixed(r.mean_ub[i], 4)});
        }
      }
      report.sections.push_back(std::move(est));
      for (const std::string& f : study.failures) report.warnings.push_back(f);
      for (const StudyRow& r : study.rows) {
        if (r.nonconverged > 0) {
          report.warnings.push_back(fmt::format("{}: {} replications selected an unconverged fit", r.method,
                                                r.nonconverged));
        }
      }
      break;
    }
  }
  return report;
}

std::string render(const Report& report, ReportFormat format) {
  std::ostringstream os;
  for (const std::string& h : report.header) os << "# " << h << '\n';
  for (const ReportSection& s : report.sections) {
    os << '\n';
    if (format == ReportFormat::Table) {
      os << "== " << s.title << " ==\n";
    } else {
      os << "# section: " << s.title << '\n';
    }
    s.table.write(os, format);
    for (const std::string& n : s.notes) os << (format == ReportFormat::Csv ? "# " : "") << n << '\n';
  }
  if (!report.warnings.empty()) {
    os << '\n';
    for (const std::string& w : report.warnings) os << "# warning: " << w << '\n';
  }
  return os.str();
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Data:
    case ErrorKind::Dimension: return 3;
    case ErrorKind::Numerical: return 4;
  }
  return 4;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const std::string where = config.data_path ? fmt::format(" ({})", *config.data_path) : std::string();
  try {
    const Report report = build_report(config);
    for (const std::string& w : report.warnings) err << "warning: " << w << '\n';
    if (!config.output_path.empty()) {
      write_file_atomic(config.output_path, render(report, config.output_format));
    }
    out << render(report, ReportFormat::Table);
    return 0;
  } catch (const Error& ex) {
    err << "error: " << to_string(config.command) << where << ": " << ex.what() << '\n';
    return exit_code(ex.kind());
  } catch (const std::exception& ex) {
    err << "error: " << to_string(config.command) << where << ": " << ex.what() << '\n';
    return 4;
  }
}

}  // namespace arpen
