#include "arpen/tuning.hpp"

#include "arpen/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace arpen {

std::vector<double> step_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw ConfigError("invalid grid range");
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e10) / 1e10);
  }
  return out;
}

void TuningGrid::validate() const {
  auto check = [](const std::vector<double>& g, const char* name) {
    if (g.empty()) throw ConfigError(fmt::format("{} is empty", name));
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(g[i] >= 0.0) || !std::isfinite(g[i])) {
        throw ConfigError(fmt::format("{} contains a negative or non-finite value", name));
      }
      if (i > 0 && !(g[i] > g[i - 1])) {
        throw ConfigError(fmt::format("{} must be strictly increasing", name));
      }
    }
  };
  check(lambda_grid, "lambda grid");
  check(gamma_grid, "gamma grid");
  check(lambda2_grid, "lambda2 grid");
  if (!(gamma_grid.front() > 0.0) || gamma_grid.back() > 2.0) {
    throw ConfigError("gamma grid must lie in (0, 2]");
  }
  if (!(scad_alpha > 2.0)) throw ConfigError("SCAD alpha must exceed 2");
}

int degrees_of_freedom(const FitResult& fit) {
  int df = static_cast<int>(fit.nonzero_coefficients()) + fit.model.p + 1;
  if (fit.model.family.kind == Family::TEstimated) ++df;
  return df;
}

double bic(double loglik, int df, double t_eff) {
  return -2.0 * loglik + static_cast<double>(df) * std::log(t_eff);
}

double bic(const FitResult& fit, int t_eff) {
  return bic(fit.loglik, degrees_of_freedom(fit), t_eff);
}

namespace {

// One warm-started sweep along the lambda axis; `make` builds the penalty for
// a lambda value.
template <class Make>
void sweep_lambda(const TimeSeriesDataset& data, const ModelSpec& model, const SolverOptions& options,
                  const FitResult& base, const std::vector<double>& lambdas, Make make,
                  std::vector<TuningRow>& table, TuningReport& report, bool& have_best) {
  const FitResult* previous = &base;
  std::optional<FitResult> last;
  for (double lambda : lambdas) {
    const PenaltySpec penalty = make(lambda);
    std::optional<FitResult> fit;
    TuningRow row{penalty};
    if (!penalty.is_active()) {
      fit = base;
      fit->penalty = penalty;
    } else {
      SolverOptions opts = options;
      opts.init = previous->state;
      opts.record_trace = false;
      try {
        fit = arpen::fit(data, model, penalty, opts);
      } catch (const NumericalError&) {
        fit.reset();
      }
    }
    if (!fit) {
      row.failed = true;
      row.bic = std::numeric_limits<double>::infinity();
      table.push_back(row);
      continue;
    }
    row.bic = fit->bic;
    row.df = degrees_of_freedom(*fit);
    row.loglik = fit->loglik;
    row.converged = fit->converged;
    row.iterations = fit->iterations;
    table.push_back(row);

    const bool better = !have_best ||
                        (row.converged && !report.best_converged) ||
                        (row.converged == report.best_converged &&
                         (row.bic < report.best.bic ||
                          (row.bic == report.best.bic && lambda > report.best_hyperparams.lambda)));
    if (better) {
      report.best = *fit;
      report.best_hyperparams = penalty;
      report.best_index = table.size() - 1;
      report.best_converged = row.converged;
      have_best = true;
    }
    last = std::move(fit);
    previous = &*last;
  }
}

}  // namespace

TuningReport grid_search(const TimeSeriesDataset& data, const ModelSpec& model, PenaltyKind method,
                         const TuningGrid& grid, const SolverOptions& options) {
  grid.validate();
  SolverOptions base_opts = options;
  base_opts.record_trace = false;
  const FitResult base = fit(data, model, PenaltySpec::none(), base_opts);

  TuningReport report;
  bool have_best = false;
  auto& table = report.table;

  switch (method) {
    case PenaltyKind::None:
      sweep_lambda(data, model, options, base, {0.0},
                   [](double) { return PenaltySpec::none(); }, table, report, have_best);
      break;
    case PenaltyKind::Lasso:
      sweep_lambda(data, model, options, base, grid.lambda_grid,
                   [](double l) { return PenaltySpec::lasso(l); }, table, report, have_best);
      break;
    case PenaltyKind::Ridge:
      sweep_lambda(data, model, options, base, grid.lambda_grid,
                   [](double l) { return PenaltySpec::ridge(l); }, table, report, have_best);
      break;
    case PenaltyKind::Scad:
      sweep_lambda(data, model, options, base, grid.lambda_grid,
                   [&](double l) { return PenaltySpec::scad(l, grid.scad_alpha); }, table, report,
                   have_best);
      break;
    case PenaltyKind::Bridge:
      for (double g : grid.gamma_grid) {
        sweep_lambda(data, model, options, base, grid.lambda_grid,
                     [g](double l) { return PenaltySpec::bridge(l, g); }, table, report, have_best);
      }
      break;
    case PenaltyKind::ElasticNet:
      for (double l2 : grid.lambda2_grid) {
        sweep_lambda(data, model, options, base, grid.lambda_grid,
                     [l2](double l) { return PenaltySpec::elastic_net(l, l2); }, table, report,
                     have_best);
      }
      break;
  }
  if (!have_best) throw NumericalError("every grid point failed to fit");
  return report;
}

OrderSelection select_ar_order(const TimeSeriesDataset& data, const ErrorFamily& family,
                               PenaltyKind method, int p_max, const TuningGrid& grid,
                               const SolverOptions& options, bool intercept) {
  data.validate();
  if (p_max < 0) throw ConfigError("p_max must be non-negative");
  if (4 * static_cast<Eigen::Index>(p_max) >= data.size()) {
    throw ConfigError(fmt::format("p_max = {} must be below N/4 (N = {})", p_max, data.size()));
  }
  OrderSelection out;
  bool have = false;
  for (int p = 0; p <= p_max; ++p) {
    const Eigen::Index drop = p_max - p;
    const TimeSeriesDataset sample = drop > 0 ? data.tail(drop) : data;
    SolverOptions opts = options;
    if (opts.init && opts.init->phi.size() != p) opts.init.reset();
    TuningReport report = grid_search(sample, ModelSpec{p, family, intercept}, method, grid, opts);
    out.per_p.push_back({p, report.best.bic});
    if (!have || report.best.bic < out.report.best.bic) {
      out.p = p;
      out.rows_dropped = drop;
      out.report = std::move(report);
      have = true;
    }
  }
  return out;
}

}  // namespace arpen
