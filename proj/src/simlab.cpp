#include "arpen/simlab.hpp"

#include "arpen/error.hpp"
#include "arpen/inference.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

namespace arpen {

Eigen::VectorXd default_beta(SimCase c) {
  if (c == SimCase::Case2) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(40);
    b.segment(10, 10).setConstant(2.0);
    b.segment(30, 10).setConstant(2.0);
    return b;
  }
  // Case 3 reuses the eight-covariate Case 1 vector.
  Eigen::VectorXd b(8);
  b << 3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0;
  return b;
}

Eigen::VectorXd default_phi(int order) {
  if (order == 0) return Eigen::VectorXd(0);
  if (order == 1) return Eigen::VectorXd::Constant(1, 0.8);
  if (order == 2) return (Eigen::VectorXd(2) << 0.8, -0.2).finished();
  throw ConfigError(fmt::format("no default phi for AR order {}; set phi_true", order));
}

Eigen::MatrixXd ar1_covariance(Eigen::Index m, double rho) {
  Eigen::MatrixXd s(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) s(i, j) = std::pow(rho, std::abs(static_cast<double>(i - j)));
  }
  return s;
}

int SimCaseConfig::contaminated_count() const {
  const double eps = contamination_rate.value_or(0.0);
  return static_cast<int>(std::ceil(eps * static_cast<double>(n) - 1e-9));
}

SimCaseConfig SimCaseConfig::resolved() const {
  SimCaseConfig c = *this;
  if (c.beta_true.size() == 0) c.beta_true = default_beta(c.sim_case);
  if (c.phi_true.size() == 0 && c.ar_order_true > 0) c.phi_true = default_phi(c.ar_order_true);
  if (!c.contamination_rate) c.contamination_rate = c.sim_case == SimCase::Case3 ? 0.1 : 0.0;
  const Eigen::Index m = c.beta_true.size();
  if (c.covariate_cov.size() == 0) c.covariate_cov = Eigen::MatrixXd::Identity(m, m);

  if (c.n < 2) throw ConfigError("sample size must be at least 2");
  if (c.ar_order_true < 0 || c.phi_true.size() != c.ar_order_true) {
    throw ConfigError("phi_true length must equal ar_order_true");
  }
  if (m < 1) throw ConfigError("beta_true must not be empty");
  if (c.covariate_cov.rows() != m || c.covariate_cov.cols() != m) {
    throw ConfigError("covariate covariance must be M x M");
  }
  if (c.covariate_cov.llt().info() != Eigen::Success) {
    throw ConfigError("covariate covariance must be positive definite");
  }
  if (c.innovation == InnovationKind::TDist && !(c.nu > 0.0)) throw ConfigError("nu must be positive");
  if (!(c.sigma_true > 0.0)) throw ConfigError("sigma_true must be positive");
  const double eps = *c.contamination_rate;
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("contamination rate must lie in [0, 1)");
  if (eps > 0.0 && c.sim_case != SimCase::Case3) {
    throw ConfigError("contamination is only defined for Case 3");
  }
  if (!(c.contamination_sd > 0.0)) throw ConfigError("contamination sd must be positive");
  if (c.burn_in < 0) throw ConfigError("burn-in must be non-negative");
  if (c.reps < 1) throw ConfigError("reps must be at least 1");
  return c;
}

SimulatedData generate_case(const SimCaseConfig& config, int rep_index) {
  const SimCaseConfig c = config.resolved();
  const Eigen::Index n = c.n;
  const Eigen::Index m = c.beta_true.size();
  const int p = c.ar_order_true;

  std::seed_seq seq{static_cast<std::uint32_t>(c.seed & 0xffffffffu),
                    static_cast<std::uint32_t>(c.seed >> 32),
                    static_cast<std::uint32_t>(rep_index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  const Eigen::MatrixXd chol = c.covariate_cov.llt().matrixL();
  Eigen::MatrixXd z(n, m);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index j = 0; j < m; ++j) z(t, j) = normal(rng);
  }
  const Eigen::MatrixXd x = z * chol.transpose();

  const Eigen::Index total = n + c.burn_in;
  Eigen::VectorXd a(total);
  if (c.innovation == InnovationKind::Normal) {
    for (Eigen::Index t = 0; t < total; ++t) a[t] = c.sigma_true * normal(rng);
  } else {
    std::gamma_distribution<double> gamma(0.5 * c.nu, 2.0 / c.nu);
    for (Eigen::Index t = 0; t < total; ++t) {
      const double zt = normal(rng);
      const double u = gamma(rng);
      a[t] = c.sigma_true * zt / std::sqrt(u);
    }
  }
  const int contaminated = c.contaminated_count();
  for (int t = 0; t < contaminated && t < n; ++t) {
    a[c.burn_in + t] = c.contamination_mean + c.contamination_sd * normal(rng);
  }

  Eigen::VectorXd e = Eigen::VectorXd::Zero(total);
  for (Eigen::Index t = 0; t < total; ++t) {
    double v = a[t];
    for (int j = 1; j <= p && t - j >= 0; ++j) v += c.phi_true[j - 1] * e[t - j];
    e[t] = v;
  }

  SimulatedData out;
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < m; ++j) names.push_back(fmt::format("x{}", j + 1));
  out.data = make_dataset(x * c.beta_true + e.tail(n), x, std::move(names), "y");
  out.truth.beta = c.beta_true;
  out.truth.phi = c.phi_true;
  out.truth.sigma2 = c.sigma_true * c.sigma_true;
  if (c.innovation == InnovationKind::TDist) out.truth.nu = c.nu;
  return out;
}

SelectionMetrics selection_metrics(const FitResult& fit, const ParameterState& truth,
                                   double zero_tol, const Eigen::MatrixXd& covariate_cov) {
  const Eigen::VectorXd est = fit.slopes();
  const Eigen::Index m = truth.beta.size();
  if (est.size() != m) throw DimensionError("fitted and true coefficient vectors differ in length");
  if (!(zero_tol > 0.0)) throw ConfigError("zero_tol must be positive");

  SelectionMetrics s;
  int true_zeros = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool est_zero = std::abs(est[i]) < zero_tol;
    if (truth.beta[i] == 0.0) {
      ++true_zeros;
      if (est_zero) s.correct += 1.0;
    } else if (est_zero) {
      s.incorrect += 1.0;
    }
  }
  s.cor_fit = (s.correct == true_zeros && s.incorrect == 0.0) ? 1.0 : 0.0;
  s.ar_order_hit = fit.model.p == truth.phi.size() ? 1.0 : 0.0;
  const Eigen::VectorXd d = est - truth.beta;
  if (covariate_cov.size() == 0) {
    s.mse = d.squaredNorm();
  } else {
    if (covariate_cov.rows() != m || covariate_cov.cols() != m) {
      throw DimensionError("covariance does not match the coefficient count");
    }
    s.mse = d.dot(covariate_cov * d);
  }
  return s;
}

std::vector<StudyMethod> default_methods(const ErrorFamily& family) {
  return {
      {"OLS", ErrorFamily::normal(), PenaltyKind::None},
      {"LASSO", family, PenaltyKind::Lasso},
      {"SCAD", family, PenaltyKind::Scad},
      {"ridge", family, PenaltyKind::Ridge},
      {"bridge", family, PenaltyKind::Bridge},
      {"elastic-net", family, PenaltyKind::ElasticNet},
  };
}

namespace {

struct MethodOutcome {
  SelectionMetrics metrics;
  Eigen::VectorXd estimates;
  Eigen::VectorXd se, lb, ub;  // NaN when undefined
  double lambda = 0.0;
  double second = 0.0;
  bool converged = true;
};

struct RepOutcome {
  std::vector<MethodOutcome> methods;
  std::string failure;  // empty on success
};

RepOutcome run_replication(const SimCaseConfig& config, const std::vector<StudyMethod>& methods,
                           const StudyOptions& options, int rep) {
  RepOutcome out;
  try {
    const SimulatedData sim = generate_case(config, rep);
    const Eigen::Index m = sim.truth.beta.size();
    for (const StudyMethod& method : methods) {
      TuningReport report;
      TimeSeriesDataset used = sim.data;
      if (method.select_order) {
        OrderSelection sel = select_ar_order(sim.data, method.family, method.penalty, options.p_max,
                                             options.grid, options.solver);
        if (sel.rows_dropped > 0) used = sim.data.tail(sel.rows_dropped);
        report = std::move(sel.report);
      } else {
        report = grid_search(sim.data, ModelSpec{method.fixed_p, method.family, false},
                             method.penalty, options.grid, options.solver);
      }
      MethodOutcome mo;
      mo.metrics = selection_metrics(report.best, sim.truth, options.zero_tol, config.covariate_cov);
      mo.estimates = report.best.slopes();
      mo.lambda = report.best_hyperparams.lambda;
      mo.second = method.penalty == PenaltyKind::Bridge       ? report.best_hyperparams.gamma
                  : method.penalty == PenaltyKind::ElasticNet ? report.best_hyperparams.lambda2
                                                              : 0.0;
      mo.converged = report.best_converged;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      mo.se = mo.lb = mo.ub = Eigen::VectorXd::Constant(m, nan);
      if (options.intervals) {
        const IntervalReport ci = confidence_intervals(report.best, used, options.level);
        for (Eigen::Index i = 0; i < m; ++i) {
          const IntervalRow& row = ci.rows[static_cast<std::size_t>(i)];
          if (row.se) {
            mo.se[i] = *row.se;
            mo.lb[i] = *row.lower;
            mo.ub[i] = *row.upper;
          }
        }
      }
      out.methods.push_back(std::move(mo));
    }
  } catch (const std::exception& ex) {
    out.methods.clear();
    out.failure = fmt::format("replication {}: {}", rep, ex.what());
  }
  return out;
}

}  // namespace

StudyReport run_study(const SimCaseConfig& config, const std::vector<StudyMethod>& methods,
                      const StudyOptions& options) {
  const SimCaseConfig c = config.resolved();
  if (methods.empty()) throw ConfigError("no methods to study");
  options.grid.validate();
  options.solver.validate();

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(c.reps));
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(c.reps));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int rep = next++; rep < c.reps; rep = next++) {
      outcomes[static_cast<std::size_t>(rep)] = run_replication(c, methods, options, rep);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  StudyReport report;
  report.reps_requested = c.reps;
  report.beta_true = c.beta_true;
  const Eigen::Index m = c.beta_true.size();
  for (const StudyMethod& method : methods) {
    StudyRow row;
    row.method = method.name;
    row.mean_estimates = Eigen::VectorXd::Zero(m);
    row.mean_se = row.mean_lb = row.mean_ub = Eigen::VectorXd::Zero(m);
    report.rows.push_back(std::move(row));
  }
  std::vector<Eigen::VectorXi> ci_counts(methods.size(), Eigen::VectorXi::Zero(m));
  for (const RepOutcome& o : outcomes) {
    if (!o.failure.empty()) {
      report.failures.push_back(o.failure);
      continue;
    }
    ++report.reps_completed;
    for (std::size_t k = 0; k < methods.size(); ++k) {
      const MethodOutcome& mo = o.methods[k];
      StudyRow& row = report.rows[k];
      row.mean_mse += mo.metrics.mse;
      row.mean_correct += mo.metrics.correct;
      row.mean_incorrect += mo.metrics.incorrect;
      row.cor_fit_rate += mo.metrics.cor_fit;
      row.ar_order_hits += static_cast<int>(mo.metrics.ar_order_hit);
      row.mean_lambda += mo.lambda;
      row.mean_gamma += mo.second;
      if (!mo.converged) ++row.nonconverged;
      row.mean_estimates += mo.estimates;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (!std::isnan(mo.se[i])) {
          row.mean_se[i] += mo.se[i];
          row.mean_lb[i] += mo.lb[i];
          row.mean_ub[i] += mo.ub[i];
          ++ci_counts[k][i];
        }
      }
    }
  }
  const double done = report.reps_completed;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < methods.size(); ++k) {
    StudyRow& row = report.rows[k];
    if (done == 0) {
      row.mean_mse = row.mean_correct = row.mean_incorrect = row.cor_fit_rate = nan;
      row.mean_estimates.setConstant(nan);
    } else {
      row.mean_mse /= done;
      row.mean_correct /= done;
      row.mean_incorrect /= done;
      row.cor_fit_rate /= done;
      row.mean_lambda /= done;
      row.mean_gamma /= done;
      row.mean_estimates /= done;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const int cnt = ci_counts[k][i];
      if (cnt == 0) {
        row.mean_se[i] = row.mean_lb[i] = row.mean_ub[i] = nan;
      } else {
        row.mean_se[i] /= cnt;
        row.mean_lb[i] /= cnt;
        row.mean_ub[i] /= cnt;
      }
    }
  }
  return report;
}

void write_selection_table(const StudyReport& report, ReportFormat format, std::ostream& out) {
  Table t;
  t.header = {"Method", "MSE", "Correct", "Incorrect", "Cor.fit", "AR order"};
  for (const StudyRow& r : report.rows) {
    t.add({r.method, fixed(r.mean_mse, 5), fixed(r.mean_correct, 2), fixed(r.mean_incorrect, 2),
           fixed(r.cor_fit_rate, 2), std::to_string(r.ar_order_hits)});
  }
  t.write(out, format);
}

void write_estimation_table(const StudyReport& report, ReportFormat format, std::ostream& out) {
  Table t;
  t.header = {"Method", "Coefficient", "True", "Mean", "SE", "LB", "UB"};
  for (const StudyRow& r : report.rows) {
    for (Eigen::Index i = 0; i < report.beta_true.size(); ++i) {
      if (report.beta_true[i] == 0.0) continue;
      t.add({r.method, fmt::format("beta{}", i + 1), fixed(report.beta_true[i], 4),
             fixed(r.mean_estimates[i], 4), fixed(r.mean_se[i], 4), fixed(r.mean_lb[i], 4),
             fixed(r.mean_ub[i], 4)});
    }
  }
  t.write(out, format);
}

}  // namespace arpen
