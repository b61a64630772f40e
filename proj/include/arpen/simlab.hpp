#pragma once

#include "arpen/model.hpp"
#include "arpen/penalty.hpp"
#include "arpen/solver.hpp"
#include "arpen/table.hpp"
#include "arpen/tuning.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace arpen {

enum class SimCase { Case1 = 1, Case2 = 2, Case3 = 3 };
enum class InnovationKind { Normal, TDist };

/// Monte-Carlo design. Empty vectors/matrices and unset optionals take the
/// case defaults when the config is resolved.
struct SimCaseConfig {
  SimCase sim_case = SimCase::Case1;
  int n = 300;
  int ar_order_true = 1;
  Eigen::VectorXd phi_true;   // default 0.8 (p = 1) or (0.8, -0.2) (p = 2)
  Eigen::VectorXd beta_true;  // default per case
  InnovationKind innovation = InnovationKind::TDist;
  double nu = 10.0;
  double sigma_true = 1.0;
  std::optional<double> contamination_rate;  // Case 3 only, default 0.1
  double contamination_mean = 50.0;
  double contamination_sd = 1.0;
  Eigen::MatrixXd covariate_cov;  // default identity
  int burn_in = 100;
  int reps = 100;
  std::uint64_t seed = 20240601;

  /// Copy with every default filled in; throws ConfigError when invalid.
  SimCaseConfig resolved() const;

  int contaminated_count() const;  // ceil(eps * n)
};

Eigen::VectorXd default_beta(SimCase c);
Eigen::VectorXd default_phi(int order);

/// Sigma_ij = rho^|i-j|.
Eigen::MatrixXd ar1_covariance(Eigen::Index m, double rho);

struct SimulatedData {
  TimeSeriesDataset data;
  ParameterState truth;
};

/// Deterministic in (config.seed, rep_index).
SimulatedData generate_case(const SimCaseConfig& config, int rep_index);

struct SelectionMetrics {
  double correct = 0.0;
  double incorrect = 0.0;
  double cor_fit = 0.0;
  double ar_order_hit = 0.0;
  double mse = 0.0;
};

/// Compares fitted slopes to the truth; |b| < zero_tol counts as zero. The
/// MSE weight matrix defaults to the identity.
SelectionMetrics selection_metrics(const FitResult& fit, const ParameterState& truth,
                                   double zero_tol = 1e-4,
                                   const Eigen::MatrixXd& covariate_cov = Eigen::MatrixXd());

struct StudyMethod {
  std::string name;
  ErrorFamily family;
  PenaltyKind penalty = PenaltyKind::None;
  bool select_order = true;
  int fixed_p = 0;  // used when select_order is false
};

/// OLS (normal, unpenalized) followed by LASSO, SCAD, ridge, bridge and
/// elastic net fitted with `family`.
std::vector<StudyMethod> default_methods(const ErrorFamily& family);

struct StudyOptions {
  TuningGrid grid;
  SolverOptions solver;
  int p_max = 3;
  double zero_tol = 1e-4;
  double level = 0.95;
  bool intervals = true;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct StudyRow {
  std::string method;
  double mean_mse = 0.0;
  double mean_correct = 0.0;
  double mean_incorrect = 0.0;
  double cor_fit_rate = 0.0;
  int ar_order_hits = 0;
  double mean_lambda = 0.0;
  double mean_gamma = 0.0;  // bridge gamma or elastic-net lambda2
  int nonconverged = 0;
  Eigen::VectorXd mean_estimates;
  Eigen::VectorXd mean_se;  // NaN where no replication produced an interval
  Eigen::VectorXd mean_lb;
  Eigen::VectorXd mean_ub;
};

struct StudyReport {
  std::vector<StudyRow> rows;
  int reps_requested = 0;
  int reps_completed = 0;
  std::vector<std::string> failures;  // one entry per failed replication
  Eigen::VectorXd beta_true;
};

StudyReport run_study(const SimCaseConfig& config, const std::vector<StudyMethod>& methods,
                      const StudyOptions& options);

/// Method, MSE, Correct, Incorrect, Cor.fit, AR order.
void write_selection_table(const StudyReport& report, ReportFormat format, std::ostream& out);

/// Mean estimate, SE, LB and UB for every truly nonzero coefficient.
void write_estimation_table(const StudyReport& report, ReportFormat format, std::ostream& out);

}  // namespace arpen
