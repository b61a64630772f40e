#pragma once

#include "arpen/model.hpp"
#include "arpen/penalty.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace arpen {

struct NuBracket {
  double low = 0.5;
  double high = 200.0;
};

struct SolverOptions {
  double eta = 1e-6;  // stop when ||theta_k+1 - theta_k||_2 < eta
  int max_iter = 500;
  double prune_eps = 1e-6;
  NuBracket nu_bracket;
  std::optional<ParameterState> init;  // empty: least-squares start
  bool record_trace = true;

  void validate() const;
};

/// Posterior moments of the latent gamma scales given the current innovations.
struct EStepWeights {
  Eigen::VectorXd s1;      // E[u_t | data]
  Eigen::VectorXd s2;      // E[ln u_t | data]
  Eigen::VectorXd kappa2;  // a_t^2 / sigma^2
};

struct NuUpdate {
  double nu = 0.0;
  bool bracketed = true;
};

struct FitResult {
  ModelSpec model;
  PenaltySpec penalty;
  ParameterState state;
  std::optional<EStepWeights> weights;
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;
  double loglik = 0.0;
  /// -loglik + T * penalty(beta); the quantity the iterations drive down.
  double objective = 0.0;
  double bic = 0.0;
  std::vector<bool> active_set;  // one flag per coefficient, intercept first
  bool stationarity_ok = true;   // final phi inside the stationary region
  int stationarity_violations = 0;
  bool nu_bracketed = true;
  Eigen::Index effective_size = 0;  // T = N - p
  std::vector<double> trace;        // objective at the start and after every sweep

  /// Slopes only (intercept removed).
  Eigen::VectorXd slopes() const;
  Eigen::Index nonzero_coefficients() const;
};

/// Solves [X'WX + T diag(omega)] beta = X'W y over the active coefficients;
/// inactive coefficients come back as exact zeros.
Eigen::VectorXd beta_update(const Eigen::MatrixXd& filtered_x, const Eigen::VectorXd& filtered_y,
                            const LqaMatrix& omega, Eigen::Index t_eff);
Eigen::VectorXd beta_update(const Eigen::MatrixXd& filtered_x, const Eigen::VectorXd& filtered_y,
                            const LqaMatrix& omega, const Eigen::VectorXd& weights,
                            Eigen::Index t_eff);

/// Weighted Yule-Walker-type normal equations for phi from full-length residuals.
Eigen::VectorXd phi_update(const Eigen::VectorXd& e, int p);
Eigen::VectorXd phi_update(const Eigen::VectorXd& e, int p, const Eigen::VectorXd& weights);

inline constexpr double kSigma2Floor = 1e-12;

double sigma2_update(const Eigen::VectorXd& innovations);
double sigma2_update(const Eigen::VectorXd& innovations, const Eigen::VectorXd& weights);

EStepWeights estep(const Eigen::VectorXd& innovations, double sigma2, double nu);

/// g(nu) = DG(nu/2) - ln(nu/2) - 1 + mean(s1) - mean(s2). Increasing in nu.
double nu_score(const EStepWeights& weights, double nu);

/// Root of nu_score by bisection on the bracket.
NuUpdate nu_update(const EStepWeights& weights, const NuBracket& bracket);

/// Least-squares starting point: beta from OLS, phi = 0, sigma2 = RSS / N.
ParameterState ols_start(const TimeSeriesDataset& data, const ModelSpec& model);

FitResult fit_normal(const TimeSeriesDataset& data, const ModelSpec& model,
                     const PenaltySpec& penalty, const SolverOptions& options = {});

FitResult fit_t_ecm(const TimeSeriesDataset& data, const ModelSpec& model,
                    const PenaltySpec& penalty, const SolverOptions& options = {});

/// fit_normal or fit_t_ecm depending on model.family.
FitResult fit(const TimeSeriesDataset& data, const ModelSpec& model, const PenaltySpec& penalty,
              const SolverOptions& options = {});

}  // namespace arpen
