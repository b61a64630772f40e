#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace arpen {

/// Time-ordered response and covariates. Row t of `x` is aligned with y[t];
/// any reordering breaks the AR structure.
struct TimeSeriesDataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  std::vector<std::string> column_names;  // empty or one per column of x
  std::string response_name;

  Eigen::Index size() const { return y.size(); }
  Eigen::Index covariates() const { return x.cols(); }

  /// Throws DataError/DimensionError when the invariants do not hold.
  void validate() const;

  /// Column label, falling back to "x<j+1>".
  std::string column_name(Eigen::Index j) const;

  /// Drops the first `rows` observations.
  TimeSeriesDataset tail(Eigen::Index rows) const;
};

TimeSeriesDataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd x,
                               std::vector<std::string> column_names = {},
                               std::string response_name = "y");

enum class Family { Normal, TFixed, TEstimated };

struct ErrorFamily {
  Family kind = Family::Normal;
  double nu = 0.0;  // fixed value (TFixed) or starting value (TEstimated)

  static ErrorFamily normal() { return {}; }
  static ErrorFamily t_fixed(double nu) { return {Family::TFixed, nu}; }
  static ErrorFamily t_estimated(double nu0) { return {Family::TEstimated, nu0}; }

  bool is_t() const { return kind != Family::Normal; }
  std::string describe() const;
};

struct ModelSpec {
  int p = 0;
  ErrorFamily family;
  bool intercept = false;

  /// Coefficient count including the intercept column.
  Eigen::Index coefficient_count(const TimeSeriesDataset& data) const {
    return data.covariates() + (intercept ? 1 : 0);
  }

  void validate(const TimeSeriesDataset& data) const;
};

struct ParameterState {
  Eigen::VectorXd beta;
  Eigen::VectorXd phi;
  double sigma2 = 1.0;
  std::optional<double> nu;
};

struct TLikelihoodTerms {
  double c_nu = 0.0;      // +inf once nu exceeds roughly 290; the likelihood uses log_c_nu
  double log_c_nu = 0.0;

  static TLikelihoodTerms at(double nu);
};

// Design and filtering ------------------------------------------------------

/// X with a leading column of ones when `intercept` is set.
Eigen::MatrixXd design_matrix(const TimeSeriesDataset& data, bool intercept);

/// Phi(B) applied to a series: out[k] = s[p+k] - sum_j phi[j] s[p+k-j].
/// The first p values are consumed as lags.
Eigen::VectorXd ar_filter(const Eigen::VectorXd& series, const Eigen::VectorXd& phi);

/// ar_filter applied to every column.
Eigen::MatrixXd ar_filter_columns(const Eigen::MatrixXd& m, const Eigen::VectorXd& phi);

/// e = y - X beta. A beta one longer than the covariate count is read as
/// (intercept, slopes...).
Eigen::VectorXd residuals(const TimeSeriesDataset& data, const Eigen::VectorXd& beta);

/// a = Phi(B) e, length N - p.
Eigen::VectorXd innovations(const TimeSeriesDataset& data, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& phi);

// Likelihoods ---------------------------------------------------------------

/// Conditional normal log-likelihood of innovations, constant included.
double normal_loglik(const Eigen::VectorXd& a, double sigma2);
double normal_loglik(const TimeSeriesDataset& data, const ParameterState& state);

/// Conditional t log-likelihood: T ln c_nu - T ln sigma - (nu+1)/2 sum ln(nu + a^2/sigma^2).
double t_loglik(const Eigen::VectorXd& a, double sigma2, double nu);
double t_loglik(const TimeSeriesDataset& data, const ParameterState& state);

/// Dispatches on the family. The normal family ignores state.nu.
double conditional_loglik(const TimeSeriesDataset& data, const ParameterState& state,
                          const ErrorFamily& family);

struct LoglikGradient {
  Eigen::VectorXd beta;
  Eigen::VectorXd phi;
  double sigma2 = 0.0;
};

LoglikGradient normal_loglik_gradient(const TimeSeriesDataset& data, const ParameterState& state);
LoglikGradient t_loglik_gradient(const TimeSeriesDataset& data, const ParameterState& state);

// Stationarity --------------------------------------------------------------

/// Spectral radius of the AR companion matrix; 0 for p = 0.
double ar_spectral_radius(const Eigen::VectorXd& phi);

inline bool is_stationary(const Eigen::VectorXd& phi) { return ar_spectral_radius(phi) < 1.0; }

}  // namespace arpen
