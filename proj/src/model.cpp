#include "arpen/model.hpp"

#include "arpen/error.hpp"
#include "arpen/special.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace arpen {

void TimeSeriesDataset::validate() const {
  if (y.size() == 0) throw DataError("dataset has no observations");
  if (x.cols() < 1) throw DataError("dataset needs at least one covariate");
  if (x.rows() != y.size()) {
    throw DimensionError(fmt::format("covariate rows ({}) do not match response length ({})",
                                     x.rows(), y.size()));
  }
  if (!column_names.empty() && static_cast<Eigen::Index>(column_names.size()) != x.cols()) {
    throw DimensionError(fmt::format("{} column names for {} covariates", column_names.size(),
                                     x.cols()));
  }
  if (!y.allFinite()) throw DataError("response contains missing or non-finite values");
  if (!x.allFinite()) throw DataError("covariates contain missing or non-finite values");
}

std::string TimeSeriesDataset::column_name(Eigen::Index j) const {
  if (j < static_cast<Eigen::Index>(column_names.size())) return column_names[j];
  return fmt::format("x{}", j + 1);
}

TimeSeriesDataset TimeSeriesDataset::tail(Eigen::Index rows) const {
  if (rows < 0 || rows >= size()) throw DimensionError("cannot drop that many observations");
  TimeSeriesDataset out;
  out.y = y.tail(size() - rows);
  out.x = x.bottomRows(size() - rows);
  out.column_names = column_names;
  out.response_name = response_name;
  return out;
}

TimeSeriesDataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd x,
                               std::vector<std::string> column_names, std::string response_name) {
  TimeSeriesDataset d{std::move(y), std::move(x), std::move(column_names), std::move(response_name)};
  d.validate();
  return d;
}

std::string ErrorFamily::describe() const {
  switch (kind) {
    case Family::Normal: return "normal";
    case Family::TFixed: return fmt::format("t(nu={:g})", nu);
    case Family::TEstimated: return fmt::format("t(nu estimated, start={:g})", nu);
  }
  return "unknown";
}

void ModelSpec::validate(const TimeSeriesDataset& data) const {
  data.validate();
  if (p < 0) throw ConfigError("AR order must be non-negative");
  const Eigen::Index params = coefficient_count(data);
  if (data.size() < p + params + 2) {
    throw DataError(fmt::format("insufficient data: N = {} rows, need at least {} for AR order {} "
                                "with {} coefficients",
                                data.size(), p + params + 2, p, params));
  }
  if (family.is_t() && !(family.nu > 0.0 && std::isfinite(family.nu))) {
    throw ConfigError("degrees of freedom must be positive and finite");
  }
}

TLikelihoodTerms TLikelihoodTerms::at(double nu) {
  if (!(nu > 0.0)) throw ConfigError("degrees of freedom must be positive");
  const double lc = log_t_constant(nu);
  return {std::exp(lc), lc};
}

Eigen::MatrixXd design_matrix(const TimeSeriesDataset& data, bool intercept) {
  if (!intercept) return data.x;
  Eigen::MatrixXd z(data.size(), data.covariates() + 1);
  z.col(0).setOnes();
  z.rightCols(data.covariates()) = data.x;
  return z;
}

Eigen::VectorXd ar_filter(const Eigen::VectorXd& series, const Eigen::VectorXd& phi) {
  const Eigen::Index n = series.size();
  const Eigen::Index p = phi.size();
  if (n <= p) {
    throw DimensionError(fmt::format("series of length {} cannot be filtered at AR order {}", n, p));
  }
  Eigen::VectorXd out = series.tail(n - p);
  for (Eigen::Index j = 1; j <= p; ++j) {
    out.noalias() -= phi[j - 1] * series.segment(p - j, n - p);
  }
  return out;
}

Eigen::MatrixXd ar_filter_columns(const Eigen::MatrixXd& m, const Eigen::VectorXd& phi) {
  const Eigen::Index n = m.rows();
  const Eigen::Index p = phi.size();
  if (n <= p) {
    throw DimensionError(fmt::format("matrix with {} rows cannot be filtered at AR order {}", n, p));
  }
  Eigen::MatrixXd out = m.bottomRows(n - p);
  for (Eigen::Index j = 1; j <= p; ++j) {
    out.noalias() -= phi[j - 1] * m.middleRows(p - j, n - p);
  }
  return out;
}

Eigen::VectorXd residuals(const TimeSeriesDataset& data, const Eigen::VectorXd& beta) {
  const Eigen::Index m = data.covariates();
  if (beta.size() == m) return data.y - data.x * beta;
  if (beta.size() == m + 1) {
    return (data.y - data.x * beta.tail(m)).array() - beta[0];
  }
  throw DimensionError(
      fmt::format("coefficient vector of length {} for {} covariates", beta.size(), m));
}

Eigen::VectorXd innovations(const TimeSeriesDataset& data, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& phi) {
  return ar_filter(residuals(data, beta), phi);
}

namespace {

void require_positive_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw NumericalError(fmt::format("sigma2 must be positive and finite, got {}", sigma2));
  }
}

void require_positive_nu(double nu) {
  if (!(nu > 0.0) || std::isnan(nu)) {
    throw NumericalError(fmt::format("nu must be positive, got {}", nu));
  }
}

// Derivative of the log-likelihood with respect to each innovation, scaled so
// that dl/da_t = -w_t a_t / sigma2.
LoglikGradient gradient_from_weights(const TimeSeriesDataset& data, const ParameterState& state,
                                     const Eigen::VectorXd& w) {
  const Eigen::Index p = state.phi.size();
  const Eigen::VectorXd e = residuals(data, state.beta);
  const Eigen::VectorXd a = ar_filter(e, state.phi);
  const Eigen::Index t_eff = a.size();
  const bool intercept = state.beta.size() == data.covariates() + 1;
  const Eigen::MatrixXd zf = ar_filter_columns(design_matrix(data, intercept), state.phi);

  const Eigen::VectorXd wa = w.cwiseProduct(a);
  LoglikGradient g;
  g.beta = zf.transpose() * wa / state.sigma2;
  g.phi.resize(p);
  for (Eigen::Index j = 1; j <= p; ++j) {
    g.phi[j - 1] = wa.dot(e.segment(p - j, t_eff)) / state.sigma2;
  }
  g.sigma2 = -0.5 * static_cast<double>(t_eff) / state.sigma2 +
             0.5 * wa.dot(a) / (state.sigma2 * state.sigma2);
  return g;
}

}  // namespace

double normal_loglik(const Eigen::VectorXd& a, double sigma2) {
  require_positive_sigma2(sigma2);
  const double t_eff = static_cast<double>(a.size());
  return -0.5 * t_eff * std::log(2.0 * std::numbers::pi) - 0.5 * t_eff * std::log(sigma2) -
         0.5 * a.squaredNorm() / sigma2;
}

double normal_loglik(const TimeSeriesDataset& data, const ParameterState& state) {
  return normal_loglik(innovations(data, state.beta, state.phi), state.sigma2);
}

double t_loglik(const Eigen::VectorXd& a, double sigma2, double nu) {
  require_positive_sigma2(sigma2);
  require_positive_nu(nu);
  const double t_eff = static_cast<double>(a.size());
  // ln c_nu - (nu+1)/2 ln nu folded together so that large nu does not cancel.
  const double head = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                      0.5 * std::log(std::numbers::pi * nu);
  double tail = 0.0;
  for (Eigen::Index t = 0; t < a.size(); ++t) {
    tail += std::log1p(a[t] * a[t] / (sigma2 * nu));
  }
  return t_eff * head - 0.5 * t_eff * std::log(sigma2) - 0.5 * (nu + 1.0) * tail;
}

double t_loglik(const TimeSeriesDataset& data, const ParameterState& state) {
  if (!state.nu) throw ConfigError("t log-likelihood needs nu");
  return t_loglik(innovations(data, state.beta, state.phi), state.sigma2, *state.nu);
}

double conditional_loglik(const TimeSeriesDataset& data, const ParameterState& state,
                          const ErrorFamily& family) {
  if (!family.is_t()) return normal_loglik(data, state);
  const double nu = family.kind == Family::TEstimated && state.nu ? *state.nu : family.nu;
  return t_loglik(innovations(data, state.beta, state.phi), state.sigma2, nu);
}

LoglikGradient normal_loglik_gradient(const TimeSeriesDataset& data, const ParameterState& state) {
  require_positive_sigma2(state.sigma2);
  const Eigen::Index t_eff = data.size() - state.phi.size();
  return gradient_from_weights(data, state, Eigen::VectorXd::Ones(t_eff));
}

LoglikGradient t_loglik_gradient(const TimeSeriesDataset& data, const ParameterState& state) {
  require_positive_sigma2(state.sigma2);
  if (!state.nu) throw ConfigError("t gradient needs nu");
  const double nu = *state.nu;
  require_positive_nu(nu);
  const Eigen::VectorXd a = innovations(data, state.beta, state.phi);
  const Eigen::VectorXd w =
      ((nu + 1.0) / (nu + a.array().square() / state.sigma2)).matrix();
  return gradient_from_weights(data, state, w);
}

double ar_spectral_radius(const Eigen::VectorXd& phi) {
  const Eigen::Index p = phi.size();
  if (p == 0) return 0.0;
  if (p == 1) return std::abs(phi[0]);
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  companion.row(0) = phi.transpose();
  companion.bottomLeftCorner(p - 1, p - 1).setIdentity();
  return companion.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace arpen
