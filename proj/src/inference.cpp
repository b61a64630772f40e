#include "arpen/inference.hpp"

#include "arpen/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace arpen {

namespace {

std::string coefficient_label(const FitResult& fit, const TimeSeriesDataset& data, Eigen::Index i) {
  if (fit.model.intercept) {
    return i == 0 ? std::string("(intercept)") : data.column_name(i - 1);
  }
  return data.column_name(i);
}

}  // namespace

Eigen::VectorXd free_parameters(const FitResult& fit, std::vector<Eigen::Index>* beta_index) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < fit.state.beta.size(); ++i) {
    const bool active = fit.active_set.empty() || fit.active_set[static_cast<std::size_t>(i)];
    if (active && fit.state.beta[i] != 0.0) idx.push_back(i);
  }
  const bool with_nu = fit.model.family.kind == Family::TEstimated;
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd theta(k + fit.state.phi.size() + 1 + (with_nu ? 1 : 0));
  for (Eigen::Index j = 0; j < k; ++j) theta[j] = fit.state.beta[idx[static_cast<std::size_t>(j)]];
  theta.segment(k, fit.state.phi.size()) = fit.state.phi;
  theta[k + fit.state.phi.size()] = fit.state.sigma2;
  if (with_nu) theta[theta.size() - 1] = fit.state.nu.value_or(fit.model.family.nu);
  if (beta_index) *beta_index = std::move(idx);
  return theta;
}

double loglik_at(const FitResult& fit, const TimeSeriesDataset& data, const Eigen::VectorXd& theta) {
  std::vector<Eigen::Index> idx;
  const Eigen::VectorXd base = free_parameters(fit, &idx);
  if (theta.size() != base.size()) throw DimensionError("parameter vector length mismatch");
  ParameterState s = fit.state;
  s.beta.setZero();
  const auto k = static_cast<Eigen::Index>(idx.size());
  for (Eigen::Index j = 0; j < k; ++j) s.beta[idx[static_cast<std::size_t>(j)]] = theta[j];
  s.phi = theta.segment(k, fit.state.phi.size());
  s.sigma2 = theta[k + fit.state.phi.size()];
  if (fit.model.family.kind == Family::TEstimated) s.nu = theta[theta.size() - 1];
  if (fit.model.family.kind == Family::TFixed) s.nu = fit.model.family.nu;
  return conditional_loglik(data, s, fit.model.family);
}

InformationMatrix observed_information(const FitResult& fit, const TimeSeriesDataset& data) {
  InformationMatrix info;
  info.theta = free_parameters(fit, &info.beta_index);
  const Eigen::VectorXd& theta = info.theta;
  const Eigen::Index n = theta.size();

  for (Eigen::Index i : info.beta_index) info.labels.push_back(coefficient_label(fit, data, i));
  for (Eigen::Index j = 0; j < fit.state.phi.size(); ++j) info.labels.push_back(fmt::format("phi{}", j + 1));
  info.labels.emplace_back("sigma2");
  if (fit.model.family.kind == Family::TEstimated) info.labels.emplace_back("nu");

  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = std::max(1e-5, 1e-5 * std::abs(theta[i]));

  auto f = [&](const Eigen::VectorXd& t) { return loglik_at(fit, data, t); };
  const double f0 = f(theta);
  Eigen::MatrixXd hess(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp[i] += h[i];
    tm[i] -= h[i];
    hess(i, i) = (f(tp) - 2.0 * f0 + f(tm)) / (h[i] * h[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      Eigen::VectorXd pp = theta, pm = theta, mp = theta, mm = theta;
      pp[i] += h[i]; pp[j] += h[j];
      pm[i] += h[i]; pm[j] -= h[j];
      mp[i] -= h[i]; mp[j] += h[j];
      mm[i] -= h[i]; mm[j] -= h[j];
      hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
      hess(j, i) = hess(i, j);
    }
  }
  const Eigen::MatrixXd neg = -hess;
  info.matrix = 0.5 * (neg + neg.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(info.matrix);
  info.positive_definite = llt.info() == Eigen::Success;
  return info;
}

double two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + 0.5 * level);
}

IntervalReport confidence_intervals(const FitResult& fit, const TimeSeriesDataset& data,
                                    double level) {
  IntervalReport report;
  report.level = level;
  report.z = two_sided_z(level);

  const InformationMatrix info = observed_information(fit, data);
  report.information_pd = info.positive_definite;

  const Eigen::Index n = info.matrix.rows();
  Eigen::VectorXd var = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info.matrix);
  if (lu.isInvertible()) var = lu.inverse().diagonal();

  auto make_row = [&](std::string label, double estimate, Eigen::Index at) {
    IntervalRow row;
    row.label = std::move(label);
    row.estimate = estimate;
    if (at >= 0 && std::isfinite(var[at]) && var[at] > 0.0) {
      const double se = std::sqrt(var[at]);
      row.se = se;
      row.lower = estimate - report.z * se;
      row.upper = estimate + report.z * se;
    }
    return row;
  };

  const auto k = static_cast<Eigen::Index>(info.beta_index.size());
  for (Eigen::Index i = 0; i < fit.state.beta.size(); ++i) {
    const auto it = std::find(info.beta_index.begin(), info.beta_index.end(), i);
    if (it == info.beta_index.end()) {
      IntervalRow row;
      row.label = coefficient_label(fit, data, i);
      row.pruned = true;
      report.rows.push_back(row);
    } else {
      report.rows.push_back(make_row(coefficient_label(fit, data, i), fit.state.beta[i],
                                     it - info.beta_index.begin()));
    }
  }
  const Eigen::Index p = fit.state.phi.size();
  for (Eigen::Index j = 0; j < p; ++j) {
    report.rows.push_back(make_row(fmt::format("phi{}", j + 1), fit.state.phi[j], k + j));
  }
  report.rows.push_back(make_row("sigma2", fit.state.sigma2, k + p));
  if (fit.model.family.kind == Family::TEstimated) {
    report.rows.push_back(make_row("nu", fit.state.nu.value_or(fit.model.family.nu), k + p + 1));
  }
  return report;
}

}  // namespace arpen
