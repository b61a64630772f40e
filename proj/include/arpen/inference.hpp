#pragma once

#include "arpen/model.hpp"
#include "arpen/solver.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace arpen {

/// Negative Hessian of the unpenalized conditional log-likelihood over the
/// free parameters: active coefficients, phi, sigma2 and (when estimated) nu.
struct InformationMatrix {
  Eigen::MatrixXd matrix;
  std::vector<std::string> labels;
  std::vector<Eigen::Index> beta_index;  // coefficient index for each leading beta entry
  Eigen::VectorXd theta;                 // parameter vector the matrix was evaluated at
  bool positive_definite = false;
};

InformationMatrix observed_information(const FitResult& fit, const TimeSeriesDataset& data);

/// Free-parameter vector in the order used by observed_information, and the
/// log-likelihood as a function of it.
Eigen::VectorXd free_parameters(const FitResult& fit, std::vector<Eigen::Index>* beta_index = nullptr);
double loglik_at(const FitResult& fit, const TimeSeriesDataset& data, const Eigen::VectorXd& theta);

struct IntervalRow {
  std::string label;
  double estimate = 0.0;
  std::optional<double> se;
  std::optional<double> lower;
  std::optional<double> upper;
  bool pruned = false;
};

struct IntervalReport {
  std::vector<IntervalRow> rows;  // coefficients in design order, then phi, sigma2, nu
  double level = 0.95;
  double z = 0.0;
  bool information_pd = false;
};

/// Two-sided standard normal quantile z with P(|Z| <= z) = level.
double two_sided_z(double level);

IntervalReport confidence_intervals(const FitResult& fit, const TimeSeriesDataset& data,
                                    double level = 0.95);

}  // namespace arpen
