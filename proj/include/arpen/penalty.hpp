#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace arpen {

enum class PenaltyKind { None, Lasso, Scad, Bridge, Ridge, ElasticNet };

std::string_view to_string(PenaltyKind kind);

/// Accepts none, lasso, scad, bridge, ridge, elasticnet (also elastic-net).
PenaltyKind parse_penalty_kind(std::string_view name);

/// Penalty family and its hyperparameters. `lambda` is lambda_1 for the
/// elastic net; `lambda2` is its ridge weight. Unused fields are ignored.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::None;
  double lambda = 0.0;
  double alpha = 3.7;
  double gamma = 1.0;
  double lambda2 = 0.0;

  static PenaltySpec none() { return {}; }
  static PenaltySpec lasso(double lambda) { return {PenaltyKind::Lasso, lambda}; }
  static PenaltySpec scad(double lambda, double alpha = 3.7) {
    return {PenaltyKind::Scad, lambda, alpha};
  }
  static PenaltySpec bridge(double lambda, double gamma) {
    return {PenaltyKind::Bridge, lambda, 3.7, gamma};
  }
  static PenaltySpec ridge(double lambda) { return {PenaltyKind::Ridge, lambda}; }
  static PenaltySpec elastic_net(double lambda1, double lambda2) {
    return {PenaltyKind::ElasticNet, lambda1, 3.7, 1.0, lambda2};
  }

  /// Throws ConfigError on invalid hyperparameters.
  void validate() const;

  /// False when the penalty is identically zero.
  bool is_active() const;

  std::string describe() const;
};

/// Per-coefficient penalty p(|b|).
double penalty_value(const PenaltySpec& spec, double abs_beta);

/// Sum of p(|b_i|) over a coefficient vector.
double penalty_value(const PenaltySpec& spec, const Eigen::VectorXd& beta);

/// p'(|b|) for |b| > 0. SCAD uses the Fan-Li derivative.
double penalty_deriv(const PenaltySpec& spec, double abs_beta);

/// Diagonal of the local quadratic approximation at beta0. Inactive entries
/// carry +inf and mark coefficients fixed at exactly zero.
struct LqaMatrix {
  Eigen::VectorXd diag;
  std::vector<bool> active;

  Eigen::Index size() const { return diag.size(); }
};

LqaMatrix lqa_matrix(const PenaltySpec& spec, const Eigen::VectorXd& beta0,
                     double prune_eps = 1e-6);

}  // namespace arpen
