#pragma once

#include "arpen/model.hpp"
#include "arpen/penalty.hpp"
#include "arpen/solver.hpp"

#include <vector>

namespace arpen {

/// Inclusive arithmetic grid lo, lo + step, ..., hi (values rounded to 1e-10).
std::vector<double> step_grid(double lo, double hi, double step);

struct TuningGrid {
  std::vector<double> lambda_grid = step_grid(0.0, 3.0, 0.1);
  std::vector<double> gamma_grid = step_grid(0.1, 2.0, 0.1);   // bridge only
  std::vector<double> lambda2_grid = step_grid(0.0, 3.0, 0.1); // elastic net ridge axis
  double scad_alpha = 3.7;

  /// Non-empty, strictly increasing, non-negative; gamma values in (0, 2].
  void validate() const;
};

struct TuningRow {
  PenaltySpec penalty;
  double bic = 0.0;
  int df = 0;
  double loglik = 0.0;
  bool converged = false;
  bool failed = false;  // the solver threw; bic is +inf
  int iterations = 0;
};

struct TuningReport {
  FitResult best;
  PenaltySpec best_hyperparams;
  std::size_t best_index = 0;
  bool best_converged = true;  // false only when no grid point converged
  std::vector<TuningRow> table;
};

/// Nonzero coefficients (intercept included) + p + 1 for sigma2 + 1 if nu is estimated.
int degrees_of_freedom(const FitResult& fit);

/// -2 loglik + df ln T.
double bic(double loglik, int df, double t_eff);
double bic(const FitResult& fit, int t_eff);

/// Fits every grid point for the penalty family and keeps the BIC minimizer
/// among converged fits. Ties go to the larger lambda. Points along the
/// lambda axis are warm-started from the previous solution.
TuningReport grid_search(const TimeSeriesDataset& data, const ModelSpec& model, PenaltyKind method,
                         const TuningGrid& grid, const SolverOptions& options = {});

struct OrderCandidate {
  int p = 0;
  double bic = 0.0;
};

struct OrderSelection {
  int p = 0;
  std::vector<OrderCandidate> per_p;
  TuningReport report;          // grid search at the selected order
  Eigen::Index rows_dropped = 0; // leading rows removed so every candidate sees T = N - p_max
};

/// Runs grid_search for p = 0..p_max on a common estimation sample and picks the
/// order with the smallest BIC (ties go to the smaller p).
OrderSelection select_ar_order(const TimeSeriesDataset& data, const ErrorFamily& family,
                               PenaltyKind method, int p_max, const TuningGrid& grid,
                               const SolverOptions& options = {}, bool intercept = false);

}  // namespace arpen
