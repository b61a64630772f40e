#include "arpen/penalty.hpp"

#include "arpen/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace arpen {

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::None: return "none";
    case PenaltyKind::Lasso: return "lasso";
    case PenaltyKind::Scad: return "scad";
    case PenaltyKind::Bridge: return "bridge";
    case PenaltyKind::Ridge: return "ridge";
    case PenaltyKind::ElasticNet: return "elasticnet";
  }
  return "unknown";
}

PenaltyKind parse_penalty_kind(std::string_view name) {
  if (name == "none" || name == "ols") return PenaltyKind::None;
  if (name == "lasso") return PenaltyKind::Lasso;
  if (name == "scad") return PenaltyKind::Scad;
  if (name == "bridge") return PenaltyKind::Bridge;
  if (name == "ridge") return PenaltyKind::Ridge;
  if (name == "elasticnet" || name == "elastic-net" || name == "enet") return PenaltyKind::ElasticNet;
  throw ConfigError(fmt::format("unknown penalty '{}'", name));
}

void PenaltySpec::validate() const {
  auto check_lambda = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError(fmt::format("{} must be a non-negative finite number, got {}", name, v));
    }
  };
  switch (kind) {
    case PenaltyKind::None: return;
    case PenaltyKind::Lasso:
    case PenaltyKind::Ridge: check_lambda(lambda, "lambda"); return;
    case PenaltyKind::Scad:
      check_lambda(lambda, "lambda");
      if (!(alpha > 2.0) || !std::isfinite(alpha)) {
        throw ConfigError(fmt::format("SCAD alpha must exceed 2, got {}", alpha));
      }
      return;
    case PenaltyKind::Bridge:
      check_lambda(lambda, "lambda");
      if (!(gamma > 0.0 && gamma <= 2.0)) {
        throw ConfigError(fmt::format("bridge gamma must lie in (0, 2], got {}", gamma));
      }
      return;
    case PenaltyKind::ElasticNet:
      check_lambda(lambda, "lambda1");
      check_lambda(lambda2, "lambda2");
      return;
  }
}

bool PenaltySpec::is_active() const {
  switch (kind) {
    case PenaltyKind::None: return false;
    case PenaltyKind::ElasticNet: return lambda > 0.0 || lambda2 > 0.0;
    default: return lambda > 0.0;
  }
}

std::string PenaltySpec::describe() const {
  switch (kind) {
    case PenaltyKind::None: return "none";
    case PenaltyKind::Lasso: return fmt::format("lasso(lambda={:g})", lambda);
    case PenaltyKind::Scad: return fmt::format("scad(lambda={:g}, alpha={:g})", lambda, alpha);
    case PenaltyKind::Bridge: return fmt::format("bridge(lambda={:g}, gamma={:g})", lambda, gamma);
    case PenaltyKind::Ridge: return fmt::format("ridge(lambda={:g})", lambda);
    case PenaltyKind::ElasticNet:
      return fmt::format("elasticnet(lambda1={:g}, lambda2={:g})", lambda, lambda2);
  }
  return "unknown";
}

double penalty_value(const PenaltySpec& spec, double abs_beta) {
  const double b = std::abs(abs_beta);
  const double l = spec.lambda;
  switch (spec.kind) {
    case PenaltyKind::None: return 0.0;
    case PenaltyKind::Lasso: return l * b;
    case PenaltyKind::Ridge: return l * b * b;
    case PenaltyKind::Bridge: return b == 0.0 ? 0.0 : l * std::pow(b, spec.gamma);
    case PenaltyKind::ElasticNet: return l * b + spec.lambda2 * b * b;
    case PenaltyKind::Scad: {
      const double a = spec.alpha;
      if (b <= l) return l * b;
      if (b <= a * l) return -(b * b - 2.0 * a * l * b + l * l) / (2.0 * (a - 1.0));
      return 0.5 * (a + 1.0) * l * l;
    }
  }
  return 0.0;
}

double penalty_value(const PenaltySpec& spec, const Eigen::VectorXd& beta) {
  spec.validate();
  double total = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) total += penalty_value(spec, beta[i]);
  return total;
}

double penalty_deriv(const PenaltySpec& spec, double abs_beta) {
  if (!(abs_beta > 0.0)) {
    throw DimensionError(fmt::format("penalty derivative needs |beta| > 0, got {}", abs_beta));
  }
  const double b = abs_beta;
  const double l = spec.lambda;
  switch (spec.kind) {
    case PenaltyKind::None: return 0.0;
    case PenaltyKind::Lasso: return l;
    case PenaltyKind::Ridge: return 2.0 * l * b;
    case PenaltyKind::Bridge: return l * spec.gamma * std::pow(b, spec.gamma - 1.0);
    case PenaltyKind::ElasticNet: return l + 2.0 * spec.lambda2 * b;
    case PenaltyKind::Scad: {
      const double a = spec.alpha;
      if (b <= l) return l;
      if (b <= a * l) return (a * l - b) / (a - 1.0);
      return 0.0;
    }
  }
  return 0.0;
}

LqaMatrix lqa_matrix(const PenaltySpec& spec, const Eigen::VectorXd& beta0, double prune_eps) {
  spec.validate();
  if (!(prune_eps > 0.0)) throw ConfigError("prune_eps must be positive");
  const Eigen::Index m = beta0.size();
  LqaMatrix out{Eigen::VectorXd::Zero(m), std::vector<bool>(static_cast<std::size_t>(m), true)};
  if (!spec.is_active()) return out;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double b = std::abs(beta0[i]);
    if (b <= prune_eps) {
      out.active[static_cast<std::size_t>(i)] = false;
      out.diag[i] = std::numeric_limits<double>::infinity();
    } else {
      out.diag[i] = penalty_deriv(spec, b) / b;
    }
  }
  return out;
}

}  // namespace arpen
