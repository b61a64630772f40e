#include "arpen/solver.hpp"

#include "arpen/error.hpp"
#include "arpen/special.hpp"
#include "arpen/tuning.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

namespace arpen {

void SolverOptions::validate() const {
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(prune_eps > 0.0)) throw ConfigError("prune_eps must be positive");
  if (!(nu_bracket.low > 0.0) || !(nu_bracket.low < nu_bracket.high)) {
    throw ConfigError(fmt::format("invalid nu bracket [{}, {}]", nu_bracket.low, nu_bracket.high));
  }
}

Eigen::VectorXd FitResult::slopes() const {
  return model.intercept ? Eigen::VectorXd(state.beta.tail(state.beta.size() - 1)) : state.beta;
}

Eigen::Index FitResult::nonzero_coefficients() const {
  return (state.beta.array() != 0.0).count();
}

namespace {

std::vector<Eigen::Index> active_indices(const LqaMatrix& omega) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    if (omega.active[static_cast<std::size_t>(i)]) idx.push_back(i);
  }
  return idx;
}

Eigen::VectorXd solve_penalized(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const LqaMatrix& omega, const Eigen::VectorXd* weights,
                                Eigen::Index t_eff) {
  if (x.rows() != y.size()) throw DimensionError("filtered design and response differ in length");
  if (x.cols() != omega.size()) throw DimensionError("LQA matrix does not match design width");
  if (weights && weights->size() != y.size()) throw DimensionError("weight vector length mismatch");

  const std::vector<Eigen::Index> idx = active_indices(omega);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  if (idx.empty()) return beta;

  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd xa(x.rows(), k);
  Eigen::VectorXd diag(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    xa.col(j) = x.col(idx[static_cast<std::size_t>(j)]);
    diag[j] = omega.diag[idx[static_cast<std::size_t>(j)]];
  }

  Eigen::MatrixXd gram(k, k);
  Eigen::VectorXd moment;
  if (weights) {
    const Eigen::MatrixXd xw = xa.array().colwise() * weights->array();
    gram.noalias() = xw.transpose() * xa;
    moment = xw.transpose() * y;
  } else {
    gram.setZero();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xa.transpose());
    gram = gram.selfadjointView<Eigen::Lower>();
    moment = xa.transpose() * y;
  }
  gram.diagonal() += static_cast<double>(t_eff) * diag;

  Eigen::VectorXd sol;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    // LLT can succeed on numerically singular matrices; guard on conditioning.
    const double dmax = gram.diagonal().maxCoeff();
    const double lmin = llt.matrixL().toDenseMatrix().diagonal().minCoeff();
    ok = dmax > 0.0 && lmin * lmin > 1e-14 * dmax;
  }
  if (ok) {
    sol = llt.solve(moment);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    qr.setThreshold(1e-12);
    if (qr.rank() < k) {
      std::vector<int> bad;
      for (Eigen::Index j = qr.rank(); j < k; ++j) {
        bad.push_back(static_cast<int>(idx[static_cast<std::size_t>(qr.colsPermutation().indices()[j])]));
      }
      std::string cols;
      for (int c : bad) cols += (cols.empty() ? "" : ", ") + std::to_string(c);
      throw SingularSystemError(
          fmt::format("coefficient system is singular; collinear design columns: {}", cols), bad);
    }
    sol = qr.solve(moment);
  }
  for (Eigen::Index j = 0; j < k; ++j) beta[idx[static_cast<std::size_t>(j)]] = sol[j];
  return beta;
}

Eigen::VectorXd solve_phi(const Eigen::VectorXd& e, int p, const Eigen::VectorXd* weights) {
  const Eigen::Index n = e.size();
  if (p < 0) throw DimensionError("AR order must be non-negative");
  if (p == 0) return Eigen::VectorXd(0);
  if (n <= 2 * p) {
    throw DimensionError(fmt::format("phi update needs N > 2p (N = {}, p = {})", n, p));
  }
  const Eigen::Index t_eff = n - p;
  if (weights && weights->size() != t_eff) throw DimensionError("weight vector length mismatch");

  Eigen::MatrixXd lags(t_eff, p);
  for (int j = 1; j <= p; ++j) lags.col(j - 1) = e.segment(p - j, t_eff);
  const auto current = e.tail(t_eff);

  Eigen::MatrixXd r(p, p);
  Eigen::VectorXd r0(p);
  if (weights) {
    const Eigen::MatrixXd lw = lags.array().colwise() * weights->array();
    r.noalias() = lw.transpose() * lags;
    r0.noalias() = lw.transpose() * current;
  } else {
    r.noalias() = lags.transpose() * lags;
    r0.noalias() = lags.transpose() * current;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(r);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(ldlt.rcond() > 1e-14)) {
    throw NumericalError("degenerate residuals: autoregressive normal equations are singular");
  }
  return ldlt.solve(r0);
}

double weighted_sigma2(const Eigen::VectorXd& a, const Eigen::VectorXd* weights) {
  if (a.size() == 0) throw DimensionError("sigma2 update needs at least one innovation");
  if (weights && weights->size() != a.size()) throw DimensionError("weight vector length mismatch");
  const double ss = weights ? weights->dot(a.cwiseAbs2()) : a.squaredNorm();
  const double s2 = ss / static_cast<double>(a.size());
  return s2 < kSigma2Floor ? kSigma2Floor : s2;
}

class Engine {
public:
  Engine(const TimeSeriesDataset& data, const ModelSpec& model, const PenaltySpec& penalty,
         const SolverOptions& options, bool robust)
      : data_(data), model_(model), penalty_(penalty), options_(options), robust_(robust) {
    model_.validate(data_);
    penalty_.validate();
    options_.validate();
    z_ = design_matrix(data_, model_.intercept);
    t_eff_ = data_.size() - model_.p;
    offset_ = model_.intercept ? 1 : 0;
  }

  FitResult run() {
    ParameterState s = options_.init ? *options_.init : ols_start(data_, model_);
    check_init(s);
    if (robust_) {
      if (!s.nu || model_.family.kind == Family::TFixed) s.nu = model_.family.nu;
    } else {
      s.nu.reset();
    }

    FitResult out;
    out.model = model_;
    out.penalty = penalty_;
    out.effective_size = t_eff_;
    out.active_set.assign(static_cast<std::size_t>(z_.cols()), true);

    Eigen::VectorXd e = data_.y - z_ * s.beta;
    Eigen::VectorXd a = ar_filter(e, s.phi);
    double obj = objective(a, s);
    if (options_.record_trace) out.trace.push_back(obj);

    EStepWeights w;
    for (int k = 1; k <= options_.max_iter; ++k) {
      if (robust_) w = estep(a, s.sigma2, *s.nu);

      LqaMatrix omega = full_lqa(s.beta, out.active_set);
      // The quadratic surrogate enters the likelihood scale, so the
      // penalty is weighed against sum(w a^2) / (2 sigma2).
      for (Eigen::Index i = 0; i < omega.size(); ++i) {
        if (omega.active[static_cast<std::size_t>(i)]) omega.diag[i] *= s.sigma2;
      }

      const Eigen::MatrixXd zf = ar_filter_columns(z_, s.phi);
      const Eigen::VectorXd yf = ar_filter(data_.y, s.phi);
      ParameterState next;
      next.beta = robust_ ? beta_update(zf, yf, omega, w.s1, t_eff_)
                          : beta_update(zf, yf, omega, t_eff_);
      e = data_.y - z_ * next.beta;
      next.phi = robust_ ? phi_update(e, model_.p, w.s1) : phi_update(e, model_.p);
      a = ar_filter(e, next.phi);
      next.sigma2 = robust_ ? sigma2_update(a, w.s1) : sigma2_update(a);
      next.nu = s.nu;
      if (robust_ && model_.family.kind == Family::TEstimated) {
        const NuUpdate nu = nu_update(w, options_.nu_bracket);
        next.nu = nu.nu;
        out.nu_bracketed = out.nu_bracketed && nu.bracketed;
      }
      if (!is_stationary(next.phi)) ++out.stationarity_violations;

      double change2 = (next.beta - s.beta).squaredNorm() + (next.phi - s.phi).squaredNorm() +
                       std::pow(next.sigma2 - s.sigma2, 2);
      if (robust_) change2 += std::pow(*next.nu - *s.nu, 2);
      s = std::move(next);
      out.iterations = k;
      out.last_change = std::sqrt(change2);
      obj = objective(a, s);
      if (options_.record_trace) out.trace.push_back(obj);
      if (!std::isfinite(obj)) throw NumericalError("objective became non-finite during iteration");
      // A coefficient waiting to be pruned still changes the active set on
      // the next sweep, so the fit is not settled yet.
      if (out.last_change < options_.eta && !pending_prune(s.beta, out.active_set)) {
        out.converged = true;
        break;
      }
    }

    for (Eigen::Index i = 0; i < s.beta.size(); ++i) {
      if (s.beta[i] == 0.0 && i >= offset_ && penalty_.is_active()) {
        out.active_set[static_cast<std::size_t>(i)] = false;
      }
    }
    out.loglik = loglik(a, s);
    out.objective = obj;
    out.stationarity_ok = is_stationary(s.phi);
    if (robust_) out.weights = estep(a, s.sigma2, *s.nu);
    out.state = std::move(s);
    out.bic = bic(out, static_cast<int>(t_eff_));
    return out;
  }

private:
  void check_init(const ParameterState& s) const {
    if (s.beta.size() != z_.cols()) {
      throw DimensionError(fmt::format("initial beta has length {}, expected {}", s.beta.size(),
                                       z_.cols()));
    }
    if (s.phi.size() != model_.p) {
      throw DimensionError(fmt::format("initial phi has length {}, expected {}", s.phi.size(),
                                       model_.p));
    }
    if (!(s.sigma2 > 0.0)) throw ConfigError("initial sigma2 must be positive");
  }

  bool pending_prune(const Eigen::VectorXd& beta, const std::vector<bool>& active) const {
    if (!penalty_.is_active()) return false;
    for (Eigen::Index i = offset_; i < beta.size(); ++i) {
      const double b = std::abs(beta[i]);
      if (active[static_cast<std::size_t>(i)] && b > 0.0 && b <= options_.prune_eps) return true;
    }
    return false;
  }

  LqaMatrix full_lqa(const Eigen::VectorXd& beta, std::vector<bool>& active) const {
    const Eigen::Index m = beta.size() - offset_;
    const LqaMatrix inner = lqa_matrix(penalty_, beta.tail(m), options_.prune_eps);
    LqaMatrix omega{Eigen::VectorXd::Zero(beta.size()),
                    std::vector<bool>(static_cast<std::size_t>(beta.size()), true)};
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto at = static_cast<std::size_t>(i + offset_);
      const bool on = active[at] && inner.active[static_cast<std::size_t>(i)];
      active[at] = on;
      omega.active[at] = on;
      omega.diag[i + offset_] = on ? inner.diag[i] : std::numeric_limits<double>::infinity();
    }
    return omega;
  }

  double loglik(const Eigen::VectorXd& a, const ParameterState& s) const {
    return robust_ ? t_loglik(a, s.sigma2, *s.nu) : normal_loglik(a, s.sigma2);
  }

  double objective(const Eigen::VectorXd& a, const ParameterState& s) const {
    const Eigen::Index m = s.beta.size() - offset_;
    return -loglik(a, s) +
           static_cast<double>(t_eff_) * penalty_value(penalty_, Eigen::VectorXd(s.beta.tail(m)));
  }

  const TimeSeriesDataset& data_;
  ModelSpec model_;
  PenaltySpec penalty_;
  SolverOptions options_;
  bool robust_;
  Eigen::MatrixXd z_;
  Eigen::Index t_eff_ = 0;
  Eigen::Index offset_ = 0;
};

}  // namespace

Eigen::VectorXd beta_update(const Eigen::MatrixXd& filtered_x, const Eigen::VectorXd& filtered_y,
                            const LqaMatrix& omega, Eigen::Index t_eff) {
  return solve_penalized(filtered_x, filtered_y, omega, nullptr, t_eff);
}

Eigen::VectorXd beta_update(const Eigen::MatrixXd& filtered_x, const Eigen::VectorXd& filtered_y,
                            const LqaMatrix& omega, const Eigen::VectorXd& weights,
                            Eigen::Index t_eff) {
  return solve_penalized(filtered_x, filtered_y, omega, &weights, t_eff);
}

Eigen::VectorXd phi_update(const Eigen::VectorXd& e, int p) { return solve_phi(e, p, nullptr); }

Eigen::VectorXd phi_update(const Eigen::VectorXd& e, int p, const Eigen::VectorXd& weights) {
  return solve_phi(e, p, &weights);
}

double sigma2_update(const Eigen::VectorXd& innovations) {
  return weighted_sigma2(innovations, nullptr);
}

double sigma2_update(const Eigen::VectorXd& innovations, const Eigen::VectorXd& weights) {
  return weighted_sigma2(innovations, &weights);
}

EStepWeights estep(const Eigen::VectorXd& innovations, double sigma2, double nu) {
  if (!(sigma2 > 0.0)) throw NumericalError("E-step needs sigma2 > 0");
  if (!(nu > 0.0)) throw NumericalError("E-step needs nu > 0");
  EStepWeights w;
  w.kappa2 = innovations.array().square() / sigma2;
  w.s1 = ((nu + 1.0) / (nu + w.kappa2.array())).matrix();
  const double dg = digamma(0.5 * (nu + 1.0));
  w.s2 = (dg - (0.5 * (nu + w.kappa2.array())).log()).matrix();
  return w;
}

double nu_score(const EStepWeights& weights, double nu) {
  const double half = 0.5 * nu;
  return digamma(half) - std::log(half) - 1.0 + weights.s1.mean() - weights.s2.mean();
}

NuUpdate nu_update(const EStepWeights& weights, const NuBracket& bracket) {
  if (!(bracket.low > 0.0) || !(bracket.low < bracket.high)) {
    throw ConfigError(fmt::format("invalid nu bracket [{}, {}]", bracket.low, bracket.high));
  }
  if (weights.s1.size() == 0 || weights.s1.size() != weights.s2.size()) {
    throw DimensionError("E-step weights are empty or inconsistent");
  }
  double lo = bracket.low;
  double hi = bracket.high;
  double g_lo = nu_score(weights, lo);
  const double g_hi = nu_score(weights, hi);
  if (g_lo == 0.0) return {lo, true};
  if (g_hi == 0.0) return {hi, true};
  if ((g_lo < 0.0) == (g_hi < 0.0)) {
    return {std::abs(g_lo) <= std::abs(g_hi) ? lo : hi, false};
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double g = nu_score(weights, mid);
    if (std::abs(g) < 1e-8 || hi - lo < 1e-8) break;
    if ((g < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g;
    } else {
      hi = mid;
    }
  }
  return {mid, true};
}

ParameterState ols_start(const TimeSeriesDataset& data, const ModelSpec& model) {
  const Eigen::MatrixXd z = design_matrix(data, model.intercept);
  Eigen::MatrixXd gram = z.transpose() * z;
  const Eigen::VectorXd moment = z.transpose() * data.y;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(ldlt.rcond() > 1e-14)) {
    gram.diagonal().array() += 1e-8;
    ldlt.compute(gram);
  }
  ParameterState s;
  s.beta = ldlt.solve(moment);
  s.phi = Eigen::VectorXd::Zero(model.p);
  const Eigen::VectorXd e = data.y - z * s.beta;
  s.sigma2 = std::max(e.squaredNorm() / static_cast<double>(data.size()), kSigma2Floor);
  if (model.family.is_t()) s.nu = model.family.nu;
  return s;
}

FitResult fit_normal(const TimeSeriesDataset& data, const ModelSpec& model,
                     const PenaltySpec& penalty, const SolverOptions& options) {
  return Engine(data, model, penalty, options, false).run();
}

FitResult fit_t_ecm(const TimeSeriesDataset& data, const ModelSpec& model,
                    const PenaltySpec& penalty, const SolverOptions& options) {
  if (!model.family.is_t()) throw ConfigError("fit_t_ecm needs a t error family");
  return Engine(data, model, penalty, options, true).run();
}

FitResult fit(const TimeSeriesDataset& data, const ModelSpec& model, const PenaltySpec& penalty,
              const SolverOptions& options) {
  return model.family.is_t() ? fit_t_ecm(data, model, penalty, options)
                             : fit_normal(data, model, penalty, options);
}

}  // namespace arpen
