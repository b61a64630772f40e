#pragma once

#include "arpen/model.hpp"

#include <Eigen/Dense>

#include <random>

namespace arpen::test {

/// y = X beta + AR(p) Gaussian noise, with standard normal covariates.
inline TimeSeriesDataset random_dataset(std::uint64_t seed, Eigen::Index n, const Eigen::VectorXd& beta,
                                        const Eigen::VectorXd& phi = Eigen::VectorXd(0),
                                        double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x(n, beta.size());
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) x(t, j) = z(rng);
  }
  const Eigen::Index burn = 50;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n + burn);
  for (Eigen::Index t = 0; t < n + burn; ++t) {
    double v = sigma * z(rng);
    for (Eigen::Index j = 0; j < phi.size() && t - j - 1 >= 0; ++j) v += phi[j] * e[t - j - 1];
    e[t] = v;
  }
  return make_dataset(x * beta + e.tail(n), x);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace arpen::test
