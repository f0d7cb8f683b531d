#pragma once

#include <Eigen/Dense>

#include "exhawkes/core/pattern.hpp"

namespace exhawkes::inference {

// U(omega) = omega^T diag(prior_precision) omega / 2 - sum_k log(a (omega^T e_k)^2) + a omega^T I omega,
// the negative log posterior of omega given the branching, with the integral matrix I held fixed.
// Without the likelihood only the Gaussian term remains.
struct OmegaTarget {
  const Eigen::MatrixXd* pairs{nullptr};     // rows e_k
  const Eigen::MatrixXd* integral{nullptr};  // I
  Eigen::VectorXd prior_precision;           // (a eta + gamma) / eta
  double a{1.0};
  bool use_likelihood{true};

  [[nodiscard]] double potential(const Eigen::VectorXd& omega) const;
  [[nodiscard]] Eigen::VectorXd gradient(const Eigen::VectorXd& omega) const;
};

struct HmcSettings {
  int leapfrog{20};
  double step_size{0.01};
  Eigen::MatrixXd momentum_cov;  // empty: identity
};

struct HmcResult {
  Eigen::VectorXd omega;
  bool accepted{false};
  bool diverged{false};  // non-finite energy during the trajectory
  double accept_prob{0.0};
};

// One leapfrog trajectory with H = U + rho^T Sigma^-1 rho / 2 and rho ~ N(0, Sigma).
[[nodiscard]] HmcResult hmc_update(const OmegaTarget& target, const Eigen::VectorXd& omega,
                                   const HmcSettings& settings, Rng& rng);

}  // namespace exhawkes::inference
