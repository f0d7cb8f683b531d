#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <nlohmann/json.hpp>

#include "exhawkes/core/pattern.hpp"

namespace exhawkes::inference {

// Random-walk proposal whose covariance follows the running covariance of the whole chain
// history: 2.38^2 / d (C_t + epsilon I) once `start` states have been observed, and
// initial_sd^2 I before that.
class AdaptiveMetropolis {
 public:
  AdaptiveMetropolis() = default;
  AdaptiveMetropolis(std::size_t dim, std::size_t start, double epsilon, double initial_sd);

  void observe(const Eigen::VectorXd& x);
  [[nodiscard]] Eigen::VectorXd propose(const Eigen::VectorXd& x, Rng& rng) const;
  [[nodiscard]] Eigen::MatrixXd proposal_covariance() const;

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t count() const { return count_; }
  [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
  // unbiased sample covariance of the observed states (zero before two states)
  [[nodiscard]] Eigen::MatrixXd covariance() const;

  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] static AdaptiveMetropolis from_json(const nlohmann::json& j);

 private:
  std::size_t dim_{0};
  std::size_t start_{500};
  double epsilon_{1e-6};
  double initial_sd_{0.05};
  std::size_t count_{0};
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;  // sum of outer products of deviations
};

}  // namespace exhawkes::inference
