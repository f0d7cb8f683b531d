#pragma once

#include <vector>

#include "exhawkes/marks/distributions.hpp"

namespace exhawkes::marks {

// Per-event covariates entering the mark links: unit time, population of the
// nearest city and the distance to it (unit coordinates).
struct MarkCovariates {
  double t{0.0};
  double population{0.0};
  double distance{0.0};
};

// Coefficients act on the design (1, t, population * exp(-a d)); theta_beta and
// theta_sigma use its first 1..3 entries, theta_xi its first 1..2.
struct LinkCoefficients {
  std::vector<double> theta_beta{0.0};
  std::vector<double> theta_xi{0.0};
  std::vector<double> theta_sigma{0.0};
  double a_beta{0.0};
  double a_sigma{0.0};
  void validate() const;
};

struct LinkedParams {
  double beta{1.0};
  double xi{1.0};
  double sigma{1.0};
};

[[nodiscard]] LinkedParams link_params(const LinkCoefficients& c, const MarkCovariates& z);

struct MarkModel {
  double pi_m{0.5};
  int u{2};
  BodyFamily body{BodyFamily::zip};
  TailFamily tail{TailFamily::gzd};
  GpdMode gpd_mode{GpdMode::density};
  double alpha{0.0};
  double r{1.0};  // ZINB, unlinked
  double p{0.5};
  LinkCoefficients links;

  [[nodiscard]] MarkMixture resolve(const MarkCovariates& z) const;
  // convenience for a model without covariates
  [[nodiscard]] static MarkModel from_mixture(const MarkMixture& mix);
};

}  // namespace exhawkes::marks
