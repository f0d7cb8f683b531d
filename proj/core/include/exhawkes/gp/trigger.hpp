#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "exhawkes/core/pattern.hpp"
#include "exhawkes/gp/basis.hpp"

namespace exhawkes::gp {

// phi = a f^2 with f = omega^T e(x) and omega ~ N(0, diag(eta / (a eta + gamma))).
struct TriggerParams {
  Eigen::VectorXd omega;
  double a{1.0};
  double gamma{0.1};

  void validate(std::size_t rank) const;
};

// Prior variances eta_i / (a eta_i + gamma) of omega.
[[nodiscard]] Eigen::VectorXd omega_prior_variances(const EigenBasis& basis, double a, double gamma);
[[nodiscard]] Eigen::VectorXd sample_omega_prior(const EigenBasis& basis, double a, double gamma, Rng& rng);

// a (omega^T e(x))^2; throws std::domain_error when dt <= 0.
[[nodiscard]] double phi(const TriggerInput& x, const Eigen::VectorXd& omega, double a, const EigenBasis& basis);
[[nodiscard]] double phi(double dt, double ds, double m, const TriggerParams& params, const EigenBasis& basis);

// An event that triggers offspring, on the unit scale.
struct TriggerSource {
  double t{0.0};
  Point2 s;
  double m{0.0};
};

// Weighted particles x' = (u (1 - t_root), |s_root - s|, m_root) with (u, s) uniform on [0,1] x W.
// Each particle carries weight (1 - t_root) |W| / M so that sum w e e^T estimates the integral.
struct ParticleSet {
  std::vector<TriggerInput> inputs;
  std::vector<double> weights;
  std::vector<std::size_t> source;  // index into the roots span
};

[[nodiscard]] ParticleSet draw_particles(std::span<const TriggerSource> roots, std::size_t per_root, Rng& rng);

// sum_i w_i e(x_i) e(x_i)^T over all particles
[[nodiscard]] Eigen::MatrixXd integrate_outer(const EigenBasis& basis, const ParticleSet& particles);

// Single-root estimate of the integral of e e^T over W x [0, 1 - t_root].
[[nodiscard]] Eigen::MatrixXd integral_outer(const EigenBasis& basis, const TriggerSource& root, std::size_t m,
                                             Rng& rng);

}  // namespace exhawkes::gp
