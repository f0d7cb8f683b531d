#include "exhawkes/gp/trigger.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace exhawkes::gp {

void TriggerParams::validate(std::size_t rank) const {
  if (static_cast<std::size_t>(omega.size()) != rank)
    throw std::invalid_argument("omega has " + std::to_string(omega.size()) + " entries, basis rank is " +
                                std::to_string(rank));
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("trigger scale a must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("regularizer gamma must be positive");
  if (!omega.allFinite()) throw std::invalid_argument("omega must be finite");
}

Eigen::VectorXd omega_prior_variances(const EigenBasis& basis, double a, double gamma) {
  const Eigen::ArrayXd h = basis.eta().array();
  return (h / (a * h + gamma)).matrix();
}

Eigen::VectorXd sample_omega_prior(const EigenBasis& basis, double a, double gamma, Rng& rng) {
  const Eigen::VectorXd var = omega_prior_variances(basis, a, gamma);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w(var.size());
  for (Eigen::Index i = 0; i < var.size(); ++i) w[i] = std::sqrt(var[i]) * normal(rng);
  return w;
}

double phi(const TriggerInput& x, const Eigen::VectorXd& omega, double a, const EigenBasis& basis) {
  if (!(x.dt > 0.0)) throw std::domain_error("triggering needs a positive time lag");
  const double f = omega.dot(basis.features(x));
  return a * f * f;
}

double phi(double dt, double ds, double m, const TriggerParams& params, const EigenBasis& basis) {
  return phi(TriggerInput{dt, ds, m}, params.omega, params.a, basis);
}

ParticleSet draw_particles(std::span<const TriggerSource> roots, std::size_t per_root, Rng& rng) {
  if (per_root == 0) throw std::invalid_argument("particle count must be at least 1");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ParticleSet set;
  const std::size_t total = roots.size() * per_root;
  set.inputs.reserve(total);
  set.weights.reserve(total);
  set.source.reserve(total);
  for (std::size_t r = 0; r < roots.size(); ++r) {
    const TriggerSource& root = roots[r];
    const double horizon = 1.0 - root.t;
    if (!(horizon >= 0.0)) throw std::invalid_argument("root time must lie in [0,1]");
    const double w = horizon / double(per_root);
    for (std::size_t i = 0; i < per_root; ++i) {
      const double t = u(rng) * horizon;
      const Point2 s{u(rng), u(rng)};
      set.inputs.push_back({t, distance(root.s, s), root.m});
      set.weights.push_back(w);
      set.source.push_back(r);
    }
  }
  return set;
}

Eigen::MatrixXd integrate_outer(const EigenBasis& basis, const ParticleSet& particles) {
  Eigen::MatrixXd e;
  basis.features(particles.inputs, e);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(particles.weights.data(),
                                                              static_cast<Eigen::Index>(particles.weights.size()));
  Eigen::MatrixXd out = e.transpose() * w.asDiagonal() * e;
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd integral_outer(const EigenBasis& basis, const TriggerSource& root, std::size_t m, Rng& rng) {
  return integrate_outer(basis, draw_particles(std::span<const TriggerSource>(&root, 1), m, rng));
}

}  // namespace exhawkes::gp
