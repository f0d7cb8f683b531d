#include "exhawkes/inference/hmc.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "exhawkes/core/log.hpp"
#include "exhawkes/inference/likelihood.hpp"

namespace exhawkes::inference {

double OmegaTarget::potential(const Eigen::VectorXd& omega) const {
  double u = 0.5 * (prior_precision.array() * omega.array().square()).sum();
  if (!use_likelihood) return u;
  if (pairs && pairs->rows() > 0) {
    const Eigen::VectorXd f = *pairs * omega;
    for (Eigen::Index k = 0; k < f.size(); ++k) u -= std::log(a * std::max(f[k] * f[k], kPhiFloor));
  }
  if (integral) u += a * omega.dot(*integral * omega);
  return u;
}

Eigen::VectorXd OmegaTarget::gradient(const Eigen::VectorXd& omega) const {
  Eigen::VectorXd g = prior_precision.cwiseProduct(omega);
  if (!use_likelihood) return g;
  if (pairs && pairs->rows() > 0) {
    Eigen::VectorXd f = *pairs * omega;
    // d/domega log (omega^T e)^2 = 2 e / (omega^T e); floored pairs are flat
    for (Eigen::Index k = 0; k < f.size(); ++k) f[k] = f[k] * f[k] < kPhiFloor ? 0.0 : 2.0 / f[k];
    g.noalias() -= pairs->transpose() * f;
  }
  if (integral) g.noalias() += a * (*integral + integral->transpose()) * omega;
  return g;
}

HmcResult hmc_update(const OmegaTarget& target, const Eigen::VectorXd& omega, const HmcSettings& settings, Rng& rng) {
  if (settings.leapfrog < 1 || !(settings.step_size > 0.0)) throw std::invalid_argument("HMC needs L >= 1 and eps > 0");
  const auto d = omega.size();
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd rho(d);
  for (Eigen::Index i = 0; i < d; ++i) rho[i] = z(rng);

  const bool identity = settings.momentum_cov.size() == 0;
  Eigen::LLT<Eigen::MatrixXd> chol;
  if (!identity) {
    if (settings.momentum_cov.rows() != d || settings.momentum_cov.cols() != d)
      throw std::invalid_argument("momentum covariance has the wrong size");
    chol.compute(settings.momentum_cov);
    if (chol.info() != Eigen::Success) throw std::invalid_argument("momentum covariance is not positive definite");
    rho = chol.matrixL() * rho;
  }
  auto velocity = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return identity ? r : chol.solve(r); };
  auto kinetic = [&](const Eigen::VectorXd& r) { return 0.5 * r.dot(velocity(r)); };

  HmcResult res;
  res.omega = omega;
  const double h0 = target.potential(omega) + kinetic(rho);
  if (!std::isfinite(h0)) throw std::runtime_error("HMC start state has non-finite energy");

  const double eps = settings.step_size;
  Eigen::VectorXd w = omega;
  Eigen::VectorXd r = rho - 0.5 * eps * target.gradient(w);
  for (int step = 0; step < settings.leapfrog; ++step) {
    w.noalias() += eps * velocity(r);
    const Eigen::VectorXd g = target.gradient(w);
    if (!g.allFinite()) {
      res.diverged = true;
      break;
    }
    r.noalias() -= (step + 1 == settings.leapfrog ? 0.5 : 1.0) * eps * g;
  }
  double h1 = std::numeric_limits<double>::infinity();
  if (!res.diverged) h1 = target.potential(w) + kinetic(r);
  if (!std::isfinite(h1)) {
    res.diverged = true;
    log::debug("HMC trajectory reached a non-finite energy; rejected");
    return res;
  }
  res.accept_prob = std::min(1.0, std::exp(h0 - h1));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < res.accept_prob) {
    res.omega = w;
    res.accepted = true;
  }
  return res;
}

}  // namespace exhawkes::inference
