#include "exhawkes/marks/links.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace exhawkes::marks {
namespace {

double linear_predictor(const std::vector<double>& theta, double t, double c) {
  const double z[3] = {1.0, t, c};
  double eta = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) eta += theta[i] * z[i];
  return eta;
}

double safe_exp(double eta, const char* what, const MarkCovariates& z) {
  if (!std::isfinite(eta) || eta > 700.0 || eta < -700.0) {
    std::ostringstream msg;
    msg << "link for " << what << " saturates: linear predictor " << eta << " at t=" << z.t
        << " population=" << z.population << " distance=" << z.distance;
    throw std::overflow_error(msg.str());
  }
  return std::exp(eta);
}

}  // namespace

void LinkCoefficients::validate() const {
  if (theta_beta.empty() || theta_beta.size() > 3) throw std::invalid_argument("theta_beta needs 1 to 3 entries");
  if (theta_xi.empty() || theta_xi.size() > 2) throw std::invalid_argument("theta_xi needs 1 or 2 entries");
  if (theta_sigma.empty() || theta_sigma.size() > 3) throw std::invalid_argument("theta_sigma needs 1 to 3 entries");
}

LinkedParams link_params(const LinkCoefficients& c, const MarkCovariates& z) {
  c.validate();
  if (!std::isfinite(z.t) || !std::isfinite(z.population) || !std::isfinite(z.distance))
    throw std::invalid_argument("mark covariates must be finite");
  LinkedParams out;
  out.beta = safe_exp(linear_predictor(c.theta_beta, z.t, z.population * std::exp(-c.a_beta * z.distance)), "beta", z);
  out.xi = safe_exp(linear_predictor(c.theta_xi, z.t, 0.0), "xi", z);
  out.sigma =
      safe_exp(linear_predictor(c.theta_sigma, z.t, z.population * std::exp(-c.a_sigma * z.distance)), "sigma", z);
  return out;
}

MarkMixture MarkModel::resolve(const MarkCovariates& z) const {
  const auto lp = link_params(links, z);
  MarkMixture mix;
  mix.pi_m = pi_m;
  mix.u = u;
  mix.body.family = body;
  mix.body.alpha = alpha;
  mix.body.beta = lp.beta;
  mix.body.r = r;
  mix.body.p = p;
  mix.tail.family = tail;
  mix.tail.xi = lp.xi;
  mix.tail.sigma = lp.sigma;
  mix.tail.gpd_mode = gpd_mode;
  return mix;
}

MarkModel MarkModel::from_mixture(const MarkMixture& mix) {
  MarkModel m;
  m.pi_m = mix.pi_m;
  m.u = mix.u;
  m.body = mix.body.family;
  m.tail = mix.tail.family;
  m.gpd_mode = mix.tail.gpd_mode;
  m.alpha = mix.body.alpha;
  m.r = mix.body.r;
  m.p = mix.body.p;
  m.links.theta_beta = {std::log(mix.body.beta)};
  m.links.theta_xi = {mix.tail.xi > 0.0 ? std::log(mix.tail.xi) : -700.0};
  m.links.theta_sigma = {std::log(mix.tail.sigma)};
  return m;
}

}  // namespace exhawkes::marks
