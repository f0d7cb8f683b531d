#include "exhawkes/inference/hybrid.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "exhawkes/core/log.hpp"
#include "exhawkes/core/stats.hpp"
#include "exhawkes/inference/diagnostics.hpp"

namespace exhawkes::inference {
namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double normal_prior(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += stats::normal_logpdf(v, 0.0, 1.0);
  return s;
}

}  // namespace

void McmcConfig::validate() const {
  if (n_samples <= burn_in) throw std::invalid_argument("n_samples must exceed burn_in");
  if (thin < 1) throw std::invalid_argument("thin must be at least 1");
  if (leapfrog < 1 || !(step_size > 0.0)) throw std::invalid_argument("HMC needs L >= 1 and eps > 0");
  if (particles < 1) throw std::invalid_argument("at least one particle per source is needed");
  if (!(am_epsilon > 0.0) || !(am_initial_sd > 0.0)) throw std::invalid_argument("AM needs epsilon > 0 and sd > 0");
  if (!(mh_initial_scale > 0.0)) throw std::invalid_argument("MH scale must be positive");
  if (adapt_every < 1) throw std::invalid_argument("adapt_every must be at least 1");
  if (momentum_from_prior && momentum_cov.size() != 0)
    throw std::invalid_argument("momentum_from_prior and an explicit momentum covariance are exclusive");
}

double update_theta_mu_conjugate(std::size_t n_background, double volume, Rng& rng) {
  if (!(volume > 0.0)) throw std::invalid_argument("domain volume must be positive");
  std::gamma_distribution<double> g(double(n_background) + 1.0, 1.0 / (1.0 + volume));
  return g(rng);
}

double baseline_log_target(const baseline::BaselineLikelihood& lik, std::span<const std::size_t> background,
                           const Eigen::VectorXd& theta, bool use_likelihood) {
  double lp = normal_prior(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())));
  if (!use_likelihood) return lp;
  try {
    return lp + lik.log_density(background, theta);
  } catch (const std::overflow_error&) {
    return -std::numeric_limits<double>::infinity();
  }
}

bool update_theta_mu(const baseline::BaselineLikelihood& lik, std::span<const std::size_t> background,
                     Eigen::VectorXd& theta, double scale, Rng& rng, bool use_likelihood) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd prop = theta;
  for (Eigen::Index k = 0; k < prop.size(); ++k) prop[k] += scale * z(rng);
  const double cur = baseline_log_target(lik, background, theta, use_likelihood);
  const double nxt = baseline_log_target(lik, background, prop, use_likelihood);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double log_u = std::log(u(rng));
  if (std::isfinite(nxt) && log_u < nxt - cur) {
    theta = prop;
    return true;
  }
  return false;
}

double omega_log_prior(const Eigen::VectorXd& omega, const Eigen::VectorXd& eta, double a, double gamma) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    const double v = eta[i] / (a * eta[i] + gamma);
    s -= 0.5 * (std::log(2.0 * std::numbers::pi * v) + omega[i] * omega[i] / v);
  }
  return s;
}

HybridSampler::HybridSampler(PointPattern unit_pattern, baseline::BaselineDesign design, TriggerSpec trigger,
                             McmcConfig config, baseline::QuadratureOptions quadrature)
    : pattern_(std::move(unit_pattern)), trigger_(std::move(trigger)), config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  if (!pattern_.domain().is_unit()) throw std::invalid_argument("the sampler expects a unit-scaled pattern");
  if (config_.baseline_update == BaselineUpdate::conjugate && !design.is_intercept_only())
    throw std::invalid_argument("the conjugate baseline update needs an intercept-only design");
  trigger_.kernel.validate();
  trigger_.grid.validate();
  trigger_.decompose.fixed_rank = true;
  baseline_ = baseline::BaselineLikelihood(pattern_, std::move(design), quadrature);
  hmc_step_ = config_.step_size;
  mh_scale_ = config_.mh_initial_scale;
  const std::size_t d = 2 + (config_.sample_kernel ? trigger_.kernel.hyperparameter_names().size() : 0);
  am_ = AdaptiveMetropolis(d, config_.am_start, config_.am_epsilon, config_.am_initial_sd);
  chain_.names = column_names();
  chain_.seed = config_.seed;
  chain_.n_samples = config_.n_samples;
  chain_.burn_in = config_.burn_in;
  chain_.thin = config_.thin;
  for (const char* block : {"branching", "baseline", "omega", "hypers"}) chain_.acceptance[block] = {};
}

std::vector<std::string> HybridSampler::column_names() const {
  std::vector<std::string> names;
  for (const auto& n : baseline_.design().names()) names.push_back("theta_mu_" + n);
  names.push_back("log_a");
  names.push_back("log_gamma");
  for (const auto& n : trigger_.kernel.hyperparameter_names()) names.push_back(n);
  for (std::size_t i = 0; i < trigger_.rank; ++i) names.push_back("omega_" + std::to_string(i + 1));
  names.push_back("n_background");
  names.push_back("log_lik");
  names.push_back("log_post");
  return names;
}

HawkesState HybridSampler::initial_state() {
  HawkesState s;
  const auto d = static_cast<Eigen::Index>(baseline_.design().size());
  s.theta_mu = Eigen::VectorXd::Zero(d);
  const double n = std::max<double>(1.0, double(pattern_.size()));
  if (baseline_.design().is_intercept_only() || pattern_.size() <= static_cast<std::size_t>(d) + 1) {
    s.theta_mu[0] = std::log(n);
  } else {
    try {
      s.theta_mu = baseline::mle_fit_baseline(pattern_, baseline_.design()).theta;
    } catch (const std::exception& e) {
      log::warn(std::string("baseline MLE start failed, using log n: ") + e.what());
      s.theta_mu[0] = std::log(n);
    }
  }
  s.log_a = 0.0;
  s.log_gamma = 0.0;
  s.theta_k = trigger_.kernel.log_hyperparameters();
  s.branching = BranchingStructure::all_background(pattern_.size());
  state_ = s;
  have_state_ = true;
  ensure_basis();
  state_.omega = gp::sample_omega_prior(*basis_, 1.0, 1.0, rng_);
  return state_;
}

void HybridSampler::set_state(HawkesState state) {
  if (static_cast<std::size_t>(state.theta_mu.size()) != baseline_.design().size())
    throw std::invalid_argument("theta_mu has the wrong size");
  if (static_cast<std::size_t>(state.omega.size()) != trigger_.rank) throw std::invalid_argument("omega has the wrong size");
  if (state.theta_k.size() != trigger_.kernel.hyperparameter_names().size())
    throw std::invalid_argument("theta_K has the wrong size");
  if (state.branching.size() != pattern_.size()) throw std::invalid_argument("branching has the wrong size");
  const auto times = pattern_.times();
  state.branching.validate(times);
  state_ = std::move(state);
  have_state_ = true;
  ensure_basis();
}

void HybridSampler::ensure_basis() {
  if (basis_ && basis_theta_ == state_.theta_k) return;
  const auto kernel = trigger_.kernel.with_log_hyperparameters(state_.theta_k);
  basis_ = std::make_shared<const gp::EigenBasis>(gp::decompose(kernel, trigger_.grid, trigger_.rank, trigger_.decompose));
  basis_theta_ = state_.theta_k;
  cache_valid_ = false;
}

void HybridSampler::ensure_pair_cache() {
  ensure_basis();
  if (cache_valid_) return;
  cache_.build(pattern_, *basis_);
  cache_valid_ = true;
}

std::vector<double> HybridSampler::hyper_vector() const {
  std::vector<double> x{state_.log_a, state_.log_gamma};
  if (config_.sample_kernel) x.insert(x.end(), state_.theta_k.begin(), state_.theta_k.end());
  return x;
}

void HybridSampler::step_branching() {
  ensure_pair_cache();
  const Eigen::VectorXd mu = baseline_.mu(state_.theta_mu);
  const Eigen::VectorXd phi = cache_.phi(state_.omega, std::exp(state_.log_a));
  state_.branching = sample_branching(pattern_.size(), mu, phi, rng_);
  chain_.acceptance["branching"].record(true);
}

void HybridSampler::step_baseline() {
  const auto background = state_.branching.background_indices();
  if (config_.baseline_update == BaselineUpdate::conjugate) {
    const double mu = update_theta_mu_conjugate(background.size(), 1.0, rng_);
    state_.theta_mu[0] = std::log(mu);
    chain_.acceptance["baseline"].record(true);
    return;
  }
  const bool ok = update_theta_mu(baseline_, background, state_.theta_mu, mh_scale_, rng_, config_.use_likelihood);
  chain_.acceptance["baseline"].record(ok);
  mh_window_.record(ok);
}

void HybridSampler::step_omega() {
  OmegaTarget target;
  target.pairs = &terms_.pairs;
  target.integral = &terms_.integral;
  const double a = std::exp(state_.log_a);
  const double gamma = std::exp(state_.log_gamma);
  const Eigen::VectorXd eta = basis_->eta();
  target.prior_precision = (a * eta.array() + gamma) / eta.array();
  target.a = a;
  target.use_likelihood = config_.use_likelihood;
  HmcSettings hs{config_.leapfrog, hmc_step_, config_.momentum_cov};
  if (config_.momentum_from_prior) hs.momentum_cov = target.prior_precision.asDiagonal();
  const auto res = hmc_update(target, state_.omega, hs, rng_);
  if (res.diverged) ++hmc_divergences_;
  if (res.accepted) state_.omega = res.omega;
  chain_.acceptance["omega"].record(res.accepted);
  hmc_window_.record(res.accepted);
}

void HybridSampler::step_hypers() {
  const auto x_vec = hyper_vector();
  const Eigen::VectorXd x = to_eigen(x_vec);
  const Eigen::VectorXd y = am_.propose(x, rng_);
  const std::size_t nk = state_.theta_k.size();
  std::vector<double> theta_k_new = state_.theta_k;
  if (config_.sample_kernel)
    for (std::size_t k = 0; k < nk; ++k) theta_k_new[k] = y[static_cast<Eigen::Index>(2 + k)];
  const bool kernel_moves = theta_k_new != state_.theta_k;

  std::shared_ptr<const gp::EigenBasis> basis_new = basis_;
  if (kernel_moves) {
    try {
      const auto kernel = trigger_.kernel.with_log_hyperparameters(theta_k_new);
      basis_new = std::make_shared<const gp::EigenBasis>(
          gp::decompose(kernel, trigger_.grid, trigger_.rank, trigger_.decompose));
    } catch (const std::exception& e) {
      log::debug(std::string("AM proposal rejected: ") + e.what());
      chain_.acceptance["hypers"].record(false);
      return;
    }
  }

  TriggerTerms cur = terms_;
  TriggerTerms nxt;
  if (config_.use_likelihood) {
    const auto sources = integral_sources(pattern_, state_.branching, config_.pairs);
    const auto p = static_cast<Eigen::Index>(trigger_.rank);
    cur.integral = Eigen::MatrixXd::Zero(p, p);
    nxt.integral = Eigen::MatrixXd::Zero(p, p);
    if (!sources.empty()) {
      const auto particles = gp::draw_particles(sources, config_.particles, rng_);
      cur.integral = gp::integrate_outer(*basis_, particles);
      nxt.integral = kernel_moves ? gp::integrate_outer(*basis_new, particles) : cur.integral;
    }
    if (kernel_moves) basis_new->features(pair_inputs(pattern_, state_.branching, config_.pairs), nxt.pairs);
    else nxt.pairs = cur.pairs;
  }

  const bool whitened = config_.hyper_move == HyperMove::whitened;
  auto prior_sd = [](const Eigen::VectorXd& h, const gp::EigenBasis& b) {
    const Eigen::ArrayXd eta = b.eta().array();
    return Eigen::VectorXd((eta / (std::exp(h[0]) * eta + std::exp(h[1]))).sqrt());
  };
  Eigen::VectorXd omega_new = state_.omega;
  if (whitened) omega_new = state_.omega.cwiseQuotient(prior_sd(x, *basis_)).cwiseProduct(prior_sd(y, *basis_new));
  // whitened: the N(0, I) density of omega / sd does not depend on the hyperparameters
  auto log_target = [&](const Eigen::VectorXd& h, const gp::EigenBasis& b, const TriggerTerms& t,
                        const Eigen::VectorXd& omega) {
    const double a = std::exp(h[0]);
    const double gamma = std::exp(h[1]);
    double lp = normal_prior(std::span<const double>(h.data(), static_cast<std::size_t>(h.size())));
    if (!whitened) lp += omega_log_prior(omega, b.eta(), a, gamma);
    if (config_.use_likelihood) lp += triggering_loglik(t, omega, a);
    return lp;
  };
  const double lc = log_target(x, *basis_, cur, state_.omega);
  const double ln = log_target(y, *basis_new, nxt, omega_new);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const bool ok = std::isfinite(ln) && std::log(u(rng_)) < ln - lc;
  chain_.acceptance["hypers"].record(ok);
  if (!ok) return;
  state_.log_a = y[0];
  state_.log_gamma = y[1];
  state_.omega = omega_new;
  if (kernel_moves) {
    state_.theta_k = theta_k_new;
    basis_ = basis_new;
    basis_theta_ = theta_k_new;
    cache_valid_ = false;
  }
  if (config_.use_likelihood) terms_ = std::move(nxt);
}

double HybridSampler::log_posterior_terms(double& log_lik) const {
  const auto background = state_.branching.background_indices();
  const double a = std::exp(state_.log_a);
  const double gamma = std::exp(state_.log_gamma);
  log_lik = 0.0;
  if (config_.use_likelihood) {
    log_lik = baseline_.log_density(background, state_.theta_mu) + triggering_loglik(terms_, state_.omega, a);
  }
  double lp = log_lik;
  lp += normal_prior(std::span<const double>(state_.theta_mu.data(), static_cast<std::size_t>(state_.theta_mu.size())));
  lp += normal_prior(hyper_vector());
  lp += omega_log_prior(state_.omega, basis_->eta(), a, gamma);
  return lp;
}

void HybridSampler::record_row() {
  std::vector<double> row;
  row.reserve(chain_.names.size());
  for (Eigen::Index k = 0; k < state_.theta_mu.size(); ++k) row.push_back(state_.theta_mu[k]);
  row.push_back(state_.log_a);
  row.push_back(state_.log_gamma);
  row.insert(row.end(), state_.theta_k.begin(), state_.theta_k.end());
  for (Eigen::Index k = 0; k < state_.omega.size(); ++k) row.push_back(state_.omega[k]);
  row.push_back(double(state_.branching.background_count()));
  double log_lik = 0.0;
  const double lp = log_posterior_terms(log_lik);
  row.push_back(log_lik);
  row.push_back(lp);
  chain_.rows.push_back(std::move(row));
}

void HybridSampler::step() {
  if (!have_state_) set_state(initial_state());
  ensure_basis();
  if (config_.update_branching) step_branching();
  if (config_.update_baseline) step_baseline();

  // triggering terms of the current branching; the integral matrix is drawn once for the trajectory
  const auto p = static_cast<Eigen::Index>(trigger_.rank);
  terms_.pairs.resize(0, p);
  terms_.integral = Eigen::MatrixXd::Zero(p, p);
  if (config_.use_likelihood) {
    basis_->features(pair_inputs(pattern_, state_.branching, config_.pairs), terms_.pairs);
    const auto sources = integral_sources(pattern_, state_.branching, config_.pairs);
    if (!sources.empty())
      terms_.integral = gp::integrate_outer(*basis_, gp::draw_particles(sources, config_.particles, rng_));
  }
  if (config_.update_omega) step_omega();
  if (config_.update_hypers && am_.dim() > 0) step_hypers();
  if (am_.dim() > 0) am_.observe(to_eigen(hyper_vector()));

  ++iteration_;
  if (iteration_ <= config_.burn_in && iteration_ % config_.adapt_every == 0) {
    if (config_.adapt_step && hmc_window_.proposed > 0) {
      const double r = hmc_window_.rate();
      if (r < 0.6) hmc_step_ *= 0.7;
      else if (r > 0.9) hmc_step_ *= 1.3;
    }
    if (mh_window_.proposed > 0) mh_scale_ *= std::exp(2.0 * (mh_window_.rate() - 0.234));
    hmc_window_ = {};
    mh_window_ = {};
  }
  if (is_retained(iteration_ - 1, config_.burn_in, config_.thin)) record_row();
}

PosteriorChain HybridSampler::run() {
  if (!have_state_) set_state(initial_state());
  while (iteration_ < config_.n_samples) {
    step();
    if (config_.checkpoint_every > 0 && !config_.checkpoint_path.empty() &&
        iteration_ % config_.checkpoint_every == 0)
      save_checkpoint(config_.checkpoint_path);
  }
  if (!config_.checkpoint_path.empty()) save_checkpoint(config_.checkpoint_path);
  return chain_;
}

void HybridSampler::save_checkpoint(std::ostream& out) const {
  nlohmann::json j;
  j["format"] = "exhawkes_checkpoint";
  j["version"] = 1;
  j["iteration"] = iteration_;
  j["seed"] = config_.seed;
  j["n_samples"] = config_.n_samples;
  j["burn_in"] = config_.burn_in;
  j["thin"] = config_.thin;
  std::ostringstream rng;
  rng << rng_;
  j["rng"] = rng.str();
  j["have_state"] = have_state_;
  if (have_state_) {
    j["state"] = {{"theta_mu", to_std(state_.theta_mu)},
                  {"omega", to_std(state_.omega)},
                  {"log_a", state_.log_a},
                  {"log_gamma", state_.log_gamma},
                  {"theta_k", state_.theta_k},
                  {"parents", state_.branching.parents()}};
  }
  j["hmc_step"] = hmc_step_;
  j["mh_scale"] = mh_scale_;
  j["hmc_window"] = {hmc_window_.proposed, hmc_window_.accepted};
  j["mh_window"] = {mh_window_.proposed, mh_window_.accepted};
  j["hmc_divergences"] = hmc_divergences_;
  j["am"] = am_.to_json();
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& [block, a] : chain_.acceptance) acc[block] = {a.proposed, a.accepted};
  j["acceptance"] = acc;
  j["names"] = chain_.names;
  j["rows"] = chain_.rows;
  out << j.dump() << '\n';
}

void HybridSampler::save_checkpoint(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
    save_checkpoint(out);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot move checkpoint to " + path);
}

void HybridSampler::load_checkpoint(std::istream& in) {
  const auto j = nlohmann::json::parse(in);
  if (j.value("format", "") != "exhawkes_checkpoint") throw std::runtime_error("not a sampler checkpoint");
  if (j.at("names").get<std::vector<std::string>>() != chain_.names)
    throw std::runtime_error("checkpoint columns do not match this model");
  if (j.at("seed").get<std::uint64_t>() != config_.seed || j.at("burn_in").get<std::size_t>() != config_.burn_in ||
      j.at("thin").get<std::size_t>() != config_.thin)
    throw std::runtime_error("checkpoint was written with a different seed, burn-in or thinning");
  iteration_ = j.at("iteration").get<std::size_t>();
  std::istringstream rng(j.at("rng").get<std::string>());
  rng >> rng_;
  if (!rng) throw std::runtime_error("checkpoint rng state is unreadable");
  if (j.at("have_state").get<bool>()) {
    const auto& s = j.at("state");
    HawkesState st;
    st.theta_mu = to_eigen(s.at("theta_mu").get<std::vector<double>>());
    st.omega = to_eigen(s.at("omega").get<std::vector<double>>());
    st.log_a = s.at("log_a").get<double>();
    st.log_gamma = s.at("log_gamma").get<double>();
    st.theta_k = s.at("theta_k").get<std::vector<double>>();
    st.branching = BranchingStructure(s.at("parents").get<std::vector<std::ptrdiff_t>>());
    set_state(std::move(st));
  } else {
    have_state_ = false;
  }
  hmc_step_ = j.at("hmc_step").get<double>();
  mh_scale_ = j.at("mh_scale").get<double>();
  hmc_window_ = {j.at("hmc_window")[0].get<std::uint64_t>(), j.at("hmc_window")[1].get<std::uint64_t>()};
  mh_window_ = {j.at("mh_window")[0].get<std::uint64_t>(), j.at("mh_window")[1].get<std::uint64_t>()};
  hmc_divergences_ = j.at("hmc_divergences").get<std::uint64_t>();
  am_ = AdaptiveMetropolis::from_json(j.at("am"));
  for (const auto& [block, v] : j.at("acceptance").items())
    chain_.acceptance[block] = {v[0].get<std::uint64_t>(), v[1].get<std::uint64_t>()};
  chain_.rows = j.at("rows").get<std::vector<std::vector<double>>>();
}

void HybridSampler::load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  load_checkpoint(in);
}

nlohmann::json HybridSampler::diagnostics() const {
  auto j = chain_diagnostics(chain_);
  j["hmc_step_size"] = hmc_step_;
  j["hmc_divergences"] = hmc_divergences_;
  j["mh_scale"] = mh_scale_;
  const Eigen::MatrixXd c = am_.proposal_covariance();
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < c.rows(); ++r) rows.push_back(to_std(c.row(r).transpose()));
  j["am_proposal_covariance"] = rows;
  j["rank"] = trigger_.rank;
  j["kernel"] = basis_ ? basis_->kernel().describe() : trigger_.kernel.describe();
  return j;
}

PosteriorChain run_hybrid_mcmc(const PointPattern& unit_pattern, const baseline::BaselineDesign& design,
                               const TriggerSpec& trigger, const McmcConfig& config,
                               const baseline::QuadratureOptions& quadrature) {
  HybridSampler sampler(unit_pattern, design, trigger, config, quadrature);
  return sampler.run();
}

}  // namespace exhawkes::inference
