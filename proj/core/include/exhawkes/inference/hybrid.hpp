#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "exhawkes/baseline/baseline.hpp"
#include "exhawkes/core/branching.hpp"
#include "exhawkes/core/chain.hpp"
#include "exhawkes/core/pattern.hpp"
#include "exhawkes/gp/basis.hpp"
#include "exhawkes/gp/trigger.hpp"
#include "exhawkes/inference/adaptive_metropolis.hpp"
#include "exhawkes/inference/hmc.hpp"
#include "exhawkes/inference/likelihood.hpp"

namespace exhawkes::inference {

enum class BaselineUpdate { metropolis, conjugate };
// centered: omega is held fixed while (a, gamma, theta_K) move; whitened: omega / sd is held
// fixed and omega is rescaled to the prior standard deviations of the proposal.
enum class HyperMove { centered, whitened };

struct McmcConfig {
  std::size_t n_samples{25000};  // total iterations, burn-in included
  std::size_t burn_in{2000};
  std::size_t thin{10};
  std::uint64_t seed{1};
  std::size_t particles{1000};  // per triggering source
  // HMC
  int leapfrog{20};
  double step_size{0.01};
  bool adapt_step{true};  // toward 60-90% acceptance during burn-in
  Eigen::MatrixXd momentum_cov;  // empty: identity
  // Sigma = diag((a eta + gamma) / eta) at the current hyperparameters, matching the prior scales
  bool momentum_from_prior{false};
  // adaptive Metropolis on (log a, log gamma, theta_K)
  std::size_t am_start{500};
  double am_epsilon{1e-6};
  double am_initial_sd{0.05};
  bool sample_kernel{true};  // include theta_K in the AM block
  HyperMove hyper_move{HyperMove::whitened};
  // baseline
  BaselineUpdate baseline_update{BaselineUpdate::metropolis};
  double mh_initial_scale{0.1};
  std::size_t adapt_every{50};
  PairStructure pairs{PairStructure::parent};
  bool use_likelihood{true};
  bool update_branching{true};
  bool update_baseline{true};
  bool update_omega{true};
  bool update_hypers{true};
  std::size_t checkpoint_every{0};  // 0: only at the end when a path is set
  std::string checkpoint_path;

  void validate() const;
};

// Structure of the triggering function; theta_K of kernel is the initial value.
struct TriggerSpec {
  gp::CovarianceKernel kernel{gp::CovarianceKernel::separable_rq(0.3, 1.0, 1.0)};
  gp::InducingGrid grid{gp::InducingGrid::uniform(8)};
  std::size_t rank{50};
  gp::DecomposeOptions decompose{};
};

struct HawkesState {
  Eigen::VectorXd theta_mu;
  Eigen::VectorXd omega;
  double log_a{0.0};
  double log_gamma{0.0};
  std::vector<double> theta_k;
  BranchingStructure branching;
};

// Poisson-Gamma update for an intercept-only baseline on a domain of volume v: the constant
// rate is drawn from Gamma(n0 + 1, rate 1 + v), which is Gamma(n0 + 1, 2|V|) on the unit domain.
[[nodiscard]] double update_theta_mu_conjugate(std::size_t n_background, double volume, Rng& rng);

// Baseline log density of the background events plus the N(0, I) prior.
[[nodiscard]] double baseline_log_target(const baseline::BaselineLikelihood& lik,
                                         std::span<const std::size_t> background, const Eigen::VectorXd& theta,
                                         bool use_likelihood = true);
// Gaussian random-walk MH step with proposal sd `scale` per coordinate; returns the accept flag.
bool update_theta_mu(const baseline::BaselineLikelihood& lik, std::span<const std::size_t> background,
                     Eigen::VectorXd& theta, double scale, Rng& rng, bool use_likelihood = true);

// Log prior density of omega ~ N(0, diag(eta / (a eta + gamma))).
[[nodiscard]] double omega_log_prior(const Eigen::VectorXd& omega, const Eigen::VectorXd& eta, double a, double gamma);

// Hybrid Metropolis-within-Gibbs sampler. Each iteration: branching, baseline, omega (HMC),
// then (log a, log gamma, theta_K) by adaptive Metropolis.
class HybridSampler {
 public:
  HybridSampler(PointPattern unit_pattern, baseline::BaselineDesign design, TriggerSpec trigger, McmcConfig config,
                baseline::QuadratureOptions quadrature = {});

  // Background-only start: baseline MLE (or log n), omega = 0 plus a small prior draw,
  // a = gamma = 1 and the kernel of the trigger spec.
  [[nodiscard]] HawkesState initial_state();
  void set_state(HawkesState state);
  [[nodiscard]] const HawkesState& state() const { return state_; }

  void step();
  // runs until n_samples iterations have been done in total (resumes after load_checkpoint)
  PosteriorChain run();
  [[nodiscard]] std::size_t iteration() const { return iteration_; }
  [[nodiscard]] const PosteriorChain& chain() const { return chain_; }
  [[nodiscard]] std::vector<std::string> column_names() const;

  void save_checkpoint(std::ostream& out) const;
  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(std::istream& in);
  void load_checkpoint(const std::string& path);

  // acceptance per block, ESS per column and the final tuning values
  [[nodiscard]] nlohmann::json diagnostics() const;

  [[nodiscard]] const gp::EigenBasis& basis() const { return *basis_; }
  [[nodiscard]] const McmcConfig& config() const { return config_; }
  [[nodiscard]] const PointPattern& pattern() const { return pattern_; }

 private:
  void ensure_basis();
  void ensure_pair_cache();
  void step_branching();
  void step_baseline();
  void step_omega();
  void step_hypers();
  void record_row();
  [[nodiscard]] std::vector<double> hyper_vector() const;
  [[nodiscard]] double log_posterior_terms(double& log_lik) const;

  PointPattern pattern_;
  baseline::BaselineLikelihood baseline_;
  TriggerSpec trigger_;
  McmcConfig config_;
  Rng rng_;

  HawkesState state_;
  bool have_state_{false};
  std::size_t iteration_{0};
  std::shared_ptr<const gp::EigenBasis> basis_;
  std::vector<double> basis_theta_;
  PairCache cache_;
  bool cache_valid_{false};
  Eigen::MatrixXd last_integral_;  // particle integral of the last HMC trajectory
  TriggerTerms terms_;             // pair features of the current branching

  double hmc_step_{0.01};
  double mh_scale_{0.1};
  BlockAcceptance hmc_window_;
  BlockAcceptance mh_window_;
  AdaptiveMetropolis am_;
  PosteriorChain chain_;
  std::uint64_t hmc_divergences_{0};
};

[[nodiscard]] PosteriorChain run_hybrid_mcmc(const PointPattern& unit_pattern, const baseline::BaselineDesign& design,
                                             const TriggerSpec& trigger, const McmcConfig& config,
                                             const baseline::QuadratureOptions& quadrature = {});

}  // namespace exhawkes::inference
