#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exhawkes/core/chain.hpp"
#include "exhawkes/marks/links.hpp"

namespace exhawkes::marks {

struct MarkData {
  std::vector<long> marks;
  std::vector<MarkCovariates> covariates;  // empty, or one entry per mark
};

struct MarkModelSpec {
  BodyFamily body{BodyFamily::zip};
  TailFamily tail{TailFamily::gzd};
  GpdMode gpd_mode{GpdMode::density};
  int u{2};
  std::size_t n_beta{1};   // 1..3 entries of (1, t, c)
  std::size_t n_xi{1};     // 1..2 entries of (1, t)
  std::size_t n_sigma{1};  // 1..3
  void validate() const;
};

struct MarkMhConfig {
  std::size_t n_samples{50000};  // total iterations, burn-in included
  std::size_t burn_in{2000};
  std::size_t thin{10};
  std::uint64_t seed{1};
  bool use_likelihood{true};
  double initial_step{0.1};
  std::size_t adapt_every{100};
  std::size_t stall_window{2000};  // zero acceptances over this many iterations is an error
};

// Unconstrained parameter layout: logit pi_M, logit alpha, then theta_beta (ZIP)
// or log r, logit p (ZINB), theta_xi, theta_sigma, log a_beta and log a_sigma
// when the population term is present. Every coordinate has a N(0,1) prior.
[[nodiscard]] std::vector<std::string> mark_parameter_names(const MarkModelSpec& spec);
[[nodiscard]] MarkModel model_from_unconstrained(const MarkModelSpec& spec, std::span<const double> x);
[[nodiscard]] std::vector<double> unconstrained_from_model(const MarkModelSpec& spec, const MarkModel& model);
// Natural-scale values in the order of mark_parameter_names.
[[nodiscard]] std::vector<double> natural_parameters(const MarkModelSpec& spec, std::span<const double> x);
[[nodiscard]] MarkModel model_from_natural(const MarkModelSpec& spec, std::span<const double> natural);

[[nodiscard]] double mark_log_likelihood(const MarkData& data, const MarkModel& model);
[[nodiscard]] double mark_log_prior(std::span<const double> x);

// Chain columns: natural-scale parameters, then log_lik and log_post.
[[nodiscard]] PosteriorChain mark_mh_sampler(const MarkData& data, const MarkModelSpec& spec,
                                             const MarkMhConfig& config);

// DIC = 2 mean(D) - D(mode)
[[nodiscard]] double dic(std::span<const double> deviances, double deviance_at_mode);
// Deviance is -2 log posterior (unnormalized) recomputed for every row; the mode
// is the retained row with the highest log posterior.
[[nodiscard]] double dic(const PosteriorChain& chain, const MarkData& data, const MarkModelSpec& spec);

}  // namespace exhawkes::marks
