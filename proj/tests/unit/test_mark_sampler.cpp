#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "exhawkes/core/stats.hpp"
#include "exhawkes/marks/sampler.hpp"
#include "oracles.hpp"

using namespace exhawkes;
using namespace exhawkes::marks;

namespace {

double logit(double p) { return std::log(p / (1 - p)); }

MarkData draw_data(const MarkModel& model, std::size_t n, std::uint64_t seed, bool with_time) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MarkData data;
  for (std::size_t i = 0; i < n; ++i) {
    MarkCovariates z{with_time ? u(rng) : 0.0, 0.0, 0.0};
    data.marks.push_back(MarkDistribution(model.resolve(z)).sample(rng));
    if (with_time) data.covariates.push_back(z);
  }
  return data;
}

}  // namespace

TEST(MarkSampler, PriorRecoveryWithoutLikelihood) {
  MarkModelSpec spec;
  spec.n_beta = 2;
  MarkMhConfig cfg;
  cfg.n_samples = 60000;
  cfg.burn_in = 2000;
  cfg.thin = 1;
  cfg.use_likelihood = false;
  cfg.initial_step = 1.0;
  cfg.seed = 17;
  const auto chain = mark_mh_sampler({}, spec, cfg);
  for (const auto& name : mark_parameter_names(spec)) {
    auto col = chain.column(name);
    if (name == "pi_m" || name == "alpha")
      for (auto& v : col) v = logit(v);
    const auto indep = oracle::thin_to_independent(col);
    const double d = oracle::ks_statistic(indep, oracle::standard_normal_cdf);
    EXPECT_GT(oracle::ks_pvalue(d, indep.size()), 0.01) << name << " n=" << indep.size();
  }
}

TEST(MarkSampler, ThinningBookkeeping) {
  MarkModelSpec spec;
  MarkMhConfig cfg;
  cfg.n_samples = 50000;
  cfg.burn_in = 0;
  cfg.thin = 10;
  cfg.use_likelihood = false;
  const auto chain = mark_mh_sampler({}, spec, cfg);
  EXPECT_EQ(chain.size(), 5000u);
  EXPECT_EQ(chain.names.back(), "log_post");
}

TEST(MarkSampler, StalledBlockIsReported) {
  MarkModelSpec spec;
  MarkMhConfig cfg;
  cfg.n_samples = 5000;
  cfg.burn_in = 1;
  cfg.thin = 1;
  cfg.use_likelihood = false;
  cfg.initial_step = 1e8;
  cfg.stall_window = 300;
  EXPECT_THROW((void)mark_mh_sampler({}, spec, cfg), std::runtime_error);
}

TEST(MarkSampler, CredibleIntervalCoverage) {
  MarkModel truth;
  truth.pi_m = 0.415;
  truth.alpha = 0.131;
  truth.links.theta_beta = {0.648};
  truth.links.theta_xi = {-0.744};
  truth.links.theta_sigma = {1.233};
  MarkModelSpec spec;
  const auto names = mark_parameter_names(spec);
  const std::vector<double> truth_natural{0.415, 0.131, 0.648, -0.744, 1.233};
  std::vector<int> covered(names.size(), 0);
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    const auto data = draw_data(truth, 2000, 1000 + r, false);
    MarkMhConfig cfg;
    cfg.n_samples = 12000;
    cfg.burn_in = 2000;
    cfg.thin = 5;
    cfg.seed = 77 + r;
    const auto chain = mark_mh_sampler(data, spec, cfg);
    for (std::size_t j = 0; j < names.size(); ++j) {
      const auto col = chain.column(names[j]);
      const double lo = stats::quantile(col, 0.025), hi = stats::quantile(col, 0.975);
      covered[j] += (lo <= truth_natural[j] && truth_natural[j] <= hi);
    }
  }
  // nominal 19 of 20 less two binomial standard deviations
  for (std::size_t j = 0; j < names.size(); ++j) EXPECT_GE(covered[j], 17) << names[j];
}

TEST(Dic, FormulaArithmetic) {
  const double dev[] = {10.0, 14.0};
  EXPECT_EQ(dic(dev, 9.0), 15.0);
  const double one[] = {7.5};
  EXPECT_EQ(dic(one, 7.5), 7.5);
}

TEST(Dic, SingleSampleChainEqualsDeviance) {
  MarkModelSpec spec;
  MarkModel m;
  m.pi_m = 0.4;
  m.alpha = 0.2;
  m.links.theta_beta = {0.5};
  m.links.theta_xi = {-0.5};
  m.links.theta_sigma = {1.0};
  const auto data = draw_data(m, 300, 3, false);
  PosteriorChain chain;
  chain.names = mark_parameter_names(spec);
  chain.rows.push_back({0.4, 0.2, 0.5, -0.5, 1.0});
  const double d =
      -2.0 * (mark_log_likelihood(data, m) + mark_log_prior(unconstrained_from_model(spec, m)));
  EXPECT_NEAR(dic(chain, data, spec), d, 1e-9 * std::abs(d));
}

TEST(Dic, GeneratingModelPreferred) {
  MarkModel truth;
  truth.pi_m = 0.415;
  truth.alpha = 0.131;
  truth.links.theta_beta = {0.648};
  truth.links.theta_xi = {-0.744};
  truth.links.theta_sigma = {0.6, 1.4};
  int wins = 0;
  for (int s = 0; s < 10; ++s) {
    const auto data = draw_data(truth, 600, 300 + s, true);
    MarkMhConfig cfg;
    cfg.n_samples = 4000;
    cfg.burn_in = 1000;
    cfg.thin = 5;
    cfg.seed = 900 + s;
    MarkModelSpec small, full;
    full.n_sigma = 2;
    const double d_small = dic(mark_mh_sampler(data, small, cfg), data, small);
    const double d_full = dic(mark_mh_sampler(data, full, cfg), data, full);
    wins += d_full < d_small;
  }
  EXPECT_GE(wins, 8);
}

TEST(MarkSampler, DeterministicUnderSeed) {
  MarkModel m;
  m.pi_m = 0.4;
  m.alpha = 0.2;
  const auto data = draw_data(m, 200, 9, false);
  MarkModelSpec spec;
  MarkMhConfig cfg;
  cfg.n_samples = 600;
  cfg.burn_in = 100;
  cfg.thin = 5;
  cfg.seed = 4;
  EXPECT_EQ(mark_mh_sampler(data, spec, cfg).rows, mark_mh_sampler(data, spec, cfg).rows);
}
