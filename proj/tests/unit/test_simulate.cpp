#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

#include "exhawkes/core/log.hpp"
#include "exhawkes/sim/simulate.hpp"
#include "oracles.hpp"

using namespace exhawkes;
using namespace exhawkes::sim;

namespace {

// rank-one basis with huge length scales: the single feature is constant, so phi = a omega^2 c^2
std::shared_ptr<const gp::EigenBasis> flat_basis() {
  return std::make_shared<gp::EigenBasis>(
      gp::decompose(gp::CovarianceKernel::separable_se(1e7, 1e7), gp::InducingGrid{3, 3, 3}, 1));
}

SimConfig constant_phi_config(double c, double mu) {
  SimConfig cfg;
  cfg.mu_constant = mu;
  cfg.basis = flat_basis();
  const double f = cfg.basis->features(gp::TriggerInput{0.5, 0.5, 0.5})[0];
  cfg.trigger.a = 1.0;
  cfg.trigger.omega = Eigen::VectorXd::Constant(1, std::sqrt(c) / std::abs(f));
  cfg.integral_particles = 16;
  return cfg;
}

std::shared_ptr<const gp::EigenBasis> rq_basis(std::size_t p) {
  return std::make_shared<gp::EigenBasis>(
      gp::decompose(gp::CovarianceKernel::separable_rq(0.3, 1.0, 1.0), gp::InducingGrid::uniform(8), p));
}


}  // namespace

TEST(Background, ConstantRateMeanCount) {
  SimConfig cfg;
  cfg.mu_constant = 50.0;
  Rng rng(1);
  double total = 0.0;
  for (int r = 0; r < 1000; ++r) {
    const auto ev = simulate_background(cfg, rng);
    total += double(ev.size());
    for (std::size_t i = 1; i < ev.size(); ++i) ASSERT_LT(ev[i - 1].t, ev[i].t);
  }
  EXPECT_LT(std::abs(total / 1000 - 50.0), 3.0 * std::sqrt(50.0 / 1000));
}

TEST(Background, ZeroRateIsEmpty) {
  SimConfig cfg;
  cfg.mu_constant = 0.0;
  Rng rng(2);
  EXPECT_TRUE(simulate_background(cfg, rng).empty());
  cfg.seed = 3;
  EXPECT_EQ(simulate_hawkes(cfg).pattern.size(), 0u);
}

TEST(Background, InhomogeneousTimeMarginal) {
  SimConfig cfg;
  cfg.design = baseline::BaselineDesign::from_names({"1", "t"});
  Eigen::VectorXd th(2);
  th << std::log(400.0), 1.5;
  cfg.baseline_theta = th;
  Rng rng(4);
  std::vector<double> times;
  for (int r = 0; r < 10; ++r)
    for (const auto& e : simulate_background(cfg, rng)) times.push_back(e.t);
  const double k = 1.5;
  const double d = oracle::ks_statistic(times, [&](double t) { return std::expm1(k * t) / std::expm1(k); });
  EXPECT_GT(oracle::ks_pvalue(d, times.size()), 0.01);
}

TEST(Offspring, ZeroOmegaNeverTriggers) {
  SimConfig cfg;
  cfg.basis = rq_basis(10);
  cfg.trigger.omega = Eigen::VectorXd::Zero(10);
  Rng rng(5);
  EXPECT_TRUE(simulate_offspring(MarkedEvent{"", 0.1, {0.5, 0.5}, 0.3}, 0.3, cfg, rng).empty());
  cfg.mode = OffspringMode::chain;
  const auto res = simulate_hawkes(cfg);
  EXPECT_EQ(res.truth.background_count(), res.pattern.size());
  EXPECT_EQ(res.offspring.mean, 0.0);
}

TEST(Offspring, ConstantPhiExpectedClusterSize) {
  const double c = 2.0;
  const auto cfg = constant_phi_config(c, 0.0);
  Rng rng(6);
  const MarkedEvent root{"", 0.3, {0.2, 0.7}, 0.5};
  const int roots = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < roots; ++r) {
    const auto kids = simulate_offspring(root, root.m, cfg, rng);
    for (const auto& k : kids) ASSERT_GT(k.t, root.t);
    sum += double(kids.size());
    sum2 += double(kids.size()) * double(kids.size());
  }
  const double mean = sum / roots;
  const double se = std::sqrt((sum2 / roots - mean * mean) / roots);
  EXPECT_LT(std::abs(mean - c * 0.7), 3.0 * se);
}

TEST(Offspring, TimeLagsFollowPhiMarginal) {
  SimConfig cfg;
  cfg.basis = rq_basis(10);
  Rng wrng(7);
  cfg.trigger.omega = gp::sample_omega_prior(*cfg.basis, 1.0, 0.1, wrng);
  cfg.trigger.a = 40.0;
  const MarkedEvent root{"", 0.2, {0.3, 0.6}, 0.4};
  Rng rng(8);
  std::vector<double> lags;
  while (lags.size() < 3000)
    for (const auto& k : simulate_offspring(root, root.m, cfg, rng)) lags.push_back(k.t - root.t);
  // g(tau) = integral over the unit square of phi(tau, |s - s_root|, m); split at the root for the distance kink
  std::vector<double> sx, sw, yx, yw;
  oracle::gauss_legendre(30, 0.0, root.s.x, sx, sw);
  oracle::gauss_legendre(30, root.s.x, 1.0, sx, sw);
  oracle::gauss_legendre(30, 0.0, root.s.y, yx, yw);
  oracle::gauss_legendre(30, root.s.y, 1.0, yx, yw);
  const double horizon = 0.8;
  const int nt = 800;
  std::vector<double> grid(nt + 1), g(nt + 1);
  for (int i = 0; i <= nt; ++i) {
    grid[i] = horizon * i / nt;
    std::vector<gp::TriggerInput> pts;
    for (std::size_t a = 0; a < sx.size(); ++a)
      for (std::size_t b = 0; b < yx.size(); ++b)
        pts.push_back({std::max(grid[i], 1e-12), std::hypot(sx[a] - root.s.x, yx[b] - root.s.y), root.m});
    Eigen::MatrixXd e;
    cfg.basis->features(pts, e);
    const Eigen::VectorXd f = e * cfg.trigger.omega;
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t a = 0; a < sx.size(); ++a)
      for (std::size_t b = 0; b < yx.size(); ++b, ++k) sum += sw[a] * yw[b] * f[k] * f[k];
    g[i] = sum;
  }
  std::vector<double> cdf(nt + 1, 0.0);
  for (int i = 1; i <= nt; ++i) cdf[i] = cdf[i - 1] + 0.5 * (g[i] + g[i - 1]) * (grid[i] - grid[i - 1]);
  for (auto& v : cdf) v /= cdf.back();
  auto F = [&](double x) {
    const double pos = x / horizon * nt;
    const int i = std::min(nt - 1, static_cast<int>(pos));
    return cdf[i] + (pos - i) * (cdf[i + 1] - cdf[i]);
  };
  const double d = oracle::ks_statistic(lags, F);
  EXPECT_GT(oracle::ks_pvalue(d, lags.size()), 0.01);
}

TEST(Hawkes, ChainModeTotalMatchesBranchingMean) {
  // constant phi = c: an event at time t has Poisson(c (1 - t)) children uniform on (t, 1], so the
  // expected cluster size is exp(c (1 - t)) and the expected total is mu (e^c - 1) / c
  const double c = 0.5, mu = 20.0;
  auto cfg = constant_phi_config(c, mu);
  cfg.mode = OffspringMode::chain;
  const int reps = 1000;
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    cfg.seed = 1000 + r;
    total += double(simulate_hawkes(cfg).pattern.size());
  }
  const double expected = mu * std::expm1(c) / c;
  EXPECT_LT(std::abs(total / reps - expected), 0.05 * expected);
}

TEST(Hawkes, RootRelativeOnlyBackgroundEventsHaveChildren) {
  auto cfg = constant_phi_config(1.5, 30.0);
  cfg.seed = 9;
  const auto res = simulate_hawkes(cfg);
  for (std::size_t i = 0; i < res.pattern.size(); ++i)
    if (!res.truth.is_background(i)) EXPECT_TRUE(res.truth.is_background(static_cast<std::size_t>(res.truth.parent(i))));
  cfg.mode = OffspringMode::chain;
  bool grandchild = false;
  for (std::uint64_t s = 0; s < 20 && !grandchild; ++s) {
    cfg.seed = 100 + s;
    const auto r = simulate_hawkes(cfg);
    for (std::size_t i = 0; i < r.pattern.size(); ++i)
      if (!r.truth.is_background(i) && !r.truth.is_background(static_cast<std::size_t>(r.truth.parent(i))))
        grandchild = true;
  }
  EXPECT_TRUE(grandchild);
}

TEST(Hawkes, TruthIsValidAndRunIsReproducible) {
  SimConfig cfg;
  cfg.basis = rq_basis(20);
  Rng wrng(10);
  cfg.trigger.omega = gp::sample_omega_prior(*cfg.basis, 1.0, 0.1, wrng);
  cfg.mode = OffspringMode::chain;
  cfg.seed = 11;
  const auto a = simulate_hawkes(cfg);
  const auto b = simulate_hawkes(cfg);
  EXPECT_NO_THROW(a.truth.validate(a.pattern.times()));
  ASSERT_EQ(a.pattern.size(), b.pattern.size());
  for (std::size_t i = 0; i < a.pattern.size(); ++i) {
    EXPECT_EQ(a.pattern.events()[i].t, b.pattern.events()[i].t);
    EXPECT_EQ(a.pattern.events()[i].s.x, b.pattern.events()[i].s.x);
    EXPECT_EQ(a.truth.parent(i), b.truth.parent(i));
  }
  EXPECT_GT(a.pattern.size(), a.background_count);
}

TEST(Hawkes, OffspringEstimateMatchesDirectMonteCarlo) {
  SimConfig cfg;
  cfg.basis = rq_basis(15);
  Rng wrng(12);
  cfg.trigger.omega = gp::sample_omega_prior(*cfg.basis, 1.0, 0.1, wrng);
  Rng rng(13);
  const auto est = estimate_offspring_mean(cfg, rng, 200);
  // independent estimate: phi at uniform (t, s) relative to a uniform source at time 0 with a uniform mark
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 200000;
  std::vector<gp::TriggerInput> pts;
  for (int i = 0; i < n; ++i) {
    const Point2 src{u(rng), u(rng)}, s{u(rng), u(rng)};
    pts.push_back({std::max(u(rng), 1e-12), distance(src, s), u(rng)});
  }
  Eigen::MatrixXd e;
  cfg.basis->features(pts, e);
  const Eigen::ArrayXd phi = cfg.trigger.a * (e * cfg.trigger.omega).array().square();
  const double mean = phi.mean();
  const double se = std::sqrt((phi - mean).square().sum() / (n - 1) / n);
  EXPECT_LT(std::abs(est.mean - mean), 3.0 * std::hypot(est.standard_error, se));
}

TEST(Hawkes, RunawayClusterIsAnError) {
  auto cfg = constant_phi_config(30.0, 5.0);
  cfg.mode = OffspringMode::chain;
  cfg.cluster_cap = 50;
  std::vector<std::string> warnings;
  auto prev = log::set_sink([&](log::Level l, std::string_view m) {
    if (l == log::Level::warn) warnings.emplace_back(m);
  });
  EXPECT_THROW((void)simulate_hawkes(cfg), std::runtime_error);
  log::set_sink(prev);
  EXPECT_FALSE(warnings.empty());
}

TEST(Hawkes, MixtureMarksAreScaledCounts) {
  SimConfig cfg;
  cfg.mu_constant = 200.0;
  cfg.marks.uniform = false;
  cfg.marks.mixture.pi_m = 0.4;
  cfg.marks.mixture.u = 2;
  cfg.marks.mixture.body.alpha = 0.2;
  cfg.marks.mixture.body.beta = 1.5;
  cfg.marks.mixture.tail.xi = 0.5;
  cfg.marks.mixture.tail.sigma = 3.0;
  cfg.marks.ceiling = 500.0;
  cfg.seed = 14;
  const auto res = simulate_hawkes(cfg);
  ASSERT_EQ(res.counts.size(), res.pattern.size());
  for (std::size_t i = 0; i < res.pattern.size(); ++i)
    EXPECT_DOUBLE_EQ(res.pattern.events()[i].m, double(res.counts[i]) / 500.0);
}
