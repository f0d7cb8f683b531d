#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "exhawkes/marks/distributions.hpp"
#include "exhawkes/marks/links.hpp"
#include "oracles.hpp"

using namespace exhawkes;
using namespace exhawkes::marks;

namespace {

// brute force: direct partial sum of the unnormalized GZD terms plus the
// integral of the continuous envelope beyond the cutoff
double brute_gzd_normalizer(double xi, double sigma, long cutoff = 200000) {
  auto g = [&](double j) { return xi == 0.0 ? std::exp(-j / sigma) : std::pow(1.0 + xi * j / sigma, -1.0 / xi - 1.0); };
  double s = 0.0;
  for (long j = cutoff; j >= 1; --j) s += g(double(j));
  const double x = double(cutoff) + 0.5;
  const double rem = xi == 0.0 ? sigma * std::exp(-x / sigma) : sigma * std::pow(1.0 + xi * x / sigma, -1.0 / xi);
  return s + rem;
}

MarkMixture example_mixture() {
  MarkMixture mix;
  mix.pi_m = 0.5;
  mix.u = 2;
  mix.body.alpha = 0.2;
  mix.body.beta = 1.0;
  mix.tail.xi = 0.5;
  mix.tail.sigma = 2.0;
  return mix;
}

}  // namespace

TEST(ZeroInflated, PureZeroInflation) {
  BodyParams b;
  b.alpha = 1.0;
  b.beta = 3.7;
  EXPECT_DOUBLE_EQ(zi_pmf(0, b, 2), 1.0);
  EXPECT_DOUBLE_EQ(zi_pmf(1, b, 2), 0.0);
  EXPECT_DOUBLE_EQ(zi_pmf(2, b, 2), 0.0);
}

TEST(ZeroInflated, TruncatedPoisson) {
  BodyParams b;
  b.alpha = 0.0;
  b.beta = 1.0;
  EXPECT_NEAR(zi_pmf(0, b, 2), 1.0 / 2.5, 1e-15);
  EXPECT_NEAR(zi_pmf(1, b, 2), 1.0 / 2.5, 1e-15);
  EXPECT_NEAR(zi_pmf(2, b, 2), 0.5 / 2.5, 1e-15);
}

TEST(ZeroInflated, BruteForceNormalization) {
  const double alpha = 0.3, beta = 2.0;
  double raw[3];
  for (int m = 0; m <= 2; ++m) {
    double fact = 1.0;
    for (int k = 2; k <= m; ++k) fact *= k;
    raw[m] = (m == 0 ? alpha : 0.0) + (1 - alpha) * std::pow(beta, m) * std::exp(-beta) / fact;
  }
  const double z = raw[0] + raw[1] + raw[2];
  BodyParams b;
  b.alpha = alpha;
  b.beta = beta;
  for (int m = 0; m <= 2; ++m) EXPECT_NEAR(zi_pmf(m, b, 2), raw[m] / z, 1e-14);
}

TEST(ZeroInflated, NegativeBinomialMatchesDirectFormula) {
  BodyParams b;
  b.family = BodyFamily::zinb;
  b.alpha = 0.25;
  b.r = 2.5;
  b.p = 0.4;
  double raw[4];
  for (int m = 0; m <= 3; ++m) {
    const double binom = std::tgamma(m + b.r) / (std::tgamma(b.r) * std::tgamma(m + 1.0));
    raw[m] = (m == 0 ? b.alpha : 0.0) + (1 - b.alpha) * binom * std::pow(1 - b.p, b.r) * std::pow(b.p, m);
  }
  const double z = raw[0] + raw[1] + raw[2] + raw[3];
  for (int m = 0; m <= 3; ++m) EXPECT_NEAR(zi_pmf(m, b, 3), raw[m] / z, 1e-13);
}

TEST(ZeroInflated, OutsideSupportIsDomainError) {
  BodyParams b;
  EXPECT_THROW((void)zi_pmf(3, b, 2), std::domain_error);
}

TEST(Gzd, GeometricReduction) {
  const double sigma = 1.0 / std::log(2.0);
  EXPECT_NEAR(gzd_pmf(3, 0.0, sigma, 2), 0.5, 1e-12);
  EXPECT_NEAR(gzd_pmf(4, 0.0, sigma, 2), 0.25, 1e-12);
}

TEST(Gzd, NormalizerMatchesBruteForce) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uxi(0.0, 1.2), usig(0.1, 15.0);
  for (int rep = 0; rep < 60; ++rep) {
    const double xi = rep == 0 ? 0.0 : uxi(rng), sigma = usig(rng);
    const double ours = gzd_tail_sum(1, xi, sigma);
    const double brute = brute_gzd_normalizer(xi, sigma);
    EXPECT_NEAR(ours / brute, 1.0, 1e-10) << "xi=" << xi << " sigma=" << sigma;
  }
}

TEST(Gzd, TailSumAgreesWithPartialSums) {
  const double xi = 0.475, sigma = 3.43;
  for (long start : {1L, 2L, 7L, 50L, 1000L}) {
    double direct = 0.0;
    for (long j = start; j < start + 25; ++j) direct += std::pow(1 + xi * j / sigma, -1 / xi - 1);
    EXPECT_NEAR(gzd_tail_sum(start, xi, sigma) - gzd_tail_sum(start + 25, xi, sigma), direct, 1e-13 * direct);
  }
}

TEST(Gzd, ContinuityAtZeroShape) {
  for (double sigma : {0.5, 1.0, 3.0, 10.0})
    for (long m = 3; m < 40; ++m) EXPECT_NEAR(gzd_pmf(m, 1e-8, sigma, 2), gzd_pmf(m, 0.0, sigma, 2), 1e-6);
}

TEST(Gzd, StrictlyDecreasing) {
  for (double xi : {0.0, 0.1, 0.9, 2.0})
    for (long m = 3; m < 200; ++m) EXPECT_GT(gzd_pmf(m, xi, 1.7, 2), gzd_pmf(m + 1, xi, 1.7, 2));
}

TEST(Gzd, InvalidParameters) {
  EXPECT_THROW((void)gzd_pmf(5, -0.1, 1.0, 2), std::invalid_argument);
  EXPECT_THROW((void)gzd_pmf(5, 0.1, 0.0, 2), std::invalid_argument);
  EXPECT_THROW((void)gzd_pmf(2, 0.1, 1.0, 2), std::domain_error);
}

TEST(Mixture, DegenerateBodyOnly) {
  auto mix = example_mixture();
  mix.pi_m = 1.0;
  for (long m = 3; m < 50; ++m) EXPECT_EQ(mixture_pmf(m, mix), 0.0);
  EXPECT_NEAR(mixture_pmf(0, mix) + mixture_pmf(1, mix) + mixture_pmf(2, mix), 1.0, 1e-15);
}

TEST(Mixture, SplitIdentity) {
  auto mix = example_mixture();
  for (double pi : {0.0, 0.123, 0.5, 0.97}) {
    mix.pi_m = pi;
    EXPECT_NEAR(mixture_pmf(0, mix) + mixture_pmf(1, mix) + mixture_pmf(2, mix), pi, 1e-15);
  }
}

TEST(Mixture, FullPmfMatchesBruteForce) {
  const auto mix = example_mixture();
  // body: direct formula, tail: brute normalizer
  double raw[3];
  for (int m = 0; m <= 2; ++m) raw[m] = (m == 0 ? 0.2 : 0.0) + 0.8 * std::exp(-1.0) / std::tgamma(m + 1.0);
  const double zb = raw[0] + raw[1] + raw[2];
  const double zt = brute_gzd_normalizer(0.5, 2.0, 1000000);
  for (long m = 0; m <= 2; ++m) EXPECT_NEAR(mixture_pmf(m, mix), 0.5 * raw[m] / zb, 1e-14);
  double total = 0.5;
  for (long m = 3; m < 2000; ++m) {
    const double expected = 0.5 * std::pow(1.0 + 0.5 * (m - 2) / 2.0, -3.0) / zt;
    EXPECT_NEAR(mixture_pmf(m, mix), expected, 1e-12 * expected);
    total += mixture_pmf(m, mix);
  }
  total += 0.5 * (brute_gzd_normalizer(0.5, 2.0, 1000000) - [&] {
                   double s = 0.0;
                   for (long j = 1; j < 1998; ++j) s += std::pow(1.0 + 0.5 * j / 2.0, -3.0);
                   return s;
                 }()) / zt;
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Mixture, ProbAtLeast) {
  auto mix = example_mixture();
  EXPECT_DOUBLE_EQ(prob_mark_at_least(0, mix), 1.0);
  EXPECT_NEAR(prob_mark_at_least(3, mix), 1.0 - mix.pi_m, 1e-15);
  mix.tail.xi = std::exp(-0.744);
  mix.tail.sigma = std::exp(1.233);
  const double zt = brute_gzd_normalizer(mix.tail.xi, mix.tail.sigma, 1000000);
  double below = 0.0;
  for (long j = 1; j < 20 - 2; ++j) below += std::pow(1.0 + mix.tail.xi * j / mix.tail.sigma, -1.0 / mix.tail.xi - 1.0);
  const double brute = (1.0 - mix.pi_m) * (zt - below) / zt;
  EXPECT_NEAR(prob_mark_at_least(20, mix), brute, 1e-9);
  // inside the body
  const double p1 = prob_mark_at_least(1, mix);
  EXPECT_NEAR(p1, 1.0 - mixture_pmf(0, mix), 1e-14);
}

TEST(Mixture, GpdCdfDifferenceSumsToOne) {
  MarkMixture mix = example_mixture();
  mix.tail.family = TailFamily::gpd;
  mix.tail.gpd_mode = GpdMode::cdf_difference;
  double s = 0.0;
  for (long m = 3; m < 200000; ++m) s += tail_pmf(m, mix.tail, mix.u);
  const double remainder = gpd_survival(200000 - 3, 0.5, 2.0);
  EXPECT_NEAR(s + remainder, 1.0, 1e-10);
  EXPECT_NEAR(gpd_cdf(1.0, 0.5, 2.0), 1.0 - std::pow(1.25, -2.0), 1e-15);
}

TEST(Mixture, GpdDensityMode) {
  TailParams t;
  t.family = TailFamily::gpd;
  t.xi = 0.4;
  t.sigma = 2.0;
  EXPECT_NEAR(tail_pmf(5, t, 2), 0.5 * std::pow(1.0 + 0.4 * 3 / 2.0, -1.0 / 0.4 - 1.0), 1e-15);
}

TEST(Sampling, PureZeroAlwaysZero) {
  MarkMixture mix = example_mixture();
  mix.pi_m = 1.0;
  mix.body.alpha = 1.0;
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_mark(mix, rng), 0);
}

TEST(Sampling, FrequenciesWithinBinomialBands) {
  MarkMixture mix;
  mix.pi_m = 0.415;
  mix.u = 2;
  mix.body.alpha = 0.131;
  mix.body.beta = std::exp(0.648);
  mix.tail.xi = std::exp(-0.744);
  mix.tail.sigma = std::exp(1.233);
  MarkDistribution d(mix);
  Rng rng(99);
  const int n = 1000000;
  std::vector<double> counts(41, 0.0);
  for (int i = 0; i < n; ++i) counts[std::min<long>(d.sample(rng), 40)] += 1.0;
  for (long m = 0; m < 40; ++m) {
    const double p = d.pmf(m);
    const double sd = std::sqrt(n * p * (1 - p));
    EXPECT_NEAR(counts[m], n * p, 4.0 * sd + 1e-9) << "m=" << m;
  }
  const double p40 = d.prob_at_least(40);
  EXPECT_NEAR(counts[40], n * p40, 4.0 * std::sqrt(n * p40 * (1 - p40)));
}

TEST(Sampling, HeavyTailSearchPath) {
  MarkMixture mix = example_mixture();
  mix.pi_m = 0.0;
  mix.tail.xi = 1.5;
  mix.tail.sigma = 1.0;
  MarkDistribution d(mix);
  Rng rng(8);
  const int n = 200000;
  const long k = 500;
  int above = 0;
  for (int i = 0; i < n; ++i) above += d.sample(rng) >= k;
  const double p = d.prob_at_least(k);
  EXPECT_NEAR(above, n * p, 4 * std::sqrt(n * p * (1 - p)));
}

TEST(Sampling, DeterministicUnderSeed) {
  const auto mix = example_mixture();
  Rng a(123), b(123);
  for (int i = 0; i < 500; ++i) EXPECT_EQ(sample_mark(mix, a), sample_mark(mix, b));
}

TEST(Links, ZeroCoefficientsGiveOnes) {
  LinkCoefficients c;
  c.theta_beta = {0, 0, 0};
  c.theta_xi = {0, 0};
  c.theta_sigma = {0, 0, 0};
  const auto p = link_params(c, {0.4, 3.0, 0.2});
  EXPECT_EQ(p.beta, 1.0);
  EXPECT_EQ(p.xi, 1.0);
  EXPECT_EQ(p.sigma, 1.0);
}

TEST(Links, FittedSigmaLinkForm) {
  LinkCoefficients c;
  c.theta_sigma = {1.233, 0.953, 0.202};
  c.a_sigma = 0.393;
  const MarkCovariates z{0.7, 2.5, 0.3};
  EXPECT_NEAR(link_params(c, z).sigma, std::exp(1.233 + 0.953 * 0.7 + 0.202 * 2.5 * std::exp(-0.393 * 0.3)), 1e-12);
}

TEST(Links, PopulationLinearity) {
  LinkCoefficients c;
  c.theta_sigma = {0.3, -0.2, 0.202};
  c.a_sigma = 0.393;
  MarkCovariates z{0.5, 1.2, 0.8};
  const double s1 = std::log(link_params(c, z).sigma);
  z.population *= 2.0;
  const double s2 = std::log(link_params(c, z).sigma);
  EXPECT_NEAR(s2 - s1, 0.202 * 1.2 * std::exp(-0.393 * 0.8), 1e-12);
}

TEST(Links, XiIgnoresPopulation) {
  LinkCoefficients c;
  c.theta_xi = {-0.744, 0.1};
  const auto a = link_params(c, {0.3, 0.0, 0.0});
  const auto b = link_params(c, {0.3, 50.0, 0.0});
  EXPECT_EQ(a.xi, b.xi);
}

TEST(Links, OverflowIsReported) {
  LinkCoefficients c;
  c.theta_beta = {800.0};
  EXPECT_THROW((void)link_params(c, {}), std::overflow_error);
}
