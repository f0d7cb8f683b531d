#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "exhawkes/core/branching.hpp"
#include "exhawkes/core/chain.hpp"
#include "exhawkes/core/pattern.hpp"
#include "exhawkes/core/scaler.hpp"
#include "exhawkes/core/stats.hpp"

using namespace exhawkes;

namespace {

ObservationDomain box(double tx, double x, double y) {
  ObservationDomain d;
  d.t = {0.0, tx};
  d.x = {0.0, x};
  d.y = {0.0, y};
  return d;
}

PointPattern random_pattern(std::mt19937_64& rng, const ObservationDomain& d, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> ts;
  for (int i = 0; i < n; ++i) ts.push_back(d.t.lo + u(rng) * d.t.length());
  std::sort(ts.begin(), ts.end());
  std::vector<MarkedEvent> ev;
  for (int i = 0; i < n; ++i)
    ev.push_back({std::to_string(i), ts[i], {d.x.lo + u(rng) * d.x.length(), d.y.lo + u(rng) * d.y.length()},
                  std::floor(u(rng) * d.mark_ceiling)});
  return PointPattern(ev, d);
}

}  // namespace

TEST(Scaling, MidpointMapsToMidpoint) {
  PointPattern p({{"a", 5.0, {1.0, 1.0}, 0.0}}, box(10, 2, 2));
  auto [unit, scaler] = scale_to_unit(p);
  EXPECT_DOUBLE_EQ(unit[0].t, 0.5);
  EXPECT_DOUBLE_EQ(unit[0].s.x, 0.5);
  EXPECT_DOUBLE_EQ(unit[0].s.y, 0.5);
}

TEST(Scaling, UnitDomainGivesIdentity) {
  UnitScaler s(ObservationDomain::unit());
  EXPECT_TRUE(s.is_identity());
  EXPECT_DOUBLE_EQ(s.unscale_intensity(3.5), 3.5);
  EXPECT_DOUBLE_EQ(s.scale_time(0.3), 0.3);
}

TEST(Scaling, RoundTripOnRandomPatterns) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    ObservationDomain d;
    const double x0 = u(rng), y0 = u(rng), t0 = u(rng);
    d.x = {x0, x0 + 0.5 + std::abs(u(rng))};
    d.y = {y0, y0 + 0.5 + std::abs(u(rng))};
    d.t = {t0, t0 + 1.0 + 100.0 * std::abs(u(rng))};
    d.mark_ceiling = 500.0;
    const auto p = random_pattern(rng, d, 40);
    auto [unit, scaler] = scale_to_unit(p);
    for (const auto& e : unit.events()) {
      EXPECT_GE(e.t, 0.0);
      EXPECT_LE(e.t, 1.0);
      EXPECT_LT(e.m, 1.0);
    }
    const auto back = unscale_pattern(unit, scaler);
    ASSERT_EQ(back.size(), p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_NEAR(back[i].t, p[i].t, 1e-12 * std::max(1.0, std::abs(p[i].t)));
      EXPECT_NEAR(back[i].s.x, p[i].s.x, 1e-12 * std::max(1.0, std::abs(p[i].s.x)));
      EXPECT_NEAR(back[i].s.y, p[i].s.y, 1e-12 * std::max(1.0, std::abs(p[i].s.y)));
      EXPECT_NEAR(back[i].m, p[i].m, 1e-12 * std::max(1.0, p[i].m));
      EXPECT_EQ(back[i].id, p[i].id);
    }
  }
}

TEST(Scaling, DegenerateDomainRejected) {
  EXPECT_THROW(UnitScaler(box(0.0, 1.0, 1.0)), std::invalid_argument);
  EXPECT_THROW(UnitScaler(box(1.0, 1.0, 0.0)), std::invalid_argument);
}

TEST(Scaling, ConstantIntensityCountConserved) {
  UnitScaler s(box(10.0, 5.0, 2.0));
  // lambda = 1 on the unit cube integrates to 1; the unscaled rate over volume 100 too
  EXPECT_NEAR(s.unscale_intensity(1.0) * s.volume(), 1.0, 1e-15);
}

TEST(Scaling, IntegralPreservedUnderRescale) {
  ObservationDomain d;
  d.x = {60.0, 75.0};
  d.y = {29.0, 39.0};
  d.t = {0.0, 3650.0};
  UnitScaler s(d);
  auto unit_rate = [](double t, double x, double y) { return 3.0 + 2.0 * t * x + std::sin(3.0 * y); };
  // midpoint rule on both sides
  const int n = 40;
  double unit_total = 0.0, orig_total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double t = (i + 0.5) / n, x = (j + 0.5) / n, y = (k + 0.5) / n;
        unit_total += unit_rate(t, x, y) / (n * n * n);
        const double to = s.unscale_time(t);
        const auto so = s.unscale_point({x, y});
        const double cell = d.volume() / (n * n * n);
        orig_total += s.unscale_intensity(
                          unit_rate(s.scale_time(to), s.scale_point(so).x, s.scale_point(so).y)) *
                      cell;
      }
  EXPECT_NEAR(orig_total, unit_total, 1e-9 * unit_total);
}

TEST(Pattern, RejectsUnsortedAndOutside) {
  auto d = box(1, 1, 1);
  EXPECT_THROW(PointPattern({{"a", 0.5, {0.1, 0.1}, 0}, {"b", 0.5, {0.2, 0.2}, 0}}, d), std::invalid_argument);
  EXPECT_THROW(PointPattern({{"a", 0.5, {1.1, 0.1}, 0}}, d), std::invalid_argument);
  EXPECT_THROW(PointPattern({{"a", 0.5, {0.1, 0.1}, -1.0}}, d), std::invalid_argument);
}

TEST(Branching, AllBackgroundGivesSingletons) {
  auto b = BranchingStructure::all_background(7);
  const auto c = clusters(b);
  ASSERT_EQ(c.size(), 7u);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c[i].root, i);
    EXPECT_EQ(c[i].members.size(), 1u);
  }
}

TEST(Branching, ThreeEventChainFormsOneCluster) {
  // x_t0 triggers x_t1, which triggers x_t2
  BranchingStructure b({kBackground, 0, 1});
  const auto c = clusters(b);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].root, 0u);
  EXPECT_EQ(c[0].members, (std::vector<std::size_t>{0, 1, 2}));
  // the same cluster when both offspring hang off the root
  const auto c2 = clusters(BranchingStructure({kBackground, 0, 0}));
  ASSERT_EQ(c2.size(), 1u);
  EXPECT_EQ(c2[0].members.size(), 3u);
}

TEST(Branching, RandomForestPartitionsPattern) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::ptrdiff_t> parents(50);
    for (std::size_t i = 0; i < parents.size(); ++i) {
      std::uniform_int_distribution<long> d(-1, long(i) - 1);
      parents[i] = i == 0 ? kBackground : d(rng);
    }
    BranchingStructure b(parents);
    const auto cs = clusters(b);
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& c : cs) {
      EXPECT_TRUE(b.is_background(c.root));
      EXPECT_EQ(c.members.front(), c.root);
      EXPECT_TRUE(std::is_sorted(c.members.begin(), c.members.end()));
      for (auto m : c.members) {
        seen.insert(m);
        EXPECT_EQ(b.root_of(m), c.root);
      }
      total += c.members.size();
    }
    EXPECT_EQ(total, 50u);
    EXPECT_EQ(seen.size(), 50u);
    EXPECT_EQ(b.background_indices().size() + b.triggered_indices().size(), 50u);
  }
}

TEST(Branching, ForwardParentAndCycleRejected) {
  BranchingStructure forward({2, kBackground, kBackground});
  EXPECT_THROW(clusters(forward), StructuralError);
  BranchingStructure cycle({1, 0});
  EXPECT_THROW(clusters(cycle), StructuralError);
  EXPECT_THROW((void)cycle.root_of(0), StructuralError);
  EXPECT_THROW(BranchingStructure({0}), StructuralError);
  EXPECT_THROW(BranchingStructure({kBackground, 5}), StructuralError);
  BranchingStructure ok({kBackground, 0});
  const double same_time[] = {1.0, 1.0};
  EXPECT_THROW(ok.validate(same_time), StructuralError);
}

TEST(Chain, RetainedCountBookkeeping) {
  EXPECT_EQ(retained_count(25000, 2000, 10), 2300u);
  EXPECT_EQ(retained_count(50000, 0, 10), 5000u);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < 25000; ++i) kept += is_retained(i, 2000, 10);
  EXPECT_EQ(kept, 2300u);
}

TEST(Chain, CsvRoundTripIsExact) {
  PosteriorChain c;
  c.names = {"a", "b"};
  c.rows = {{0.1, 1e-300}, {-3.0 / 7.0, 12345.678901234567}};
  c.seed = 42;
  c.n_samples = 30;
  c.burn_in = 10;
  c.thin = 10;
  c.acceptance["hmc"] = {10, 7};
  std::stringstream ss;
  write_chain_csv(ss, c);
  const auto back = read_chain_csv(ss);
  EXPECT_EQ(back.names, c.names);
  EXPECT_EQ(back.rows, c.rows);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.acceptance.at("hmc").accepted, 7u);
}

TEST(Summary, ConstantChainHasZeroWidthInterval) {
  PosteriorChain c;
  c.names = {"x"};
  for (int i = 0; i < 100; ++i) c.rows.push_back({2.5});
  const auto s = summarize(c).at("x");
  EXPECT_EQ(s.mode, 2.5);
  EXPECT_EQ(s.lower, 2.5);
  EXPECT_EQ(s.upper, 2.5);
}

TEST(Summary, StandardNormalInterval) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  PosteriorChain c;
  c.names = {"z"};
  for (int i = 0; i < 100000; ++i) c.rows.push_back({n(rng)});
  const auto s = summarize(c).at("z");
  EXPECT_NEAR(s.lower, -1.96, 0.05);
  EXPECT_NEAR(s.upper, 1.96, 0.05);
  EXPECT_LE(s.lower, s.upper);
  EXPECT_NEAR(s.mode, 0.0, 0.2);
}

TEST(Stats, EffectiveSampleSizeOfAr1) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const double rho = 0.9;
  std::vector<double> x(200000);
  x[0] = n(rng);
  for (std::size_t i = 1; i < x.size(); ++i) x[i] = rho * x[i - 1] + std::sqrt(1 - rho * rho) * n(rng);
  const double expected = double(x.size()) * (1 - rho) / (1 + rho);
  EXPECT_NEAR(stats::effective_sample_size(x) / expected, 1.0, 0.1);
}

TEST(Stats, FormatRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-310, 6.02214076e23}) EXPECT_EQ(stats::parse_double(stats::format_double(v)), v);
}
