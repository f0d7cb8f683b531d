#include "exhawkes/sim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "exhawkes/core/log.hpp"

namespace exhawkes::sim {
namespace {

bool triggering_enabled(const SimConfig& c) {
  return c.basis && c.trigger.omega.size() > 0 && c.trigger.omega.squaredNorm() > 0.0;
}

double background_rate(const SimConfig& c, double t, Point2 s) {
  if (!c.baseline_theta) return c.mu_constant;
  return baseline::mu_star(t, s, *c.baseline_theta, c.design);
}

double background_bound(const SimConfig& c) {
  if (!c.baseline_theta) return c.mu_constant;
  const int n = c.probe;
  double best = 0.0;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b)
      for (int d = 0; d <= n; ++d)
        best = std::max(best, background_rate(c, double(a) / n, Point2{double(b) / n, double(d) / n}));
  if (!std::isfinite(best)) throw std::runtime_error("background intensity is unbounded on the domain");
  return c.bound_factor * best;
}

class MarkDrawer {
 public:
  explicit MarkDrawer(const MarkSpec& spec) : spec_(spec) {
    if (!spec.uniform) {
      if (!(spec.ceiling > 0.0)) throw std::invalid_argument("mark ceiling must be positive");
      dist_ = std::make_unique<marks::MarkDistribution>(spec.mixture);
    }
  }
  double draw(Rng& rng, long& count) const {
    if (spec_.uniform) {
      count = 0;
      return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }
    count = dist_->sample(rng);
    return double(count) / spec_.ceiling;
  }

 private:
  const MarkSpec& spec_;
  std::unique_ptr<marks::MarkDistribution> dist_;
};

// 1.2 x the maximum of phi over a probe grid in (dt, ds) for a fixed mark
double offspring_bound(const SimConfig& c, double horizon, double m) {
  const int n = c.probe;
  std::vector<gp::TriggerInput> pts;
  pts.reserve(std::size_t(n) * std::size_t(n + 1));
  for (int a = 1; a <= n; ++a)
    for (int b = 0; b <= n; ++b) pts.push_back({horizon * a / n, std::sqrt(2.0) * b / n, m});
  Eigen::MatrixXd e;
  c.basis->features(pts, e);
  const Eigen::VectorXd f = e * c.trigger.omega;
  return c.bound_factor * c.trigger.a * f.cwiseAbs2().maxCoeff();
}

}  // namespace

std::vector<MarkedEvent> simulate_background(const SimConfig& config, Rng& rng) {
  if (config.mu_constant < 0.0 && !config.baseline_theta) throw std::invalid_argument("background rate must be >= 0");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MarkedEvent> out;
  double bound = background_bound(config);
  for (int attempt = 0; attempt < 20; ++attempt) {
    out.clear();
    if (bound <= 0.0) return out;
    const long n = std::poisson_distribution<long>(bound)(rng);
    bool exceeded = false;
    for (long i = 0; i < n; ++i) {
      MarkedEvent e{"", u(rng), {u(rng), u(rng)}, 0.0};
      const double rate = background_rate(config, e.t, e.s);
      if (rate > bound) {
        bound = config.bound_factor * rate;
        exceeded = true;
        break;
      }
      if (!config.baseline_theta || u(rng) * bound < rate) out.push_back(e);
    }
    if (exceeded) continue;
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    return out;
  }
  throw std::runtime_error("background bounding constant search failed");
}

std::vector<MarkedEvent> simulate_offspring(const MarkedEvent& source, double phi_mark, const SimConfig& config,
                                            Rng& rng) {
  std::vector<MarkedEvent> out;
  if (!triggering_enabled(config)) return out;
  const double horizon = 1.0 - source.t;
  if (!(horizon > 0.0)) return out;
  const gp::TriggerSource root{source.t, source.s, phi_mark};
  const Eigen::MatrixXd integral = gp::integral_outer(*config.basis, root, config.integral_particles, rng);
  const double expected = config.trigger.a * config.trigger.omega.dot(integral * config.trigger.omega);
  const long n = std::poisson_distribution<long>(std::max(expected, 0.0))(rng);
  if (n == 0) return out;
  if (static_cast<std::size_t>(n) > config.cluster_cap) {
    std::ostringstream msg;
    msg << "runaway cluster: " << n << " offspring expected from one event (cap " << config.cluster_cap << ")";
    throw std::runtime_error(msg.str());
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double bound = offspring_bound(config, horizon, phi_mark);
  constexpr std::size_t kBatch = 256;
  std::vector<gp::TriggerInput> cand(kBatch);
  std::vector<Point2> where(kBatch);
  std::vector<double> accept(kBatch);
  Eigen::MatrixXd e;
  std::size_t proposals = 0;
  while (static_cast<long>(out.size()) < n) {
    if (proposals > config.proposal_budget) {
      std::ostringstream msg;
      msg << "offspring rejection sampler exhausted its budget: source t=" << source.t << " bound=" << bound
          << " accepted " << out.size() << " of " << n;
      throw std::runtime_error(msg.str());
    }
    for (std::size_t k = 0; k < kBatch; ++k) {
      double dt = u(rng) * horizon;
      while (!(dt > 0.0)) dt = u(rng) * horizon;
      where[k] = Point2{u(rng), u(rng)};
      accept[k] = u(rng);
      cand[k] = gp::TriggerInput{dt, distance(where[k], source.s), phi_mark};
    }
    proposals += kBatch;
    config.basis->features(cand, e);
    const Eigen::VectorXd f = e * config.trigger.omega;
    for (std::size_t k = 0; k < kBatch && static_cast<long>(out.size()) < n; ++k) {
      const double value = config.trigger.a * f[static_cast<Eigen::Index>(k)] * f[static_cast<Eigen::Index>(k)];
      if (value > bound) {
        // the probe underestimated the maximum: raise the bound and redraw the whole cluster
        bound = config.bound_factor * value;
        out.clear();
        break;
      }
      if (accept[k] * bound < value) out.push_back(MarkedEvent{"", source.t + cand[k].dt, where[k], 0.0});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return out;
}

OffspringEstimate estimate_offspring_mean(const SimConfig& config, Rng& rng, std::size_t sources) {
  OffspringEstimate est;
  if (!triggering_enabled(config)) return est;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const MarkDrawer marks(config.marks);
  std::vector<double> values;
  for (std::size_t i = 0; i < sources; ++i) {
    long count = 0;
    const double m = marks.draw(rng, count);
    const gp::TriggerSource root{0.0, {u(rng), u(rng)}, m};
    const Eigen::MatrixXd integral = gp::integral_outer(*config.basis, root, config.integral_particles, rng);
    values.push_back(config.trigger.a * config.trigger.omega.dot(integral * config.trigger.omega));
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  est.mean = mean;
  est.standard_error = values.size() > 1 ? std::sqrt(ss / double(values.size() - 1) / double(values.size())) : 0.0;
  return est;
}

SimResult simulate_hawkes(const SimConfig& config) {
  if (triggering_enabled(config)) config.trigger.validate(config.basis->rank());
  Rng rng(config.seed);
  SimResult result;
  {
    Rng probe_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    result.offspring = estimate_offspring_mean(config, probe_rng);
  }
  result.supercritical = result.offspring.mean >= 1.0;
  if (result.supercritical)
    log::warn("estimated mean offspring per event is " + std::to_string(result.offspring.mean) +
              " (not subcritical)");

  struct Node {
    MarkedEvent event;
    long count{0};
    std::ptrdiff_t parent{kBackground};
    std::size_t root{0};
    double root_mark{0.0};
  };
  const MarkDrawer marks(config.marks);
  std::vector<Node> nodes;
  for (auto& e : simulate_background(config, rng)) {
    Node n;
    n.event = e;
    n.event.m = marks.draw(rng, n.count);
    n.root = nodes.size();
    n.root_mark = n.event.m;
    nodes.push_back(n);
  }
  result.background_count = nodes.size();

  if (triggering_enabled(config)) {
    std::vector<std::size_t> cluster_size(nodes.size(), 1);
    for (std::size_t r = 0; r < result.background_count; ++r) {
      std::seed_seq seq{std::uint32_t(config.seed), std::uint32_t(config.seed >> 32), std::uint32_t(r), 7u};
      Rng crng(seq);
      std::deque<std::size_t> queue{r};
      while (!queue.empty()) {
        const std::size_t src = queue.front();
        queue.pop_front();
        const Node source = nodes[src];
        const double m = config.mark_source == MarkSource::root ? source.root_mark : source.event.m;
        for (auto& e : simulate_offspring(source.event, m, config, crng)) {
          Node child;
          child.event = e;
          child.event.m = marks.draw(crng, child.count);
          child.parent = static_cast<std::ptrdiff_t>(src);
          child.root = source.root;
          child.root_mark = source.root_mark;
          nodes.push_back(child);
          if (++cluster_size[r] > config.cluster_cap)
            throw std::runtime_error("runaway cluster: more than " + std::to_string(config.cluster_cap) +
                                     " events descend from one background event");
          if (config.mode == OffspringMode::chain) queue.push_back(nodes.size() - 1);
        }
      }
    }
  }

  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return nodes[a].event.t < nodes[b].event.t; });
  std::vector<std::size_t> rank(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  std::vector<MarkedEvent> events;
  std::vector<std::ptrdiff_t> parents;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Node& n = nodes[order[i]];
    MarkedEvent e = n.event;
    e.id = std::to_string(i + 1);
    events.push_back(e);
    parents.push_back(n.parent == kBackground ? kBackground
                                              : static_cast<std::ptrdiff_t>(rank[static_cast<std::size_t>(n.parent)]));
    result.counts.push_back(n.count);
  }
  result.pattern = PointPattern(std::move(events), ObservationDomain::unit());
  result.truth = BranchingStructure(std::move(parents));
  result.truth.validate(result.pattern.times());
  return result;
}

}  // namespace exhawkes::sim
