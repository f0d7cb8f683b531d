#include "exhawkes/inference/likelihood.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "exhawkes/core/log.hpp"

namespace exhawkes::inference {
namespace {

std::size_t draw_index(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (r < acc) return k;
  }
  // rounding left r above the cumulative sum: take the last positive entry
  for (std::size_t k = probs.size(); k-- > 0;)
    if (probs[k] > 0.0) return k;
  return 0;
}

}  // namespace

std::vector<double> branching_probs(double mu_i, std::span<const double> phi_row) {
  if (!(mu_i >= 0.0) || !std::isfinite(mu_i)) throw std::domain_error("background rate must be finite and >= 0");
  std::vector<double> p(phi_row.size() + 1);
  p[0] = mu_i;
  double total = mu_i;
  for (std::size_t j = 0; j < phi_row.size(); ++j) {
    if (!(phi_row[j] >= 0.0) || !std::isfinite(phi_row[j])) throw std::domain_error("phi must be finite and >= 0");
    p[j + 1] = phi_row[j];
    total += phi_row[j];
  }
  if (!(total > 0.0)) {
    // mu* underflowed and no parent has weight: the event can only be background
    std::fill(p.begin(), p.end(), 0.0);
    p[0] = 1.0;
    return p;
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> branching_probs(std::size_t i, const PointPattern& unit, const Eigen::VectorXd& mu,
                                    const gp::TriggerParams& trigger, const gp::EigenBasis& basis) {
  if (i >= unit.size()) throw std::out_of_range("event index out of range");
  std::vector<double> row(i);
  const auto& ev = unit.events();
  for (std::size_t j = 0; j < i; ++j)
    row[j] = gp::phi(ev[i].t - ev[j].t, distance(ev[i].s, ev[j].s), ev[j].m, trigger, basis);
  return branching_probs(mu[static_cast<Eigen::Index>(i)], row);
}

BranchingStructure sample_branching(const PointPattern& unit, const Eigen::VectorXd& mu,
                                    const gp::TriggerParams& trigger, const gp::EigenBasis& basis, Rng& rng) {
  std::vector<std::ptrdiff_t> parents(unit.size(), kBackground);
  for (std::size_t i = 0; i < unit.size(); ++i) {
    const auto p = branching_probs(i, unit, mu, trigger, basis);
    const auto k = draw_index(p, rng);
    parents[i] = k == 0 ? kBackground : static_cast<std::ptrdiff_t>(k - 1);
  }
  return BranchingStructure(std::move(parents));
}

void PairCache::build(const PointPattern& unit, const gp::EigenBasis& basis) {
  n_ = unit.size();
  const auto& ev = unit.events();
  std::vector<gp::TriggerInput> inputs;
  inputs.reserve(n_ * (n_ > 0 ? n_ - 1 : 0) / 2);
  for (std::size_t i = 1; i < n_; ++i)
    for (std::size_t j = 0; j < i; ++j) inputs.push_back({ev[i].t - ev[j].t, distance(ev[i].s, ev[j].s), ev[j].m});
  basis.features(inputs, features_);
}

Eigen::VectorXd PairCache::phi(const Eigen::VectorXd& omega, double a) const {
  Eigen::VectorXd f = features_ * omega;
  return a * f.array().square();
}

BranchingStructure sample_branching(std::size_t n, const Eigen::VectorXd& mu, const Eigen::VectorXd& phi_all,
                                    Rng& rng) {
  if (static_cast<std::size_t>(mu.size()) != n || static_cast<std::size_t>(phi_all.size()) != n * (n ? n - 1 : 0) / 2)
    throw std::invalid_argument("branching inputs do not match the number of events");
  std::vector<std::ptrdiff_t> parents(n, kBackground);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = phi_all.data() + (i ? PairCache::index(i, 0) : 0);
    const auto p = branching_probs(mu[static_cast<Eigen::Index>(i)], std::span<const double>(row, i));
    const auto k = draw_index(p, rng);
    parents[i] = k == 0 ? kBackground : static_cast<std::ptrdiff_t>(k - 1);
  }
  return BranchingStructure(std::move(parents));
}

std::vector<gp::TriggerInput> pair_inputs(const PointPattern& unit, const BranchingStructure& b,
                                          PairStructure structure) {
  if (b.size() != unit.size()) throw StructuralError("branching size does not match pattern size");
  const auto& ev = unit.events();
  std::vector<gp::TriggerInput> out;
  if (structure == PairStructure::parent) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b.is_background(i)) continue;
      const auto& p = ev[static_cast<std::size_t>(b.parent(i))];
      out.push_back({ev[i].t - p.t, distance(ev[i].s, p.s), p.m});
    }
    return out;
  }
  for (const auto& c : clusters(b)) {
    const double m_root = ev[c.root].m;
    // births are members after the root; consecutive ones form the pairs
    for (std::size_t k = 2; k < c.members.size(); ++k) {
      const auto& u = ev[c.members[k - 1]];
      const auto& v = ev[c.members[k]];
      out.push_back({v.t - u.t, distance(v.s, u.s), m_root});
    }
  }
  return out;
}

std::vector<gp::TriggerSource> integral_sources(const PointPattern& unit, const BranchingStructure& b,
                                                PairStructure structure) {
  if (b.size() != unit.size()) throw StructuralError("branching size does not match pattern size");
  std::vector<gp::TriggerSource> out;
  for (std::size_t i = 0; i < unit.size(); ++i)
    if (structure == PairStructure::parent || b.is_background(i)) out.push_back({unit[i].t, unit[i].s, unit[i].m});
  return out;
}

double triggering_loglik(const TriggerTerms& terms, const Eigen::VectorXd& omega, double a) {
  double sum = 0.0;
  bool floored = false;
  if (terms.pairs.rows() > 0) {
    const Eigen::VectorXd f = terms.pairs * omega;
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      double f2 = f[k] * f[k];
      if (f2 < kPhiFloor) {
        f2 = kPhiFloor;
        floored = true;
      }
      sum += std::log(a * f2);
    }
  }
  if (floored) log::warn("a triggered pair has omega^T e = 0; log phi floored at 1e-300");
  return sum - a * omega.dot(terms.integral * omega);
}

double triggering_loglik(const PointPattern& unit, const BranchingStructure& b, PairStructure structure,
                         const Eigen::VectorXd& omega, double a, const gp::EigenBasis& basis, std::size_t per_source,
                         Rng& rng) {
  TriggerTerms terms;
  basis.features(pair_inputs(unit, b, structure), terms.pairs);
  const auto sources = integral_sources(unit, b, structure);
  const auto p = static_cast<Eigen::Index>(basis.rank());
  terms.integral = Eigen::MatrixXd::Zero(p, p);
  if (!sources.empty()) terms.integral = gp::integrate_outer(basis, gp::draw_particles(sources, per_source, rng));
  return triggering_loglik(terms, omega, a);
}

}  // namespace exhawkes::inference
