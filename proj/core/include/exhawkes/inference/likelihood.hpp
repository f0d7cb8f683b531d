#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "exhawkes/core/branching.hpp"
#include "exhawkes/core/pattern.hpp"
#include "exhawkes/gp/basis.hpp"
#include "exhawkes/gp/trigger.hpp"

namespace exhawkes::inference {

// parent: one term per parent -> child link with the parent's mark, and an integral for every
// event. adjacent: consecutive births within a cluster with the root's mark, and an integral
// per cluster root.
enum class PairStructure { parent, adjacent };

// Probabilities (p_0, p_1, ..., p_i) for event i: p_0 proportional to mu_i, p_{j+1} to phi_row[j].
[[nodiscard]] std::vector<double> branching_probs(double mu_i, std::span<const double> phi_row);
// mu holds mu* at every event; phi uses the candidate parent's own mark.
[[nodiscard]] std::vector<double> branching_probs(std::size_t i, const PointPattern& unit, const Eigen::VectorXd& mu,
                                                  const gp::TriggerParams& trigger, const gp::EigenBasis& basis);
[[nodiscard]] BranchingStructure sample_branching(const PointPattern& unit, const Eigen::VectorXd& mu,
                                                  const gp::TriggerParams& trigger, const gp::EigenBasis& basis,
                                                  Rng& rng);

// Features of every ordered pair (j < i) with input (t_i - t_j, |s_i - s_j|, m_j).
class PairCache {
 public:
  PairCache() = default;
  void build(const PointPattern& unit, const gp::EigenBasis& basis);

  [[nodiscard]] static std::size_t index(std::size_t i, std::size_t j) { return i * (i - 1) / 2 + j; }
  [[nodiscard]] std::size_t events() const { return n_; }
  [[nodiscard]] const Eigen::MatrixXd& features() const { return features_; }
  // a (E omega)^2 for all pairs
  [[nodiscard]] Eigen::VectorXd phi(const Eigen::VectorXd& omega, double a) const;

 private:
  std::size_t n_{0};
  Eigen::MatrixXd features_;
};

// Branching draw from cached pair features; phi_all = PairCache::phi.
[[nodiscard]] BranchingStructure sample_branching(std::size_t n, const Eigen::VectorXd& mu,
                                                  const Eigen::VectorXd& phi_all, Rng& rng);

[[nodiscard]] std::vector<gp::TriggerInput> pair_inputs(const PointPattern& unit, const BranchingStructure& b,
                                                        PairStructure structure);
[[nodiscard]] std::vector<gp::TriggerSource> integral_sources(const PointPattern& unit, const BranchingStructure& b,
                                                              PairStructure structure);

// Sufficient statistics of the triggering log density given the branching: feature rows of the
// triggered pairs and the summed integral matrix over the sources.
struct TriggerTerms {
  Eigen::MatrixXd pairs;
  Eigen::MatrixXd integral;
};

// log values of (omega^T e)^2 below this floor are clamped
inline constexpr double kPhiFloor = 1e-300;

// sum over pairs of log(a (omega^T e)^2) - a omega^T I omega
[[nodiscard]] double triggering_loglik(const TriggerTerms& terms, const Eigen::VectorXd& omega, double a);
// Same with fresh particles (per_source per triggering source).
[[nodiscard]] double triggering_loglik(const PointPattern& unit, const BranchingStructure& b, PairStructure structure,
                                       const Eigen::VectorXd& omega, double a, const gp::EigenBasis& basis,
                                       std::size_t per_source, Rng& rng);

}  // namespace exhawkes::inference
