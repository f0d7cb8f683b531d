#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "exhawkes/baseline/baseline.hpp"
#include "exhawkes/core/branching.hpp"
#include "exhawkes/core/pattern.hpp"
#include "exhawkes/gp/basis.hpp"
#include "exhawkes/gp/trigger.hpp"
#include "exhawkes/marks/distributions.hpp"

namespace exhawkes::sim {

// root_relative: only background events trigger, all offspring relative to their root.
// chain: every event triggers offspring relative to itself (multi-generation cascade).
enum class OffspringMode { root_relative, chain };
// Mark entering phi for an offspring's own children in chain mode.
enum class MarkSource { parent, root };

struct MarkSpec {
  bool uniform{true};  // marks uniform on (0,1) on the unit scale
  marks::MarkMixture mixture;
  double ceiling{1000.0};  // casualty count mapped to 1 on the unit scale
};

struct SimConfig {
  double mu_constant{50.0};
  // inhomogeneous background when set: mu* = exp(Z^T theta)
  std::optional<Eigen::VectorXd> baseline_theta;
  baseline::BaselineDesign design;
  std::shared_ptr<const gp::EigenBasis> basis;  // null or zero omega disables triggering
  gp::TriggerParams trigger;
  MarkSpec marks;
  OffspringMode mode{OffspringMode::root_relative};
  MarkSource mark_source{MarkSource::parent};
  std::uint64_t seed{1};
  std::size_t cluster_cap{10000};
  std::size_t integral_particles{1000};
  int probe{32};
  double bound_factor{1.2};
  std::size_t proposal_budget{50000000};
};

struct OffspringEstimate {
  double mean{0.0};
  double standard_error{0.0};
};

struct SimResult {
  PointPattern pattern;  // unit domain
  BranchingStructure truth;
  std::vector<long> counts;  // casualty counts when marks come from the mixture
  std::size_t background_count{0};
  OffspringEstimate offspring;
  bool supercritical{false};
};

// Background events only, time-sorted.
[[nodiscard]] std::vector<MarkedEvent> simulate_background(const SimConfig& config, Rng& rng);

// Offspring of one source event with phi evaluated at the given mark. Times exceed source.t.
[[nodiscard]] std::vector<MarkedEvent> simulate_offspring(const MarkedEvent& source, double phi_mark,
                                                          const SimConfig& config, Rng& rng);

// a omega^T I omega averaged over sources at t = 0, uniform location and random mark.
[[nodiscard]] OffspringEstimate estimate_offspring_mean(const SimConfig& config, Rng& rng, std::size_t sources = 64);

[[nodiscard]] SimResult simulate_hawkes(const SimConfig& config);

}  // namespace exhawkes::sim
