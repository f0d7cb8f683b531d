#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "exhawkes/baseline/baseline.hpp"
#include "exhawkes/inference/hybrid.hpp"
#include "exhawkes/io/events.hpp"
#include "exhawkes/marks/distributions.hpp"
#include "exhawkes/marks/sampler.hpp"
#include "exhawkes/predict/heatmap.hpp"
#include "exhawkes/predict/predict.hpp"
#include "exhawkes/sim/simulate.hpp"

namespace exhawkes::io {

struct MarkSettings {
  marks::MarkModelSpec spec;
  marks::MarkMhConfig mh;
  std::string population_covariate;  // covariate feeding the population link term; empty: none
};

struct SimulateSettings {
  double mu{50.0};  // background events per unit hypercube
  double a{1.0};
  double gamma{0.1};
  std::string kernel{"separable_rq;l_t=0.3;l_s=1;alpha=1"};
  int grid{8};
  std::size_t rank{50};
  sim::OffspringMode mode{sim::OffspringMode::chain};
  // omega is redrawn from its prior until the offspring mean estimate lies in [nu_min, nu_max]
  double nu_min{0.0};
  double nu_max{0.95};
  std::size_t nu_sources{256};
  std::size_t max_tries{1000};
  std::uint64_t seed{1};
  bool uniform_marks{true};
  double mark_ceiling{1000.0};  // casualties at unit mark 1
  marks::MarkMixture mixture;
  std::size_t integral_particles{1000};
};

struct PredictSettings {
  predict::GridSpec grid;
  std::vector<int> years;  // empty: every year of the data
  long mark_threshold{20};
  predict::ChainEstimate estimate{predict::ChainEstimate::average};
  std::size_t max_draws{50};
  double horizon_end{0.0};  // decimal year; 0: no forecast beyond the data
  predict::ColorRamp ramp{predict::ColorRamp::log};
  std::size_t pixel_size{4};
};

struct PipelineConfig {
  IngestOptions ingest;
  std::vector<std::string> baseline_terms{"1"};
  double covariate_decay{1.0};
  baseline::QuadratureOptions quadrature;
  inference::TriggerSpec trigger;
  inference::McmcConfig mcmc;
  MarkSettings marks;
  SimulateSettings simulate;
  PredictSettings predict;

  // throws std::invalid_argument on inconsistent values
  void validate() const;
};

// INI text with sections [data], [baseline], [trigger], [mcmc], [marks], [simulate] and
// [predict]. Unknown sections or keys, and values that do not parse, throw
// std::invalid_argument naming section.key. Keys that are absent keep their defaults.
[[nodiscard]] PipelineConfig parse_config(std::istream& in);
[[nodiscard]] PipelineConfig load_config(const std::string& path);
// Every key with its current value; parse_config(to_ini(c)) reproduces c.
[[nodiscard]] std::string to_ini(const PipelineConfig& config);
// section.key for every recognised key
[[nodiscard]] std::vector<std::string> config_keys();

}  // namespace exhawkes::io
