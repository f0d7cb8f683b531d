#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exhawkes/marks/distributions.hpp"

namespace exhawkes::marks {

struct MleOptions {
  int restarts{10};
  std::uint64_t seed{20240601};
  double tolerance{1e-8};
  GpdMode gpd_mode{GpdMode::density};
  std::size_t min_observations{30};
};

struct MarkFit {
  BodyFamily body{BodyFamily::zip};
  TailFamily tail{TailFamily::gzd};
  int u{2};
  MarkMixture params;
  double log_likelihood{0.0};
  int n_params{0};
  bool converged{false};
  bool degenerate_body{false};
  bool tail_identifiable{true};
  std::string note;

  [[nodiscard]] double aic() const { return 2.0 * n_params - 2.0 * log_likelihood; }
};

// pi_M is the empirical fraction of marks <= u; body and tail are fitted
// separately since the mixture log-likelihood splits.
[[nodiscard]] MarkFit mle_fit(std::span<const long> marks, BodyFamily body, TailFamily tail, int u,
                              const MleOptions& options = {});

[[nodiscard]] double mixture_log_likelihood(std::span<const long> marks, const MarkMixture& mix);

struct AicRow {
  BodyFamily body{BodyFamily::zip};
  TailFamily tail{TailFamily::gzd};
  int u{0};
  bool ok{false};
  std::string message;
  MarkFit fit;
  bool selected{false};
};

// Rows ranked by AIC (failed cells last); the minimum is flagged as selected.
[[nodiscard]] std::vector<AicRow> aic_table(std::span<const long> marks, std::span<const int> thresholds,
                                            std::span<const BodyFamily> bodies, std::span<const TailFamily> tails,
                                            const MleOptions& options = {});

[[nodiscard]] std::string to_string(BodyFamily f);
[[nodiscard]] std::string to_string(TailFamily f);
[[nodiscard]] BodyFamily parse_body_family(const std::string& s);
[[nodiscard]] TailFamily parse_tail_family(const std::string& s);

}  // namespace exhawkes::marks
