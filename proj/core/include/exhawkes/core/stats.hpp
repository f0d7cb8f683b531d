#pragma once

#include <span>
#include <string>
#include <vector>

namespace exhawkes::stats {

[[nodiscard]] double mean(std::span<const double> x);
[[nodiscard]] double variance(std::span<const double> x);  // unbiased
// Type-7 sample quantile (linear interpolation between order statistics).
[[nodiscard]] double quantile(std::vector<double> x, double p);
[[nodiscard]] double histogram_mode(std::span<const double> x, std::size_t bins = 0);

// Effective sample size with Geyer's initial monotone sequence estimator.
[[nodiscard]] double effective_sample_size(std::span<const double> x);

[[nodiscard]] double log_sum_exp(std::span<const double> x);
[[nodiscard]] double normal_logpdf(double x, double mean, double sd);

// Numbers are written with the shortest round-trip representation.
[[nodiscard]] std::string format_double(double v);
[[nodiscard]] double parse_double(const std::string& s);

}  // namespace exhawkes::stats
