#pragma once

#include <vector>

#include "exhawkes/core/pattern.hpp"

namespace exhawkes::marks {

enum class BodyFamily { zip, zinb };
enum class TailFamily { gzd, gpd };
// density: continuous GPD density at the integer exceedance (the usual
// peaks-over-threshold likelihood); cdf_difference: F(m-u) - F(m-u-1).
enum class GpdMode { density, cdf_difference };

struct BodyParams {
  BodyFamily family{BodyFamily::zip};
  double alpha{0.0};
  double beta{1.0};  // ZIP rate
  double r{1.0};     // ZINB size
  double p{0.5};     // ZINB, pmf proportional to (1-p)^r p^m
  void validate() const;
};

struct TailParams {
  TailFamily family{TailFamily::gzd};
  double xi{0.5};
  double sigma{1.0};
  GpdMode gpd_mode{GpdMode::density};
  void validate() const;
};

struct MarkMixture {
  double pi_m{0.5};
  int u{2};
  BodyParams body;
  TailParams tail;
  void validate() const;
};

// Unnormalized zero-inflated mass at m.
[[nodiscard]] double zi_unnormalized(long m, const BodyParams& body);
[[nodiscard]] double zi_pmf(long m, const BodyParams& body, int u);

// sum_{j >= start} (1 + xi j / sigma)^(-1/xi - 1), or sum exp(-j/sigma) when xi = 0
[[nodiscard]] double gzd_tail_sum(long start, double xi, double sigma);
[[nodiscard]] double gzd_pmf(long m, double xi, double sigma, int u);

[[nodiscard]] double gpd_survival(double x, double xi, double sigma);
[[nodiscard]] double gpd_cdf(double x, double xi, double sigma);

[[nodiscard]] double tail_pmf(long m, const TailParams& tail, int u);
// Renormalized log body / tail pmf computing only the normalizer involved.
[[nodiscard]] double log_body_pmf(long m, const BodyParams& body, int u);
[[nodiscard]] double log_tail_pmf(long m, const TailParams& tail, int u);
[[nodiscard]] double mixture_pmf(long m, const MarkMixture& mix);
[[nodiscard]] double prob_mark_at_least(long k, const MarkMixture& mix);
[[nodiscard]] long sample_mark(const MarkMixture& mix, Rng& rng);

// Mixture with cached normalizers; use this when evaluating many marks.
class MarkDistribution {
 public:
  explicit MarkDistribution(const MarkMixture& mix);

  [[nodiscard]] double log_pmf(long m) const;
  [[nodiscard]] double pmf(long m) const;
  // log of the renormalized body pmf, 0 <= m <= u
  [[nodiscard]] double log_body(long m) const;
  // log of the renormalized tail pmf (or GPD density), m > u
  [[nodiscard]] double log_tail(long m) const;
  // P(M >= k | M > u) for k > u
  [[nodiscard]] double tail_survival(long k) const;
  [[nodiscard]] double prob_at_least(long k) const;
  [[nodiscard]] long sample(Rng& rng) const;
  [[nodiscard]] const MarkMixture& mixture() const { return mix_; }

 private:
  MarkMixture mix_;
  std::vector<double> log_body_;
  double log_tail_norm_{0.0};
};

}  // namespace exhawkes::marks
