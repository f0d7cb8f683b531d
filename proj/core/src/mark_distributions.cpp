#include "exhawkes/marks/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace exhawkes::marks {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
}

double log_zi_unnormalized(long m, const BodyParams& b) {
  if (m < 0) return kNegInf;
  if (b.family == BodyFamily::zip) {
    const double count = m * std::log(b.beta) - b.beta - std::lgamma(double(m) + 1.0);
    if (m == 0) return std::log(b.alpha + (1.0 - b.alpha) * std::exp(count));
    return b.alpha >= 1.0 ? kNegInf : std::log1p(-b.alpha) + count;
  }
  const double count = std::lgamma(m + b.r) - std::lgamma(b.r) - std::lgamma(double(m) + 1.0) +
                       b.r * std::log1p(-b.p) + (m == 0 ? 0.0 : m * std::log(b.p));
  if (m == 0) return std::log(b.alpha + (1.0 - b.alpha) * std::exp(count));
  return b.alpha >= 1.0 ? kNegInf : std::log1p(-b.alpha) + count;
}

// log (1 + xi j / sigma)^(-1/xi - 1)
double log_gzd_term(double j, double xi, double sigma) {
  if (xi == 0.0) return -j / sigma;
  return -(1.0 / xi + 1.0) * std::log1p(xi * j / sigma);
}

// Bernoulli numbers B_2..B_20 divided by (2k)!
constexpr double kEulerMaclaurin[] = {1.0 / 6.0 / 2.0,
                                      -1.0 / 30.0 / 24.0,
                                      1.0 / 42.0 / 720.0,
                                      -1.0 / 30.0 / 40320.0,
                                      5.0 / 66.0 / 3628800.0,
                                      -691.0 / 2730.0 / 479001600.0,
                                      7.0 / 6.0 / 87178291200.0,
                                      -3617.0 / 510.0 / 20922789888000.0,
                                      43867.0 / 798.0 / 6402373705728000.0,
                                      -174611.0 / 330.0 / 2432902008176640000.0};
constexpr int kEulerMaclaurinTerms = 10;

}  // namespace

void BodyParams::validate() const {
  check_unit(alpha, "alpha");
  if (family == BodyFamily::zip) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("ZIP rate beta must be positive");
  } else {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("ZINB size r must be positive");
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("ZINB p must lie in [0,1)");
  }
}

void TailParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("tail scale sigma must be positive");
  if (!(xi >= 0.0) || !std::isfinite(xi)) throw std::invalid_argument("tail shape xi must be non-negative");
}

void MarkMixture::validate() const {
  check_unit(pi_m, "pi_M");
  if (u < 0) throw std::invalid_argument("threshold u must be non-negative");
  body.validate();
  tail.validate();
}

double zi_unnormalized(long m, const BodyParams& body) {
  body.validate();
  return std::exp(log_zi_unnormalized(m, body));
}

double zi_pmf(long m, const BodyParams& body, int u) {
  if (m < 0 || m > u) throw std::domain_error("zi_pmf is defined on {0,...,u}");
  body.validate();
  double z = 0.0;
  for (long k = 0; k <= u; ++k) z += std::exp(log_zi_unnormalized(k, body));
  return std::exp(log_zi_unnormalized(m, body)) / z;
}

double gzd_tail_sum(long start, double xi, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("GZD sigma must be positive");
  if (!(xi >= 0.0)) throw std::invalid_argument("GZD xi must be non-negative");
  if (xi == 0.0) return std::exp(-double(start) / sigma) / -std::expm1(-1.0 / sigma);

  const double s = 1.0 / xi + 1.0;
  const double b = xi / sigma;
  double sum = 0.0;
  long j = start;
  for (long iter = 0;; ++iter, ++j) {
    if (iter > 50'000'000) throw std::runtime_error("GZD normalizer did not converge");
    const double q = b / (1.0 + b * double(j));
    const double logg = -s * std::log1p(b * double(j));
    const double g = std::exp(logg);
    // the k-th correction is about g (2/2pi) ((s+2k) q / 2pi)^(2k-1), below 1e-10 g here
    if (iter >= 2 && (s + 2.0 * kEulerMaclaurinTerms) * q <= 2.0) {
      // Euler-Maclaurin tail from j; derivatives of (1+bx)^-s in closed form
      double tail = sigma * std::exp(-std::log1p(b * double(j)) / xi) + 0.5 * g;
      double rising = s;  // s (s+1) ... (s+n-1) q^n, n = 2k-1
      double factor = q;
      for (int k = 1; k <= kEulerMaclaurinTerms; ++k) {
        tail += kEulerMaclaurin[k - 1] * g * rising * factor;
        rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
        factor *= q * q;
      }
      return sum + tail;
    }
    // remainder is below g(j) + integral from j
    const double bound = g + sigma * std::exp(-std::log1p(b * double(j)) / xi);
    if (sum > 0.0 && bound < 1e-17 * sum) return sum + g;
    sum += g;
  }
}

double gzd_pmf(long m, double xi, double sigma, int u) {
  if (m <= u) throw std::domain_error("gzd_pmf is defined for m > u");
  return std::exp(log_gzd_term(double(m - u), xi, sigma)) / gzd_tail_sum(1, xi, sigma);
}

double gpd_survival(double x, double xi, double sigma) {
  if (x <= 0.0) return 1.0;
  if (xi == 0.0) return std::exp(-x / sigma);
  return std::exp(-std::log1p(xi * x / sigma) / xi);
}

double gpd_cdf(double x, double xi, double sigma) { return 1.0 - gpd_survival(x, xi, sigma); }

double tail_pmf(long m, const TailParams& tail, int u) { return std::exp(log_tail_pmf(m, tail, u)); }

double log_body_pmf(long m, const BodyParams& body, int u) {
  if (m < 0 || m > u) throw std::domain_error("body pmf is defined on {0,...,u}");
  double z = 0.0;
  for (long k = 0; k <= u; ++k) z += std::exp(log_zi_unnormalized(k, body));
  return log_zi_unnormalized(m, body) - std::log(z);
}

double log_tail_pmf(long m, const TailParams& t, int u) {
  if (m <= u) throw std::domain_error("tail pmf is defined for m > u");
  const double j = double(m - u);
  if (t.family == TailFamily::gzd)
    return log_gzd_term(j, t.xi, t.sigma) - std::log(gzd_tail_sum(1, t.xi, t.sigma));
  if (t.gpd_mode == GpdMode::density) return log_gzd_term(j, t.xi, t.sigma) - std::log(t.sigma);
  return std::log(gpd_survival(j - 1.0, t.xi, t.sigma) - gpd_survival(j, t.xi, t.sigma));
}

double mixture_pmf(long m, const MarkMixture& mix) { return MarkDistribution(mix).pmf(m); }

double prob_mark_at_least(long k, const MarkMixture& mix) { return MarkDistribution(mix).prob_at_least(k); }

long sample_mark(const MarkMixture& mix, Rng& rng) { return MarkDistribution(mix).sample(rng); }

MarkDistribution::MarkDistribution(const MarkMixture& mix) : mix_(mix) {
  mix_.validate();
  log_body_.resize(static_cast<std::size_t>(mix_.u) + 1);
  double z = 0.0;
  for (long k = 0; k <= mix_.u; ++k) {
    log_body_[static_cast<std::size_t>(k)] = log_zi_unnormalized(k, mix_.body);
    z += std::exp(log_body_[static_cast<std::size_t>(k)]);
  }
  const double log_z = std::log(z);
  for (auto& v : log_body_) v -= log_z;
  if (mix_.tail.family == TailFamily::gzd) log_tail_norm_ = std::log(gzd_tail_sum(1, mix_.tail.xi, mix_.tail.sigma));
}

double MarkDistribution::log_body(long m) const {
  if (m < 0 || m > mix_.u) throw std::domain_error("body pmf is defined on {0,...,u}");
  return log_body_[static_cast<std::size_t>(m)];
}

double MarkDistribution::log_tail(long m) const {
  if (m <= mix_.u) throw std::domain_error("tail pmf is defined for m > u");
  const double j = double(m - mix_.u);
  const auto& t = mix_.tail;
  if (t.family == TailFamily::gzd) return log_gzd_term(j, t.xi, t.sigma) - log_tail_norm_;
  if (t.gpd_mode == GpdMode::density) return log_gzd_term(j, t.xi, t.sigma) - std::log(t.sigma);
  const double hi = gpd_survival(j - 1.0, t.xi, t.sigma);
  const double lo = gpd_survival(j, t.xi, t.sigma);
  return std::log(hi - lo);
}

double MarkDistribution::log_pmf(long m) const {
  if (m < 0) return kNegInf;
  if (m <= mix_.u) return mix_.pi_m <= 0.0 ? kNegInf : std::log(mix_.pi_m) + log_body(m);
  return mix_.pi_m >= 1.0 ? kNegInf : std::log1p(-mix_.pi_m) + log_tail(m);
}

double MarkDistribution::pmf(long m) const { return std::exp(log_pmf(m)); }

double MarkDistribution::tail_survival(long k) const {
  if (k <= mix_.u + 1) return 1.0;
  const auto& t = mix_.tail;
  if (t.family == TailFamily::gzd) return gzd_tail_sum(k - mix_.u, t.xi, t.sigma) / std::exp(log_tail_norm_);
  return gpd_survival(double(k - mix_.u - 1), t.xi, t.sigma);
}

double MarkDistribution::prob_at_least(long k) const {
  if (k <= 0) return 1.0;
  if (k > mix_.u) return (1.0 - mix_.pi_m) * tail_survival(k);
  double below = 0.0;
  for (long m = 0; m < k; ++m) below += std::exp(log_body_[static_cast<std::size_t>(m)]);
  return (1.0 - mix_.pi_m) + mix_.pi_m * std::max(0.0, 1.0 - below);
}

long MarkDistribution::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double v = unif(rng);
  if (v < mix_.pi_m) {
    const double w = unif(rng);
    double cum = 0.0;
    for (long m = 0; m < mix_.u; ++m) {
      cum += std::exp(log_body_[static_cast<std::size_t>(m)]);
      if (w < cum) return m;
    }
    return mix_.u;
  }
  const auto& t = mix_.tail;
  double w = unif(rng);
  while (w <= 0.0) w = unif(rng);
  if (t.family == TailFamily::gpd) {
    // M = u + ceil(Y) with Y ~ GPD has the cdf-difference pmf
    const double y = t.xi == 0.0 ? -t.sigma * std::log(w) : t.sigma / t.xi * std::expm1(-t.xi * std::log(w));
    return mix_.u + std::max<long>(1, static_cast<long>(std::ceil(y)));
  }
  // smallest k > u with P(M >= k+1 | tail) < w
  const double z = std::exp(log_tail_norm_);
  double surv = 1.0;
  long k = mix_.u + 1;
  for (int i = 0; i < 64; ++i, ++k) {
    surv -= std::exp(log_gzd_term(double(k - mix_.u), t.xi, t.sigma)) / z;
    if (surv < w) return k;
  }
  long lo = k - 1, step = 64;  // survival at lo+1 is >= w
  long hi = lo + step;
  while (tail_survival(hi + 1) >= w) {
    lo = hi;
    step *= 2;
    if (step > (1L << 60)) return hi;
    hi = lo + step;
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (tail_survival(mid + 1) < w) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace exhawkes::marks
