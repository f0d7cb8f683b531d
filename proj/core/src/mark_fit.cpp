#include "exhawkes/marks/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "exhawkes/optim/nelder_mead.hpp"

namespace exhawkes::marks {
namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

using Counts = std::vector<std::pair<long, double>>;

struct Split {
  Counts body;
  Counts tail;
  double n_body{0.0};
  double n_tail{0.0};
};

Split split_counts(std::span<const long> marks, int u) {
  std::map<long, double> hist;
  for (long m : marks) {
    if (m < 0) throw std::invalid_argument("marks must be non-negative");
    hist[m] += 1.0;
  }
  Split s;
  for (const auto& [m, c] : hist) {
    if (m <= u) {
      s.body.emplace_back(m, c);
      s.n_body += c;
    } else {
      s.tail.emplace_back(m, c);
      s.n_tail += c;
    }
  }
  return s;
}

BodyParams body_from(BodyFamily f, const std::vector<double>& x) {
  BodyParams b;
  b.family = f;
  b.alpha = logistic(x[0]);
  if (f == BodyFamily::zip) {
    b.beta = std::exp(x[1]);
  } else {
    b.r = std::exp(x[1]);
    b.p = logistic(x[2]);
  }
  return b;
}

TailParams tail_from(TailFamily f, GpdMode mode, const std::vector<double>& x) {
  TailParams t;
  t.family = f;
  t.gpd_mode = mode;
  t.xi = std::exp(x[0]);
  t.sigma = std::exp(x[1]);
  return t;
}

template <class Objective>
optim::NelderMeadResult multistart(Objective&& f, std::vector<double> start, double spread, int restarts,
                                   std::mt19937_64& rng, double tol) {
  optim::NelderMeadOptions opt;
  opt.ftol = tol * 1e-2;
  opt.xtol = 1e-7;
  auto best = optim::nelder_mead(f, start, opt);
  std::uniform_real_distribution<double> jitter(-spread, spread);
  for (int r = 0; r < restarts; ++r) {
    auto x0 = start;
    for (auto& v : x0) v += jitter(rng);
    auto res = optim::nelder_mead(f, x0, opt);
    if (res.value < best.value) best = res;
  }
  // polish from the best point
  auto polished = optim::nelder_mead(f, best.x, opt);
  if (polished.value <= best.value) best = polished;
  return best;
}

}  // namespace

double mixture_log_likelihood(std::span<const long> marks, const MarkMixture& mix) {
  MarkDistribution d(mix);
  double ll = 0.0;
  for (long m : marks) ll += d.log_pmf(m);
  return ll;
}

MarkFit mle_fit(std::span<const long> marks, BodyFamily body, TailFamily tail, int u, const MleOptions& options) {
  if (marks.size() < options.min_observations)
    throw std::invalid_argument("mle_fit needs at least " + std::to_string(options.min_observations) +
                                " observations");
  if (u < 0) throw std::invalid_argument("threshold u must be non-negative");
  const Split split = split_counts(marks, u);
  const double n = split.n_body + split.n_tail;
  std::mt19937_64 rng(options.seed);

  MarkFit fit;
  fit.body = body;
  fit.tail = tail;
  fit.u = u;
  fit.n_params = 1 + (body == BodyFamily::zip ? 2 : 3) + 2;
  fit.params.u = u;
  fit.params.pi_m = split.n_body / n;
  fit.converged = true;

  double ll = 0.0;
  if (split.n_body > 0.0) ll += split.n_body * std::log(split.n_body / n);
  if (split.n_tail > 0.0) ll += split.n_tail * std::log(split.n_tail / n);

  // body
  const bool only_zeros = split.body.size() == 1 && split.body[0].first == 0;
  if (split.n_body == 0.0 || only_zeros) {
    fit.params.body.family = body;
    fit.params.body.alpha = 1.0;
    fit.degenerate_body = true;
    fit.note += "body degenerate (no positive marks at or below u); ";
  } else {
    auto nll = [&](const std::vector<double>& x) {
      MarkMixture mix;
      mix.pi_m = 1.0;
      mix.u = u;
      mix.body = body_from(body, x);
      if (!(mix.body.alpha < 1.0)) return std::numeric_limits<double>::infinity();
      MarkDistribution d(mix);
      double s = 0.0;
      for (const auto& [m, c] : split.body) s += c * d.log_body(m);
      return -s;
    };
    double mean = 0.0;
    for (const auto& [m, c] : split.body) mean += double(m) * c;
    mean = std::max(mean / split.n_body, 0.05);
    std::vector<double> start =
        body == BodyFamily::zip ? std::vector<double>{-1.0, std::log(mean)} : std::vector<double>{-1.0, 0.0, 0.0};
    const auto res = multistart(nll, start, 2.0, options.restarts, rng, options.tolerance);
    fit.params.body = body_from(body, res.x);
    fit.converged = fit.converged && res.converged;
    ll -= res.value;
    if (fit.params.body.alpha > 1.0 - 1e-6) {
      fit.degenerate_body = true;
      fit.note += "zero-inflation weight at its boundary; ";
    }
  }

  // tail
  fit.params.tail.family = tail;
  fit.params.tail.gpd_mode = options.gpd_mode;
  if (split.n_tail == 0.0) {
    fit.tail_identifiable = false;
    fit.note += "no exceedances above u, tail parameters not identifiable; ";
  } else {
    auto nll = [&](const std::vector<double>& x) {
      MarkMixture mix;
      mix.pi_m = 0.0;
      mix.u = u;
      mix.tail = tail_from(tail, options.gpd_mode, x);
      if (!std::isfinite(mix.tail.xi) || !std::isfinite(mix.tail.sigma) || mix.tail.sigma <= 0.0)
        return std::numeric_limits<double>::infinity();
      MarkDistribution d(mix);
      double s = 0.0;
      for (const auto& [m, c] : split.tail) s += c * d.log_tail(m);
      return -s;
    };
    double mean_excess = 0.0;
    for (const auto& [m, c] : split.tail) mean_excess += double(m - u) * c;
    mean_excess /= split.n_tail;
    std::vector<double> start{std::log(0.5), std::log(std::max(0.5 * mean_excess, 0.1))};
    const auto res = multistart(nll, start, 1.5, options.restarts, rng, options.tolerance);
    fit.params.tail = tail_from(tail, options.gpd_mode, res.x);
    fit.converged = fit.converged && res.converged;
    ll -= res.value;
    if (split.n_tail < 2.0) {
      fit.tail_identifiable = false;
      fit.note += "fewer than two exceedances; ";
    }
  }
  fit.log_likelihood = ll;
  if (!fit.converged) fit.note += "optimizer did not reach tolerance; ";
  return fit;
}

std::vector<AicRow> aic_table(std::span<const long> marks, std::span<const int> thresholds,
                              std::span<const BodyFamily> bodies, std::span<const TailFamily> tails,
                              const MleOptions& options) {
  std::vector<AicRow> rows;
  for (int u : thresholds)
    for (auto b : bodies)
      for (auto t : tails) {
        AicRow row;
        row.body = b;
        row.tail = t;
        row.u = u;
        try {
          row.fit = mle_fit(marks, b, t, u, options);
          row.ok = std::isfinite(row.fit.aic()) && row.fit.tail_identifiable;
          row.message = row.fit.note;
        } catch (const std::exception& e) {
          row.ok = false;
          row.message = e.what();
        }
        rows.push_back(std::move(row));
      }
  std::stable_sort(rows.begin(), rows.end(), [](const AicRow& a, const AicRow& b) {
    if (a.ok != b.ok) return a.ok;
    return a.ok && a.fit.aic() < b.fit.aic();
  });
  if (!rows.empty() && rows.front().ok) rows.front().selected = true;
  return rows;
}

std::string to_string(BodyFamily f) { return f == BodyFamily::zip ? "ZIP" : "ZINB"; }
std::string to_string(TailFamily f) { return f == TailFamily::gzd ? "GZD" : "GPD"; }

BodyFamily parse_body_family(const std::string& s) {
  if (s == "ZIP" || s == "zip") return BodyFamily::zip;
  if (s == "ZINB" || s == "zinb") return BodyFamily::zinb;
  throw std::invalid_argument("unknown body family '" + s + "'");
}

TailFamily parse_tail_family(const std::string& s) {
  if (s == "GZD" || s == "gzd") return TailFamily::gzd;
  if (s == "GPD" || s == "gpd") return TailFamily::gpd;
  throw std::invalid_argument("unknown tail family '" + s + "'");
}

}  // namespace exhawkes::marks
