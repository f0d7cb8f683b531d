#include "exhawkes/marks/sampler.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace exhawkes::marks {
namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) { return std::log(p) - std::log1p(-p); }

struct Layout {
  std::size_t pi{0}, alpha{1};
  std::size_t body_begin{2}, body_end{0};
  std::size_t xi_begin{0}, xi_end{0};
  std::size_t sigma_begin{0}, sigma_end{0};
  std::ptrdiff_t a_beta{-1}, a_sigma{-1};
  std::size_t size{0};
};

Layout layout(const MarkModelSpec& s) {
  Layout l;
  l.body_end = l.body_begin + (s.body == BodyFamily::zip ? s.n_beta : 2);
  l.xi_begin = l.body_end;
  l.xi_end = l.xi_begin + s.n_xi;
  l.sigma_begin = l.xi_end;
  l.sigma_end = l.sigma_begin + s.n_sigma;
  std::size_t k = l.sigma_end;
  if (s.body == BodyFamily::zip && s.n_beta == 3) l.a_beta = static_cast<std::ptrdiff_t>(k++);
  if (s.n_sigma == 3) l.a_sigma = static_cast<std::ptrdiff_t>(k++);
  l.size = k;
  return l;
}

enum class Part { pi, body, tail };

Part part_of(const Layout& l, std::size_t j) {
  if (j == l.pi) return Part::pi;
  if (j == l.alpha || (j >= l.body_begin && j < l.body_end) || std::ptrdiff_t(j) == l.a_beta) return Part::body;
  return Part::tail;
}

struct Evaluator {
  const MarkData& data;
  const MarkModelSpec& spec;
  bool grouped{false};
  std::vector<std::pair<long, double>> body_counts, tail_counts;
  double n_body{0.0}, n_tail{0.0};

  Evaluator(const MarkData& d, const MarkModelSpec& s) : data(d), spec(s) {
    grouped = d.covariates.empty();
    std::map<long, double> hb, ht;
    for (long m : d.marks) {
      if (m < 0) throw std::invalid_argument("marks must be non-negative");
      if (m <= s.u) {
        hb[m] += 1.0;
        n_body += 1.0;
      } else {
        ht[m] += 1.0;
        n_tail += 1.0;
      }
    }
    body_counts.assign(hb.begin(), hb.end());
    tail_counts.assign(ht.begin(), ht.end());
  }

  double pi_ll(const MarkModel& m) const {
    double ll = 0.0;
    if (n_body > 0) ll += n_body * std::log(m.pi_m);
    if (n_tail > 0) ll += n_tail * std::log1p(-m.pi_m);
    return ll;
  }

  double part_ll(const MarkModel& model, bool body) const {
    const MarkCovariates none{};
    if (grouped) {
      MarkDistribution d(model.resolve(none));
      double ll = 0.0;
      for (const auto& [m, c] : body ? body_counts : tail_counts) ll += c * (body ? d.log_body(m) : d.log_tail(m));
      return ll;
    }
    double ll = 0.0;
    for (std::size_t i = 0; i < data.marks.size(); ++i) {
      const long m = data.marks[i];
      if ((m <= spec.u) != body) continue;
      const auto mix = model.resolve(data.covariates[i]);
      ll += body ? log_body_pmf(m, mix.body, spec.u) : log_tail_pmf(m, mix.tail, spec.u);
    }
    return ll;
  }

  double body_ll(const MarkModel& m) const { return n_body > 0 ? part_ll(m, true) : 0.0; }
  double tail_ll(const MarkModel& m) const { return n_tail > 0 ? part_ll(m, false) : 0.0; }
};

double safe(const std::function<double()>& f) {
  try {
    const double v = f();
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  } catch (const std::overflow_error&) {
    return -std::numeric_limits<double>::infinity();
  } catch (const std::invalid_argument&) {
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

void MarkModelSpec::validate() const {
  if (u < 0) throw std::invalid_argument("threshold u must be non-negative");
  if (n_beta < 1 || n_beta > 3) throw std::invalid_argument("n_beta must be 1..3");
  if (n_xi < 1 || n_xi > 2) throw std::invalid_argument("n_xi must be 1..2");
  if (n_sigma < 1 || n_sigma > 3) throw std::invalid_argument("n_sigma must be 1..3");
}

std::vector<std::string> mark_parameter_names(const MarkModelSpec& spec) {
  static const char* suffix[] = {"1", "t", "c"};
  std::vector<std::string> names{"pi_m", "alpha"};
  if (spec.body == BodyFamily::zip) {
    for (std::size_t i = 0; i < spec.n_beta; ++i) names.push_back(std::string("theta_beta_") + suffix[i]);
  } else {
    names.push_back("r");
    names.push_back("p");
  }
  for (std::size_t i = 0; i < spec.n_xi; ++i) names.push_back(std::string("theta_xi_") + suffix[i]);
  for (std::size_t i = 0; i < spec.n_sigma; ++i) names.push_back(std::string("theta_sigma_") + suffix[i]);
  if (spec.body == BodyFamily::zip && spec.n_beta == 3) names.push_back("a_beta");
  if (spec.n_sigma == 3) names.push_back("a_sigma");
  return names;
}

MarkModel model_from_unconstrained(const MarkModelSpec& spec, std::span<const double> x) {
  const auto l = layout(spec);
  if (x.size() != l.size) throw std::invalid_argument("parameter vector has the wrong length");
  MarkModel m;
  m.u = spec.u;
  m.body = spec.body;
  m.tail = spec.tail;
  m.gpd_mode = spec.gpd_mode;
  m.pi_m = logistic(x[l.pi]);
  m.alpha = logistic(x[l.alpha]);
  if (spec.body == BodyFamily::zip) {
    m.links.theta_beta.assign(x.begin() + l.body_begin, x.begin() + l.body_end);
  } else {
    m.r = std::exp(x[l.body_begin]);
    m.p = logistic(x[l.body_begin + 1]);
    m.links.theta_beta = {0.0};
  }
  m.links.theta_xi.assign(x.begin() + l.xi_begin, x.begin() + l.xi_end);
  m.links.theta_sigma.assign(x.begin() + l.sigma_begin, x.begin() + l.sigma_end);
  if (l.a_beta >= 0) m.links.a_beta = std::exp(x[static_cast<std::size_t>(l.a_beta)]);
  if (l.a_sigma >= 0) m.links.a_sigma = std::exp(x[static_cast<std::size_t>(l.a_sigma)]);
  return m;
}

std::vector<double> unconstrained_from_model(const MarkModelSpec& spec, const MarkModel& m) {
  const auto l = layout(spec);
  std::vector<double> x(l.size, 0.0);
  x[l.pi] = logit(m.pi_m);
  x[l.alpha] = logit(m.alpha);
  if (spec.body == BodyFamily::zip) {
    for (std::size_t i = l.body_begin; i < l.body_end; ++i) x[i] = m.links.theta_beta.at(i - l.body_begin);
  } else {
    x[l.body_begin] = std::log(m.r);
    x[l.body_begin + 1] = logit(m.p);
  }
  for (std::size_t i = l.xi_begin; i < l.xi_end; ++i) x[i] = m.links.theta_xi.at(i - l.xi_begin);
  for (std::size_t i = l.sigma_begin; i < l.sigma_end; ++i) x[i] = m.links.theta_sigma.at(i - l.sigma_begin);
  if (l.a_beta >= 0) x[static_cast<std::size_t>(l.a_beta)] = std::log(m.links.a_beta);
  if (l.a_sigma >= 0) x[static_cast<std::size_t>(l.a_sigma)] = std::log(m.links.a_sigma);
  return x;
}

std::vector<double> natural_parameters(const MarkModelSpec& spec, std::span<const double> x) {
  const auto l = layout(spec);
  std::vector<double> out(x.begin(), x.end());
  out[l.pi] = logistic(x[l.pi]);
  out[l.alpha] = logistic(x[l.alpha]);
  if (spec.body == BodyFamily::zinb) {
    out[l.body_begin] = std::exp(x[l.body_begin]);
    out[l.body_begin + 1] = logistic(x[l.body_begin + 1]);
  }
  if (l.a_beta >= 0) out[static_cast<std::size_t>(l.a_beta)] = std::exp(x[static_cast<std::size_t>(l.a_beta)]);
  if (l.a_sigma >= 0) out[static_cast<std::size_t>(l.a_sigma)] = std::exp(x[static_cast<std::size_t>(l.a_sigma)]);
  return out;
}

MarkModel model_from_natural(const MarkModelSpec& spec, std::span<const double> natural) {
  const auto l = layout(spec);
  if (natural.size() < l.size) throw std::invalid_argument("natural parameter row too short");
  std::vector<double> x(natural.begin(), natural.begin() + static_cast<std::ptrdiff_t>(l.size));
  x[l.pi] = logit(natural[l.pi]);
  x[l.alpha] = logit(natural[l.alpha]);
  if (spec.body == BodyFamily::zinb) {
    x[l.body_begin] = std::log(natural[l.body_begin]);
    x[l.body_begin + 1] = logit(natural[l.body_begin + 1]);
  }
  if (l.a_beta >= 0) x[static_cast<std::size_t>(l.a_beta)] = std::log(natural[static_cast<std::size_t>(l.a_beta)]);
  if (l.a_sigma >= 0)
    x[static_cast<std::size_t>(l.a_sigma)] = std::log(natural[static_cast<std::size_t>(l.a_sigma)]);
  return model_from_unconstrained(spec, x);
}

double mark_log_likelihood(const MarkData& data, const MarkModel& model) {
  if (!data.covariates.empty() && data.covariates.size() != data.marks.size())
    throw std::invalid_argument("covariates must match marks");
  double ll = 0.0;
  const MarkCovariates none{};
  for (std::size_t i = 0; i < data.marks.size(); ++i) {
    MarkDistribution d(model.resolve(data.covariates.empty() ? none : data.covariates[i]));
    ll += d.log_pmf(data.marks[i]);
  }
  return ll;
}

double mark_log_prior(std::span<const double> x) {
  double lp = 0.0;
  for (double v : x) lp += -0.5 * v * v - 0.5 * std::log(2.0 * std::numbers::pi);
  return lp;
}

PosteriorChain mark_mh_sampler(const MarkData& data, const MarkModelSpec& spec, const MarkMhConfig& config) {
  spec.validate();
  if (config.thin < 1) throw std::invalid_argument("thin must be at least 1");
  if (config.n_samples <= config.burn_in) throw std::invalid_argument("n_samples must exceed burn_in");
  if (!data.covariates.empty() && data.covariates.size() != data.marks.size())
    throw std::invalid_argument("covariates must match marks");
  if (config.use_likelihood && data.marks.empty()) throw std::invalid_argument("no marks to fit");

  const auto l = layout(spec);
  const Evaluator ev(data, spec);
  Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // start at the empirical split and prior means elsewhere
  std::vector<double> x(l.size, 0.0);
  if (config.use_likelihood) {
    const double n = ev.n_body + ev.n_tail;
    x[l.pi] = logit(std::clamp(ev.n_body / n, 0.01, 0.99));
  }

  auto ll_of = [&](Part part, const MarkModel& m) -> double {
    if (!config.use_likelihood) return 0.0;
    return safe([&] {
      switch (part) {
        case Part::pi: return ev.pi_ll(m);
        case Part::body: return ev.body_ll(m);
        default: return ev.tail_ll(m);
      }
    });
  };

  MarkModel model = model_from_unconstrained(spec, x);
  double ll_pi = ll_of(Part::pi, model), ll_body = ll_of(Part::body, model), ll_tail = ll_of(Part::tail, model);
  if (!std::isfinite(ll_pi + ll_body + ll_tail)) throw std::runtime_error("initial mark state has zero likelihood");

  std::vector<double> step(l.size, config.initial_step);
  std::vector<std::size_t> window_acc(l.size, 0), window_prop(l.size, 0);
  std::vector<std::size_t> last_accept(l.size, 0);

  PosteriorChain chain;
  chain.names = mark_parameter_names(spec);
  chain.names.push_back("log_lik");
  chain.names.push_back("log_post");
  chain.seed = config.seed;
  chain.n_samples = config.n_samples;
  chain.burn_in = config.burn_in;
  chain.thin = config.thin;
  auto& acc_block = chain.acceptance["marks"];
  chain.rows.reserve(retained_count(config.n_samples, config.burn_in, config.thin));

  for (std::size_t it = 0; it < config.n_samples; ++it) {
    for (std::size_t j = 0; j < l.size; ++j) {
      const Part part = part_of(l, j);
      auto proposal = x;
      proposal[j] += step[j] * normal(rng);
      const MarkModel pm = model_from_unconstrained(spec, proposal);
      const double ll_new = ll_of(part, pm);
      const double ll_old = part == Part::pi ? ll_pi : part == Part::body ? ll_body : ll_tail;
      const double log_ratio = ll_new - ll_old - 0.5 * (proposal[j] * proposal[j] - x[j] * x[j]);
      const bool accept = std::isfinite(ll_new) && std::log(unif(rng)) < log_ratio;
      ++window_prop[j];
      if (it >= config.burn_in) acc_block.record(accept);
      if (accept) {
        x = std::move(proposal);
        model = pm;
        (part == Part::pi ? ll_pi : part == Part::body ? ll_body : ll_tail) = ll_new;
        ++window_acc[j];
        last_accept[j] = it;
      }
      if (it >= config.burn_in && it - std::max(last_accept[j], config.burn_in) >= config.stall_window) {
        std::ostringstream msg;
        msg << "mark sampler: no acceptance for " << chain.names[j] << " over " << config.stall_window
            << " iterations (step size " << step[j] << ")";
        throw std::runtime_error(msg.str());
      }
    }
    if (it < config.burn_in && (it + 1) % config.adapt_every == 0) {
      for (std::size_t j = 0; j < l.size; ++j) {
        const double rate = double(window_acc[j]) / double(window_prop[j]);
        if (rate < 0.15) step[j] *= 0.7;
        else if (rate > 0.35) step[j] *= 1.4;
        window_acc[j] = window_prop[j] = 0;
      }
    }
    if (is_retained(it, config.burn_in, config.thin)) {
      auto row = natural_parameters(spec, x);
      const double ll = ll_pi + ll_body + ll_tail;
      row.push_back(ll);
      row.push_back(ll + mark_log_prior(x));
      chain.rows.push_back(std::move(row));
    }
  }
  return chain;
}

double dic(std::span<const double> deviances, double deviance_at_mode) {
  if (deviances.empty()) throw std::invalid_argument("DIC needs at least one deviance");
  double mean = 0.0;
  for (double d : deviances) mean += d;
  mean /= double(deviances.size());
  return 2.0 * mean - deviance_at_mode;
}

double dic(const PosteriorChain& chain, const MarkData& data, const MarkModelSpec& spec) {
  if (chain.empty()) throw std::invalid_argument("DIC needs a non-empty chain");
  const auto names = mark_parameter_names(spec);
  std::vector<std::size_t> cols;
  for (const auto& n : names) cols.push_back(chain.index_of(n));
  std::vector<double> dev;
  dev.reserve(chain.size());
  for (const auto& row : chain.rows) {
    std::vector<double> natural;
    for (auto c : cols) natural.push_back(row[c]);
    const auto model = model_from_natural(spec, natural);
    const auto x = unconstrained_from_model(spec, model);
    dev.push_back(-2.0 * (mark_log_likelihood(data, model) + mark_log_prior(x)));
  }
  const double d_mode = *std::min_element(dev.begin(), dev.end());
  return dic(dev, d_mode);
}

}  // namespace exhawkes::marks
