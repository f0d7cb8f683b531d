#include "exhawkes/baseline/baseline.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace exhawkes::baseline {

std::string DesignTerm::name() const {
  switch (kind) {
    case TermKind::intercept: return "1";
    case TermKind::x: return "x";
    case TermKind::y: return "y";
    case TermKind::x2: return "x2";
    case TermKind::y2: return "y2";
    case TermKind::t: return "t";
    case TermKind::covariate: return covariate;
  }
  return "";
}

DesignTerm DesignTerm::parse(const std::string& name) {
  if (name == "1" || name == "intercept") return {TermKind::intercept, ""};
  if (name == "x") return {TermKind::x, ""};
  if (name == "y") return {TermKind::y, ""};
  if (name == "x2") return {TermKind::x2, ""};
  if (name == "y2") return {TermKind::y2, ""};
  if (name == "t") return {TermKind::t, ""};
  if (name.empty()) throw std::invalid_argument("empty design term name");
  return {TermKind::covariate, name};
}

BaselineDesign::BaselineDesign() : terms_{DesignTerm{}} {}

BaselineDesign::BaselineDesign(std::vector<DesignTerm> terms, const std::map<std::string, CovariateField>& fields,
                               const UnitScaler& scaler)
    : terms_(std::move(terms)), scaler_(scaler) {
  if (terms_.empty()) throw std::invalid_argument("baseline design needs at least one term");
  for (const auto& term : terms_) {
    if (term.kind != TermKind::covariate) continue;
    auto it = fields.find(term.covariate);
    if (it == fields.end()) throw std::invalid_argument("no covariate field named '" + term.covariate + "'");
    fields_.emplace(term.covariate, it->second.rescaled(scaler));
  }
}

BaselineDesign BaselineDesign::from_names(const std::vector<std::string>& names,
                                          const std::map<std::string, CovariateField>& fields,
                                          const UnitScaler& scaler) {
  std::vector<DesignTerm> terms;
  for (const auto& n : names) terms.push_back(DesignTerm::parse(n));
  return BaselineDesign(std::move(terms), fields, scaler);
}

std::vector<std::string> BaselineDesign::names() const {
  std::vector<std::string> out;
  for (const auto& t : terms_) out.push_back(t.name());
  return out;
}

bool BaselineDesign::is_intercept_only() const {
  return terms_.size() == 1 && terms_[0].kind == TermKind::intercept;
}

void BaselineDesign::row(double t, Point2 s, double* out) const {
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const DesignTerm& term = terms_[k];
    switch (term.kind) {
      case TermKind::intercept: out[k] = 1.0; break;
      case TermKind::x: out[k] = s.x; break;
      case TermKind::y: out[k] = s.y; break;
      case TermKind::x2: out[k] = s.x * s.x; break;
      case TermKind::y2: out[k] = s.y * s.y; break;
      case TermKind::t: out[k] = t; break;
      case TermKind::covariate: out[k] = fields_.at(term.covariate).value(s, scaler_.unscale_time(t)); break;
    }
  }
}

Eigen::VectorXd BaselineDesign::row(double t, Point2 s) const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(size()));
  row(t, s, z.data());
  return z;
}

double guarded_exp(double eta) {
  if (eta > 700.0) throw std::overflow_error("baseline exponent exceeds 700");
  return std::exp(eta);
}

double mu_star(double t, Point2 s, const Eigen::VectorXd& theta, const BaselineDesign& design) {
  if (static_cast<std::size_t>(theta.size()) != design.size())
    throw std::invalid_argument("theta length does not match the baseline design");
  return guarded_exp(design.row(t, s).dot(theta));
}

QuadratureScheme::QuadratureScheme(const BaselineDesign& design, const QuadratureOptions& o,
                                   std::span<const MarkedEvent> data) {
  if (o.nt < 4 || o.nx < 4 || o.ny < 4) throw std::invalid_argument("quadrature needs at least 4 nodes per axis");
  constant_ = design.is_intercept_only();
  const std::size_t cells = std::size_t(o.nt) * std::size_t(o.nx) * std::size_t(o.ny);
  auto cell_of = [&](double t, Point2 s) {
    auto clamp = [](double v, int n) { return std::min(n - 1, std::max(0, static_cast<int>(std::floor(v * n)))); };
    return (std::size_t(clamp(t, o.nt)) * std::size_t(o.nx) + std::size_t(clamp(s.x, o.nx))) * std::size_t(o.ny) +
           std::size_t(clamp(s.y, o.ny));
  };
  std::vector<int> count(cells, 1);
  for (const auto& e : data) ++count[cell_of(e.t, e.s)];
  const auto n = static_cast<Eigen::Index>(cells + data.size());
  const auto d = static_cast<Eigen::Index>(design.size());
  z_.resize(n, d);
  weights_.resize(n);
  const double vol = 1.0 / double(cells);
  Eigen::VectorXd row(d);
  Eigen::Index k = 0;
  for (int it = 0; it < o.nt; ++it)
    for (int ix = 0; ix < o.nx; ++ix)
      for (int iy = 0; iy < o.ny; ++iy, ++k) {
        design.row((it + 0.5) / o.nt, Point2{(ix + 0.5) / o.nx, (iy + 0.5) / o.ny}, row.data());
        z_.row(k) = row.transpose();
        weights_[k] = vol / count[static_cast<std::size_t>(k)];
      }
  for (const auto& e : data) {
    design.row(e.t, e.s, row.data());
    z_.row(k) = row.transpose();
    weights_[k++] = vol / count[cell_of(e.t, e.s)];
  }
}

double QuadratureScheme::integral(const Eigen::VectorXd& theta) const {
  if (constant_) return guarded_exp(theta[0]) - 1.0;
  const Eigen::VectorXd eta = z_ * theta;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k) sum += weights_[k] * (guarded_exp(eta[k]) - 1.0);
  return sum;
}

double QuadratureScheme::integral(const Eigen::VectorXd& theta, Eigen::VectorXd& grad, Eigen::MatrixXd* hess) const {
  const Eigen::VectorXd eta = z_ * theta;
  Eigen::VectorXd wm(eta.size());
  double sum = 0.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    const double m = guarded_exp(eta[k]);
    wm[k] = weights_[k] * m;
    sum += weights_[k] * (m - 1.0);
  }
  grad = z_.transpose() * wm;
  if (hess) *hess = z_.transpose() * wm.asDiagonal() * z_;
  return sum;
}

BaselineLikelihood::BaselineLikelihood(const PointPattern& unit_pattern, BaselineDesign design,
                                       const QuadratureOptions& options)
    : design_(std::move(design)) {
  if (!unit_pattern.domain().is_unit()) throw std::invalid_argument("baseline likelihood needs a unit-scaled pattern");
  const auto& ev = unit_pattern.events();
  quadrature_ = QuadratureScheme(design_, options, ev);
  z_events_.resize(static_cast<Eigen::Index>(ev.size()), static_cast<Eigen::Index>(design_.size()));
  Eigen::VectorXd row(static_cast<Eigen::Index>(design_.size()));
  for (std::size_t i = 0; i < ev.size(); ++i) {
    design_.row(ev[i].t, ev[i].s, row.data());
    z_events_.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
}

double BaselineLikelihood::log_mu(std::size_t i, const Eigen::VectorXd& theta) const {
  return z_events_.row(static_cast<Eigen::Index>(i)).dot(theta);
}

Eigen::VectorXd BaselineLikelihood::mu(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd eta = z_events_ * theta;
  for (auto& v : eta) v = guarded_exp(v);
  return eta;
}

double BaselineLikelihood::log_density(std::span<const std::size_t> background, const Eigen::VectorXd& theta) const {
  double sum = 0.0;
  for (std::size_t i : background) {
    const double eta = log_mu(i, theta);
    if (eta > 700.0) throw std::overflow_error("baseline exponent exceeds 700");
    sum += eta;
  }
  return sum - quadrature_.integral(theta);
}

double log_density(const PointPattern& background, const Eigen::VectorXd& theta, const BaselineDesign& design,
                   const QuadratureOptions& options) {
  const BaselineLikelihood lik(background, design, options);
  std::vector<std::size_t> all(background.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return lik.log_density(all, theta);
}

BaselineFit mle_fit_baseline(const PointPattern& background, const BaselineDesign& design,
                             const QuadratureOptions& options, int max_restarts) {
  const std::size_t d = design.size();
  if (background.empty()) throw std::invalid_argument("cannot fit a baseline to an empty pattern");
  if (background.size() < d + 1)
    throw std::invalid_argument("baseline fit needs at least " + std::to_string(d + 1) + " events");
  const BaselineLikelihood lik(background, design, options);
  const Eigen::VectorXd zsum = lik.event_design().colwise().sum().transpose();
  auto objective = [&](const Eigen::VectorXd& th) {
    try {
      return zsum.dot(th) - lik.quadrature().integral(th);
    } catch (const std::overflow_error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  Eigen::VectorXd start = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k)
    if (design.terms()[k].kind == TermKind::intercept) start[static_cast<Eigen::Index>(k)] = std::log(double(background.size()));
  Rng rng(20240611);
  std::normal_distribution<double> jitter(0.0, 0.5);

  BaselineFit fit;
  for (int attempt = 0; attempt <= max_restarts; ++attempt) {
    Eigen::VectorXd th = start;
    if (attempt > 0)
      for (auto& v : th) v += jitter(rng);
    double value = objective(th);
    if (!std::isfinite(value)) continue;
    bool converged = false;
    int iter = 0;
    Eigen::MatrixXd hess;
    Eigen::VectorXd grad;
    for (; iter < 200; ++iter) {
      lik.quadrature().integral(th, grad, &hess);
      const Eigen::VectorXd g = zsum - grad;
      const Eigen::VectorXd step = hess.ldlt().solve(g);
      if (!step.allFinite()) break;
      double t = 1.0;
      double next = objective(th + step);
      while ((!std::isfinite(next) || next < value - 1e-12) && t > 1e-10) {
        t *= 0.5;
        next = objective(th + t * step);
      }
      if (!std::isfinite(next)) break;
      th += t * step;
      const double change = std::abs(next - value);
      value = next;
      if ((t * step).norm() < 1e-10 * (1.0 + th.norm()) || change < 1e-13 * (1.0 + std::abs(value))) {
        converged = g.norm() < 1e-6 * (1.0 + zsum.norm());
        if (converged) break;
      }
    }
    fit.restarts = attempt;
    fit.iterations = iter;
    if (converged) {
      Eigen::VectorXd grad2;
      Eigen::MatrixXd h2;
      lik.quadrature().integral(th, grad2, &h2);
      fit.theta = th;
      fit.log_density = value;
      fit.standard_errors = h2.inverse().diagonal().cwiseSqrt();
      fit.converged = true;
      return fit;
    }
  }
  throw std::runtime_error("baseline MLE did not converge after " + std::to_string(max_restarts + 1) + " starts");
}

}  // namespace exhawkes::baseline
