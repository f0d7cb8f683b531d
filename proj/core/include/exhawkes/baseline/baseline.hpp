#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "exhawkes/baseline/covariates.hpp"
#include "exhawkes/core/pattern.hpp"
#include "exhawkes/core/scaler.hpp"

namespace exhawkes::baseline {

enum class TermKind { intercept, x, y, x2, y2, t, covariate };

struct DesignTerm {
  TermKind kind{TermKind::intercept};
  std::string covariate;  // for TermKind::covariate

  [[nodiscard]] std::string name() const;
  // "1", "x", "y", "x2", "y2", "t"; anything else names a covariate field
  [[nodiscard]] static DesignTerm parse(const std::string& name);
};

// Covariate vector Z(s, t) on the unit scale. Covariate terms are looked up in fields whose
// sites have been mapped to the unit square; the calendar year comes from the scaler.
class BaselineDesign {
 public:
  BaselineDesign();
  BaselineDesign(std::vector<DesignTerm> terms, const std::map<std::string, CovariateField>& fields = {},
                 const UnitScaler& scaler = {});

  [[nodiscard]] static BaselineDesign intercept_only() { return BaselineDesign(); }
  [[nodiscard]] static BaselineDesign from_names(const std::vector<std::string>& names,
                                                 const std::map<std::string, CovariateField>& fields = {},
                                                 const UnitScaler& scaler = {});

  [[nodiscard]] std::size_t size() const { return terms_.size(); }
  [[nodiscard]] std::vector<std::string> names() const;
  [[nodiscard]] const std::vector<DesignTerm>& terms() const { return terms_; }
  [[nodiscard]] bool is_intercept_only() const;
  void row(double t, Point2 s, double* out) const;
  [[nodiscard]] Eigen::VectorXd row(double t, Point2 s) const;

 private:
  std::vector<DesignTerm> terms_;
  std::map<std::string, CovariateField> fields_;  // unit-scale sites
  UnitScaler scaler_;
};

// exp(Z^T theta); throws std::overflow_error when the exponent exceeds 700.
[[nodiscard]] double mu_star(double t, Point2 s, const Eigen::VectorXd& theta, const BaselineDesign& design);
[[nodiscard]] double guarded_exp(double eta);

struct QuadratureOptions {
  int nt{64};
  int nx{32};
  int ny{32};
};

// Cell-centred dummy nodes on the unit cube plus optional data nodes. Each cell's
// volume is shared equally by the dummy node and the data points falling in the cell,
// so the weights sum to 1.
class QuadratureScheme {
 public:
  QuadratureScheme() = default;
  QuadratureScheme(const BaselineDesign& design, const QuadratureOptions& options,
                   std::span<const MarkedEvent> data = {});

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  [[nodiscard]] const Eigen::MatrixXd& design() const { return z_; }
  [[nodiscard]] const Eigen::VectorXd& weights() const { return weights_; }
  // sum_k w_k (mu*(node_k) - 1)
  [[nodiscard]] double integral(const Eigen::VectorXd& theta) const;
  // value, gradient and (optionally) Hessian of the integral with respect to theta
  double integral(const Eigen::VectorXd& theta, Eigen::VectorXd& grad, Eigen::MatrixXd* hess) const;

 private:
  Eigen::MatrixXd z_;
  Eigen::VectorXd weights_;
  bool constant_{false};
};

// Background log density with respect to the unit-rate Poisson process on the unit cube,
// with design rows of every event precomputed.
class BaselineLikelihood {
 public:
  BaselineLikelihood() = default;
  BaselineLikelihood(const PointPattern& unit_pattern, BaselineDesign design, const QuadratureOptions& options = {});

  [[nodiscard]] const BaselineDesign& design() const { return design_; }
  [[nodiscard]] const QuadratureScheme& quadrature() const { return quadrature_; }
  [[nodiscard]] const Eigen::MatrixXd& event_design() const { return z_events_; }
  [[nodiscard]] std::size_t events() const { return static_cast<std::size_t>(z_events_.rows()); }
  [[nodiscard]] double log_mu(std::size_t i, const Eigen::VectorXd& theta) const;
  [[nodiscard]] Eigen::VectorXd mu(const Eigen::VectorXd& theta) const;
  // sum over background of log mu* - integral of (mu* - 1)
  [[nodiscard]] double log_density(std::span<const std::size_t> background, const Eigen::VectorXd& theta) const;

 private:
  BaselineDesign design_;
  QuadratureScheme quadrature_;
  Eigen::MatrixXd z_events_;
};

[[nodiscard]] double log_density(const PointPattern& background, const Eigen::VectorXd& theta,
                                 const BaselineDesign& design, const QuadratureOptions& options = {});

struct BaselineFit {
  Eigen::VectorXd theta;
  Eigen::VectorXd standard_errors;
  double log_density{0.0};
  bool converged{false};
  int iterations{0};
  int restarts{0};
};

// Newton maximization of the background log density; throws when the pattern has fewer
// than size+1 events or no start converges.
[[nodiscard]] BaselineFit mle_fit_baseline(const PointPattern& background, const BaselineDesign& design,
                                           const QuadratureOptions& options = {}, int max_restarts = 3);

}  // namespace exhawkes::baseline
