#pragma once

#include <string>
#include <vector>

namespace exhawkes::gp {

// Trigger input x = (dt, ds, m): elapsed time, spatial distance and mark, all on the unit scale.
struct TriggerInput {
  double dt{0.0};
  double ds{0.0};
  double m{0.0};
};

enum class KernelKind { squared_exponential, rational_quadratic, periodic, separable };
enum class SpaceMarkForm { squared_exponential, rational_quadratic };

struct CovarianceKernel {
  KernelKind kind{KernelKind::separable};
  double length{1.0};    // SE, RQ
  double alpha{1.0};     // RQ shape, and the RQ space-mark factor of the separable kernel
  int periodic_s{1};     // Periodic smoothness, 1..3
  double length_t{0.3};  // separable
  double length_s{1.0};  // separable
  SpaceMarkForm space_mark{SpaceMarkForm::rational_quadratic};

  static CovarianceKernel squared_exponential(double l);
  static CovarianceKernel rational_quadratic(double alpha, double l);
  static CovarianceKernel periodic(int s);
  // exp(-dt^2 / 2 l_t^2) * (1 + r^2 / (2 alpha l_s^2))^(-alpha), r the (ds, m) distance
  static CovarianceKernel separable_rq(double l_t, double l_s, double alpha);
  // exp(-dt^2 / 2 l_t^2) * exp(-r^2 / 2 l_s^2)
  static CovarianceKernel separable_se(double l_t, double l_s);

  [[nodiscard]] double operator()(const TriggerInput& x, const TriggerInput& y) const;
  [[nodiscard]] bool is_separable() const { return kind == KernelKind::separable; }
  [[nodiscard]] double time_factor(double t1, double t2) const;
  [[nodiscard]] double space_mark_factor(double s1, double m1, double s2, double m2) const;
  void validate() const;

  // Log-scale hyperparameters sampled by adaptive Metropolis, in a fixed order.
  [[nodiscard]] std::vector<std::string> hyperparameter_names() const;
  [[nodiscard]] std::vector<double> log_hyperparameters() const;
  [[nodiscard]] CovarianceKernel with_log_hyperparameters(const std::vector<double>& theta) const;

  [[nodiscard]] std::string describe() const;
  [[nodiscard]] static CovarianceKernel parse(const std::string& description);
};

}  // namespace exhawkes::gp
