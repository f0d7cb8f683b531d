#pragma once

#include <functional>
#include <vector>

namespace exhawkes::optim {

struct NelderMeadOptions {
  double initial_step{0.5};
  double ftol{1e-10};
  double xtol{1e-9};
  int max_evaluations{20000};
};

struct NelderMeadResult {
  std::vector<double> x;
  double value{0.0};
  int evaluations{0};
  bool converged{false};
};

// Minimizes f. Non-finite values are treated as +infinity.
[[nodiscard]] NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                           std::vector<double> x0, const NelderMeadOptions& options = {});

}  // namespace exhawkes::optim
