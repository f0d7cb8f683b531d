#include "exhawkes/optim/nelder_mead.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>
#include <memory>

namespace exhawkes::optim {
namespace {

struct Context {
  const std::function<double(const std::vector<double>&)>* f;
  std::vector<double> x;
  int evaluations{0};
};

double trampoline(const gsl_vector* v, void* params) {
  auto* ctx = static_cast<Context*>(params);
  for (std::size_t i = 0; i < ctx->x.size(); ++i) ctx->x[i] = gsl_vector_get(v, i);
  ++ctx->evaluations;
  const double value = (*ctx->f)(ctx->x);
  // the simplex treats a huge finite value as a rejected point
  return std::isfinite(value) ? value : std::numeric_limits<double>::max() / 4;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  Context ctx{&f, x0, 0};
  gsl_multimin_function fn{&trampoline, n, &ctx};

  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), &gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(n), &gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, x0[i]);
  gsl_vector_set_all(step.get(), options.initial_step);

  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), &gsl_multimin_fminimizer_free);
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), step.get());

  bool converged = false;
  double previous = std::numeric_limits<double>::infinity();
  int flat_rounds = 0;
  while (ctx.evaluations < options.max_evaluations) {
    if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(solver.get());
    const double value = solver->fval;
    // converged when the simplex is small and the best value stopped moving
    flat_rounds = std::abs(previous - value) <= options.ftol * (std::abs(value) + options.ftol) ? flat_rounds + 1 : 0;
    previous = value;
    if (size < options.xtol && flat_rounds >= static_cast<int>(n)) {
      converged = true;
      break;
    }
  }
  gsl_set_error_handler(old);

  NelderMeadResult out;
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.x[i] = gsl_vector_get(solver->x, i);
  out.value = solver->fval;
  out.evaluations = ctx.evaluations;
  out.converged = converged;
  if (out.value >= std::numeric_limits<double>::max() / 8) out.value = std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace exhawkes::optim
