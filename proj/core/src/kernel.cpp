#include "exhawkes/gp/kernel.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "exhawkes/core/stats.hpp"

namespace exhawkes::gp {
namespace {

double rq(double d2, double alpha, double l) { return std::pow(1.0 + d2 / (2.0 * alpha * l * l), -alpha); }

// 1 + sum_m 2 cos(2 pi m x) / (2 pi m)^(2s) = 1 + (-1)^(s+1) B_2s({x}) / (2s)!
double periodic_1d(double x, int s) {
  x -= std::floor(x);
  const double x2 = x * x;
  switch (s) {
    case 1: return 1.0 + (x2 - x + 1.0 / 6.0) / 2.0;
    case 2: return 1.0 - (x2 * x2 - 2.0 * x2 * x + x2 - 1.0 / 30.0) / 24.0;
    default:
      return 1.0 + (x2 * x2 * x2 - 3.0 * x2 * x2 * x + 2.5 * x2 * x2 - 0.5 * x2 + 1.0 / 42.0) / 720.0;
  }
}

}  // namespace

CovarianceKernel CovarianceKernel::squared_exponential(double l) {
  CovarianceKernel k;
  k.kind = KernelKind::squared_exponential;
  k.length = l;
  k.validate();
  return k;
}

CovarianceKernel CovarianceKernel::rational_quadratic(double alpha, double l) {
  CovarianceKernel k;
  k.kind = KernelKind::rational_quadratic;
  k.alpha = alpha;
  k.length = l;
  k.validate();
  return k;
}

CovarianceKernel CovarianceKernel::periodic(int s) {
  CovarianceKernel k;
  k.kind = KernelKind::periodic;
  k.periodic_s = s;
  k.validate();
  return k;
}

CovarianceKernel CovarianceKernel::separable_rq(double l_t, double l_s, double alpha) {
  CovarianceKernel k;
  k.kind = KernelKind::separable;
  k.space_mark = SpaceMarkForm::rational_quadratic;
  k.length_t = l_t;
  k.length_s = l_s;
  k.alpha = alpha;
  k.validate();
  return k;
}

CovarianceKernel CovarianceKernel::separable_se(double l_t, double l_s) {
  CovarianceKernel k;
  k.kind = KernelKind::separable;
  k.space_mark = SpaceMarkForm::squared_exponential;
  k.length_t = l_t;
  k.length_s = l_s;
  k.validate();
  return k;
}

void CovarianceKernel::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
  };
  switch (kind) {
    case KernelKind::squared_exponential: positive(length, "length scale"); break;
    case KernelKind::rational_quadratic:
      positive(length, "length scale");
      positive(alpha, "rational quadratic alpha");
      break;
    case KernelKind::periodic:
      if (periodic_s < 1 || periodic_s > 3) throw std::invalid_argument("periodic smoothness s must be 1, 2 or 3");
      break;
    case KernelKind::separable:
      positive(length_t, "time length scale");
      positive(length_s, "space-mark length scale");
      if (space_mark == SpaceMarkForm::rational_quadratic) positive(alpha, "rational quadratic alpha");
      break;
  }
}

double CovarianceKernel::time_factor(double t1, double t2) const {
  const double d = t1 - t2;
  return std::exp(-d * d / (2.0 * length_t * length_t));
}

double CovarianceKernel::space_mark_factor(double s1, double m1, double s2, double m2) const {
  const double d2 = (s1 - s2) * (s1 - s2) + (m1 - m2) * (m1 - m2);
  if (space_mark == SpaceMarkForm::squared_exponential) return std::exp(-d2 / (2.0 * length_s * length_s));
  return rq(d2, alpha, length_s);
}

double CovarianceKernel::operator()(const TriggerInput& x, const TriggerInput& y) const {
  switch (kind) {
    case KernelKind::squared_exponential: {
      const double d2 = (x.dt - y.dt) * (x.dt - y.dt) + (x.ds - y.ds) * (x.ds - y.ds) + (x.m - y.m) * (x.m - y.m);
      return std::exp(-d2 / (2.0 * length * length));
    }
    case KernelKind::rational_quadratic: {
      const double d2 = (x.dt - y.dt) * (x.dt - y.dt) + (x.ds - y.ds) * (x.ds - y.ds) + (x.m - y.m) * (x.m - y.m);
      return rq(d2, alpha, length);
    }
    case KernelKind::periodic:
      return periodic_1d(x.dt - y.dt, periodic_s) * periodic_1d(x.ds - y.ds, periodic_s) *
             periodic_1d(x.m - y.m, periodic_s);
    case KernelKind::separable: return time_factor(x.dt, y.dt) * space_mark_factor(x.ds, x.m, y.ds, y.m);
  }
  return 0.0;
}

std::vector<std::string> CovarianceKernel::hyperparameter_names() const {
  switch (kind) {
    case KernelKind::squared_exponential: return {"log_l"};
    case KernelKind::rational_quadratic: return {"log_l", "log_alpha"};
    case KernelKind::periodic: return {};
    case KernelKind::separable:
      if (space_mark == SpaceMarkForm::rational_quadratic) return {"log_l_t", "log_l_s", "log_alpha_s"};
      return {"log_l_t", "log_l_s"};
  }
  return {};
}

std::vector<double> CovarianceKernel::log_hyperparameters() const {
  switch (kind) {
    case KernelKind::squared_exponential: return {std::log(length)};
    case KernelKind::rational_quadratic: return {std::log(length), std::log(alpha)};
    case KernelKind::periodic: return {};
    case KernelKind::separable:
      if (space_mark == SpaceMarkForm::rational_quadratic)
        return {std::log(length_t), std::log(length_s), std::log(alpha)};
      return {std::log(length_t), std::log(length_s)};
  }
  return {};
}

CovarianceKernel CovarianceKernel::with_log_hyperparameters(const std::vector<double>& theta) const {
  if (theta.size() != hyperparameter_names().size()) throw std::invalid_argument("wrong number of kernel hyperparameters");
  CovarianceKernel k = *this;
  switch (kind) {
    case KernelKind::squared_exponential: k.length = std::exp(theta[0]); break;
    case KernelKind::rational_quadratic:
      k.length = std::exp(theta[0]);
      k.alpha = std::exp(theta[1]);
      break;
    case KernelKind::periodic: break;
    case KernelKind::separable:
      k.length_t = std::exp(theta[0]);
      k.length_s = std::exp(theta[1]);
      if (space_mark == SpaceMarkForm::rational_quadratic) k.alpha = std::exp(theta[2]);
      break;
  }
  k.validate();
  return k;
}

std::string CovarianceKernel::describe() const {
  std::ostringstream out;
  using stats::format_double;
  switch (kind) {
    case KernelKind::squared_exponential: out << "se;l=" << format_double(length); break;
    case KernelKind::rational_quadratic:
      out << "rq;l=" << format_double(length) << ";alpha=" << format_double(alpha);
      break;
    case KernelKind::periodic: out << "periodic;s=" << periodic_s; break;
    case KernelKind::separable:
      out << (space_mark == SpaceMarkForm::rational_quadratic ? "separable_rq" : "separable_se")
          << ";l_t=" << format_double(length_t) << ";l_s=" << format_double(length_s);
      if (space_mark == SpaceMarkForm::rational_quadratic) out << ";alpha=" << format_double(alpha);
      break;
  }
  return out.str();
}

CovarianceKernel CovarianceKernel::parse(const std::string& description) {
  std::istringstream in(description);
  std::string kind_name, item;
  std::getline(in, kind_name, ';');
  std::map<std::string, double> values;
  while (std::getline(in, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad kernel description '" + description + "'");
    values[item.substr(0, eq)] = stats::parse_double(item.substr(eq + 1));
  }
  auto get = [&](const char* key) {
    auto it = values.find(key);
    if (it == values.end()) throw std::invalid_argument("kernel description lacks '" + std::string(key) + "'");
    return it->second;
  };
  if (kind_name == "se") return squared_exponential(get("l"));
  if (kind_name == "rq") return rational_quadratic(get("alpha"), get("l"));
  if (kind_name == "periodic") return periodic(static_cast<int>(get("s")));
  if (kind_name == "separable_rq") return separable_rq(get("l_t"), get("l_s"), get("alpha"));
  if (kind_name == "separable_se") return separable_se(get("l_t"), get("l_s"));
  throw std::invalid_argument("unknown kernel kind '" + kind_name + "'");
}

}  // namespace exhawkes::gp
