#include "oracles.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "exhawkes/core/stats.hpp"

namespace oracle {

double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = double(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  // Kolmogorov limit with the Stephens small-sample correction
  const double sn = std::sqrt(double(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0.0;
  for (int k = 1; k <= 200; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(double(i) / double(a.size()) - double(j) / double(b.size())));
  }
  return d;
}

double ks_two_sample_pvalue(double d, std::size_t n, std::size_t m) {
  const double ne = double(n) * double(m) / double(n + m);
  const double sn = std::sqrt(ne);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0.0;
  for (int k = 1; k <= 200; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

double chi_square_pvalue(std::span<const double> observed, std::span<const double> expected, int lost_dof) {
  std::vector<double> o, e;
  double acc_o = 0.0, acc_e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_o += observed[i];
    acc_e += expected[i];
    if (acc_e >= 5.0) {
      o.push_back(acc_o);
      e.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0) {
    if (e.empty()) {
      o.push_back(acc_o);
      e.push_back(acc_e);
    } else {
      o.back() += acc_o;
      e.back() += acc_e;
    }
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) stat += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  const int dof = int(o.size()) - 1 - lost_dof;
  if (dof < 1) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double standard_normal_cdf(double z) { return boost::math::cdf(boost::math::normal(), z); }

double gamma_cdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return boost::math::cdf(boost::math::gamma_distribution<>(shape, 1.0 / rate), x);
}

std::vector<double> thin_to_independent(std::span<const double> chain) {
  const double ess = exhawkes::stats::effective_sample_size(chain);
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(double(chain.size()) / ess)));
  std::vector<double> out;
  for (std::size_t i = 0; i < chain.size(); i += step) out.push_back(chain[i]);
  return out;
}

void gauss_legendre(int n, double lo, double hi, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) j(i, i - 1) = j(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  for (int i = 0; i < n; ++i) {
    const double v = es.eigenvectors()(0, i);
    x.push_back(lo + (hi - lo) * (es.eigenvalues()[i] + 1.0) / 2.0);
    w.push_back((hi - lo) * v * v);
  }
}

Eigen::MatrixXd quadrature_outer(const exhawkes::gp::EigenBasis& b, const exhawkes::gp::TriggerSource& root, int nt,
                                 int nxy) {
  std::vector<double> tx, tw, xx, xw, yx, yw;
  gauss_legendre(nt, 0.0, 1.0 - root.t, tx, tw);
  gauss_legendre(nxy, 0.0, root.s.x, xx, xw);
  gauss_legendre(nxy, root.s.x, 1.0, xx, xw);
  gauss_legendre(nxy, 0.0, root.s.y, yx, yw);
  gauss_legendre(nxy, root.s.y, 1.0, yx, yw);
  std::vector<exhawkes::gp::TriggerInput> in;
  std::vector<double> wt;
  for (std::size_t a = 0; a < tx.size(); ++a)
    for (std::size_t c = 0; c < xx.size(); ++c)
      for (std::size_t d = 0; d < yx.size(); ++d) {
        in.push_back({tx[a], std::hypot(xx[c] - root.s.x, yx[d] - root.s.y), root.m});
        wt.push_back(tw[a] * xw[c] * yw[d]);
      }
  Eigen::MatrixXd e;
  b.features(in, e);
  const Eigen::Map<const Eigen::VectorXd> w(wt.data(), static_cast<Eigen::Index>(wt.size()));
  return e.transpose() * w.asDiagonal() * e;
}

double scalar_phi(const exhawkes::gp::EigenBasis& b, const Eigen::VectorXd& omega, double a,
                  const exhawkes::gp::TriggerInput& x) {
  const Eigen::MatrixXd v = b.grid_eigenvectors();
  const double p = double(b.rank());
  double f = 0.0;
  for (std::size_t i = 0; i < b.rank(); ++i) {
    double proj = 0.0;
    for (std::size_t u = 0; u < b.grid_size(); ++u)
      proj += b.kernel()(x, b.grid().point(u)) * v(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(i));
    f += omega[static_cast<Eigen::Index>(i)] * std::sqrt(p) / b.eigenvalues()[static_cast<Eigen::Index>(i)] * proj;
  }
  return a * f * f;
}

}  // namespace oracle
