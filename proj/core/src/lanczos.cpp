#include "exhawkes/gp/lanczos.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace exhawkes::gp {
namespace {

EigenPairs top_from_tridiagonal(const Eigen::MatrixXd& q, const std::vector<double>& alpha,
                                const std::vector<double>& beta, std::size_t m, std::size_t k, double& residual) {
  Eigen::VectorXd diag(m), off(m > 0 ? m - 1 : 0);
  for (std::size_t i = 0; i < m; ++i) diag[i] = alpha[i];
  for (std::size_t i = 0; i + 1 < m; ++i) off[i] = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  const auto& theta = es.eigenvalues();    // ascending
  const auto& s = es.eigenvectors();
  EigenPairs out;
  k = std::min(k, m);
  out.values.resize(k);
  out.vectors.resize(q.rows(), k);
  residual = 0.0;
  const double bm = m > 0 && beta.size() >= m ? beta[m - 1] : 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const auto col = static_cast<Eigen::Index>(m - 1 - j);
    out.values[j] = theta[col];
    out.vectors.col(j) = q.leftCols(m) * s.col(col);
    residual = std::max(residual, std::abs(bm * s(m - 1, col)));
  }
  return out;
}

}  // namespace

EigenPairs dense_top_eigenpairs(const Eigen::MatrixXd& a, std::size_t k) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
  const auto n = static_cast<std::size_t>(a.rows());
  k = std::min(k, n);
  EigenPairs out;
  out.values.resize(k);
  out.vectors.resize(a.rows(), k);
  for (std::size_t j = 0; j < k; ++j) {
    out.values[j] = es.eigenvalues()[n - 1 - j];
    out.vectors.col(j) = es.eigenvectors().col(n - 1 - j);
  }
  out.converged = true;
  out.iterations = n;
  return out;
}

EigenPairs lanczos_top_eigenpairs(const Eigen::MatrixXd& a, std::size_t k, const LanczosOptions& options) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix must be square");
  const auto n = static_cast<std::size_t>(a.rows());
  if (k == 0 || k > n) throw std::invalid_argument("requested rank must be in [1, n]");
  const std::size_t max_steps = options.max_steps == 0 ? n : std::min(options.max_steps, n);
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);

  std::mt19937 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_unit = [&](std::size_t m, const Eigen::MatrixXd& q) {
    for (int attempt = 0; attempt < 10; ++attempt) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(n));
      for (auto& x : v) x = normal(rng);
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t j = 0; j < m; ++j) v -= q.col(j).dot(v) * q.col(j);
      const double nv = v.norm();
      if (nv > 1e-8) return Eigen::VectorXd(v / nv);
    }
    throw std::runtime_error("Lanczos restart could not find a new direction");
  };

  Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(max_steps));
  std::vector<double> alpha, beta;
  q.col(0) = random_unit(0, q);
  std::size_t check_at = std::min(max_steps, std::max<std::size_t>(2 * k, k + 20));
  EigenPairs best;
  for (std::size_t m = 0; m < max_steps; ++m) {
    Eigen::VectorXd w = a * q.col(m);
    alpha.push_back(q.col(m).dot(w));
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(m + 1) * (q.leftCols(m + 1).transpose() * w);
    double b = w.norm();
    const std::size_t steps = m + 1;
    if (steps == check_at || steps == max_steps || b < 1e-13 * scale) {
      double residual = 0.0;
      beta.push_back(b);
      best = top_from_tridiagonal(q, alpha, beta, steps, k, residual);
      beta.pop_back();
      best.iterations = steps;
      const double ref = std::max(std::abs(best.values[0]), 1e-300);
      best.converged = steps >= k && residual <= options.tolerance * ref;
      if (best.converged || steps == max_steps) return best;
      check_at = std::min(max_steps, 2 * check_at);
    }
    if (m + 1 == max_steps) break;
    if (b < 1e-13 * scale) {
      // invariant subspace found: restart with a fresh orthogonal direction
      q.col(m + 1) = random_unit(m + 1, q);
      beta.push_back(0.0);
    } else {
      q.col(m + 1) = w / b;
      beta.push_back(b);
    }
  }
  return best;
}

}  // namespace exhawkes::gp
