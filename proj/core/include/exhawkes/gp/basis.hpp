#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "exhawkes/core/pattern.hpp"
#include "exhawkes/gp/kernel.hpp"
#include "exhawkes/gp/lanczos.hpp"

namespace exhawkes::gp {

// Regular grid on the unit cube of trigger inputs. Point (i, j, k) sits at
// ((i + offset_t) / r_t, (j + offset_s) / r_s, (k + offset_m) / r_m); the
// default offsets give cell centres. Flat index is (i * r_s + j) * r_m + k.
struct InducingGrid {
  int r_t{8};
  int r_s{8};
  int r_m{8};
  double offset_t{0.5};
  double offset_s{0.5};
  double offset_m{0.5};

  [[nodiscard]] std::size_t size() const { return std::size_t(r_t) * std::size_t(r_s) * std::size_t(r_m); }
  [[nodiscard]] double t_at(int i) const { return (i + offset_t) / r_t; }
  [[nodiscard]] double s_at(int j) const { return (j + offset_s) / r_s; }
  [[nodiscard]] double m_at(int k) const { return (k + offset_m) / r_m; }
  [[nodiscard]] TriggerInput point(std::size_t index) const;
  void validate() const;

  static InducingGrid uniform(int r) { return InducingGrid{r, r, r}; }
  // same resolution, fresh uniform offsets per axis
  [[nodiscard]] InducingGrid renewed(Rng& rng) const;
};

struct DecomposeOptions {
  double jitter{1e-9};
  double floor{1e-10};  // relative to the leading eigenvalue
  bool use_kronecker{true};
  // keep the requested rank, raising eigenvalues below the floor to the floor
  bool fixed_rank{false};
  LanczosOptions lanczos;
};

// Truncated eigendecomposition of K_uu with the feature map
// e_i(x) = sqrt(p) / lambda_i * K_xu e_i^u, p the retained rank, and
// eta_i = lambda_i / p, so that sum_i eta_i e_i(x) e_i(y) reproduces K at grid points.
class EigenBasis {
 public:
  EigenBasis() = default;

  [[nodiscard]] std::size_t rank() const { return static_cast<std::size_t>(values_.size()); }
  [[nodiscard]] std::size_t grid_size() const { return grid_.size(); }
  [[nodiscard]] const Eigen::VectorXd& eigenvalues() const { return values_; }
  [[nodiscard]] Eigen::VectorXd eta() const { return values_ / double(rank()); }
  [[nodiscard]] Eigen::MatrixXd grid_eigenvectors() const;
  [[nodiscard]] double residual() const { return residual_; }
  [[nodiscard]] bool used_fallback() const { return fallback_; }
  [[nodiscard]] bool kronecker() const { return kronecker_; }
  [[nodiscard]] const CovarianceKernel& kernel() const { return kernel_; }
  [[nodiscard]] const InducingGrid& grid() const { return grid_; }

  [[nodiscard]] Eigen::VectorXd features(const TriggerInput& x) const;
  // rows of out are the feature vectors of xs
  void features(std::span<const TriggerInput> xs, Eigen::MatrixXd& out) const;

  [[nodiscard]] double khat(const TriggerInput& x, const TriggerInput& y) const;
  [[nodiscard]] double ktilde(const TriggerInput& x, const TriggerInput& y, double a, double gamma) const;

  void save(std::ostream& out) const;
  [[nodiscard]] static EigenBasis load(std::istream& in);
  // stable key of (kernel, grid, rank, options) for cache files
  [[nodiscard]] static std::string cache_key(const CovarianceKernel& k, const InducingGrid& g, std::size_t rank,
                                             const DecomposeOptions& options);

  friend EigenBasis decompose(const CovarianceKernel& k, const InducingGrid& grid, std::size_t rank,
                              const DecomposeOptions& options);

 private:
  CovarianceKernel kernel_;
  InducingGrid grid_;
  Eigen::VectorXd values_;
  Eigen::VectorXd scale_;  // sqrt(n) / lambda_i
  double residual_{0.0};
  bool fallback_{false};
  bool kronecker_{false};
  // dense representation
  Eigen::MatrixXd vectors_;
  // Kronecker representation: component c = time_vectors_(:, comp_t_[c]) (x) sm_vectors_(:, comp_sm_[c])
  Eigen::MatrixXd time_vectors_;
  Eigen::MatrixXd sm_vectors_;
  std::vector<int> comp_t_;
  std::vector<int> comp_sm_;  // index into sm_used_
  std::vector<int> sm_used_;  // distinct space-mark factor columns in use
  Eigen::MatrixXd sm_vectors_used_;
};

[[nodiscard]] EigenBasis decompose(const CovarianceKernel& k, const InducingGrid& grid, std::size_t rank,
                                   const DecomposeOptions& options = {});

[[nodiscard]] Eigen::VectorXd feature_map(const TriggerInput& x, const EigenBasis& basis);
[[nodiscard]] double ktilde_eval(const TriggerInput& x, const TriggerInput& y, const EigenBasis& basis, double a,
                                 double gamma);

// Loads the basis from dir/<key>.csv when present, otherwise decomposes and stores it.
[[nodiscard]] EigenBasis cached_decompose(const std::string& dir, const CovarianceKernel& k, const InducingGrid& grid,
                                          std::size_t rank, const DecomposeOptions& options = {});

}  // namespace exhawkes::gp
