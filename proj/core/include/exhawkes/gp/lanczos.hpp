#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace exhawkes::gp {

struct EigenPairs {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match values
  bool converged{false};
  std::size_t iterations{0};
};

struct LanczosOptions {
  double tolerance{1e-11};  // residual |beta_m s_mi| relative to the largest Ritz value
  std::size_t max_steps{0};  // 0 means the matrix size
  unsigned seed{12345};
};

// Top-k eigenpairs of a symmetric matrix by Lanczos with full
// reorthogonalization. converged is false when the residual test fails at max_steps.
[[nodiscard]] EigenPairs lanczos_top_eigenpairs(const Eigen::MatrixXd& a, std::size_t k,
                                                const LanczosOptions& options = {});

// Dense symmetric eigensolver, top-k in descending order.
[[nodiscard]] EigenPairs dense_top_eigenpairs(const Eigen::MatrixXd& a, std::size_t k);

}  // namespace exhawkes::gp
