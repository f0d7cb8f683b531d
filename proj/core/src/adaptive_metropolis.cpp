#include "exhawkes/inference/adaptive_metropolis.hpp"

#include <random>
#include <stdexcept>

namespace exhawkes::inference {

AdaptiveMetropolis::AdaptiveMetropolis(std::size_t dim, std::size_t start, double epsilon, double initial_sd)
    : dim_(dim), start_(start), epsilon_(epsilon), initial_sd_(initial_sd) {
  if (!(epsilon > 0.0) || !(initial_sd > 0.0)) throw std::invalid_argument("AM needs epsilon > 0 and initial sd > 0");
  const auto d = static_cast<Eigen::Index>(dim);
  mean_ = Eigen::VectorXd::Zero(d);
  m2_ = Eigen::MatrixXd::Zero(d, d);
}

void AdaptiveMetropolis::observe(const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != dim_) throw std::invalid_argument("AM state has the wrong dimension");
  ++count_;
  const Eigen::VectorXd before = x - mean_;
  mean_ += before / double(count_);
  m2_.noalias() += before * (x - mean_).transpose();
  m2_ = 0.5 * (m2_ + m2_.transpose());
}

Eigen::MatrixXd AdaptiveMetropolis::covariance() const {
  if (count_ < 2) return Eigen::MatrixXd::Zero(m2_.rows(), m2_.cols());
  return m2_ / double(count_ - 1);
}

Eigen::MatrixXd AdaptiveMetropolis::proposal_covariance() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  if (count_ < std::max<std::size_t>(start_, 2)) return initial_sd_ * initial_sd_ * eye;
  return 2.38 * 2.38 / double(dim_) * (covariance() + epsilon_ * eye);
}

Eigen::VectorXd AdaptiveMetropolis::propose(const Eigen::VectorXd& x, Rng& rng) const {
  const Eigen::LLT<Eigen::MatrixXd> chol(proposal_covariance());
  if (chol.info() != Eigen::Success) throw std::runtime_error("AM proposal covariance is not positive definite");
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd step(x.size());
  for (Eigen::Index i = 0; i < step.size(); ++i) step[i] = z(rng);
  return x + chol.matrixL() * step;
}

nlohmann::json AdaptiveMetropolis::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["start"] = start_;
  j["epsilon"] = epsilon_;
  j["initial_sd"] = initial_sd_;
  j["count"] = count_;
  j["mean"] = std::vector<double>(mean_.data(), mean_.data() + mean_.size());
  j["m2"] = std::vector<double>(m2_.data(), m2_.data() + m2_.size());
  return j;
}

AdaptiveMetropolis AdaptiveMetropolis::from_json(const nlohmann::json& j) {
  AdaptiveMetropolis am(j.at("dim").get<std::size_t>(), j.at("start").get<std::size_t>(),
                        j.at("epsilon").get<double>(), j.at("initial_sd").get<double>());
  am.count_ = j.at("count").get<std::size_t>();
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto m2 = j.at("m2").get<std::vector<double>>();
  if (mean.size() != am.dim_ || m2.size() != am.dim_ * am.dim_) throw std::runtime_error("AM state has the wrong size");
  am.mean_ = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  am.m2_ = Eigen::Map<const Eigen::MatrixXd>(m2.data(), static_cast<Eigen::Index>(am.dim_),
                                             static_cast<Eigen::Index>(am.dim_));
  return am;
}

}  // namespace exhawkes::inference
