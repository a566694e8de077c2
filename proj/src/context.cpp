#include "reservelab/context.hpp"

#include <cmath>
#include <stdexcept>

namespace reservelab {

ContextModel::ContextModel(int d, std::vector<double> lower, std::vector<double> upper,
                           double x_max, std::optional<Eigen::MatrixXd> mixing)
    : d_(d), lower_(std::move(lower)), upper_(std::move(upper)), x_max_(x_max),
      mixing_(std::move(mixing)) {
  if (d_ < 1) throw std::invalid_argument("context: d must be >= 1");
  if (!(x_max_ > 0.0)) throw std::invalid_argument("context: x_max must be positive");
  if (lower_.size() != static_cast<std::size_t>(d_) ||
      upper_.size() != static_cast<std::size_t>(d_))
    throw std::invalid_argument("context: bounds must have length d");
  for (int j = 0; j < d_; ++j) {
    if (!(upper_[j] > lower_[j]))
      throw std::invalid_argument("context: each coordinate needs upper > lower");
  }
  if (mixing_) {
    if (mixing_->rows() != d_ || mixing_->cols() != d_)
      throw std::invalid_argument("context: mixing matrix must be d x d");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(*mixing_);
    if (!lu.isInvertible())
      throw std::invalid_argument("context: mixing matrix must be full rank");
  }
}

Eigen::VectorXd ContextModel::sample(RngStream& rng) const {
  Eigen::VectorXd u(d_);
  for (int j = 0; j < d_; ++j) u[j] = rng.uniform(lower_[j], upper_[j]);
  if (mixing_) return (*mixing_) * u;
  return u;
}

Eigen::MatrixXd ContextModel::covariance() const {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d_, d_);
  for (int j = 0; j < d_; ++j) {
    double w = upper_[j] - lower_[j];
    cov(j, j) = w * w / 12.0;
  }
  if (mixing_) cov = (*mixing_) * cov * mixing_->transpose();
  return cov;
}

double ContextModel::lambda0_sq() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance());
  return es.eigenvalues().minCoeff();
}

std::pair<double, double> ContextModel::value_interval(const Eigen::VectorXd& w) const {
  Eigen::VectorXd coeff = mixing_ ? Eigen::VectorXd(mixing_->transpose() * w) : w;
  double lo = 0.0, hi = 0.0;
  for (int j = 0; j < d_; ++j) {
    double a = coeff[j] * lower_[j];
    double b = coeff[j] * upper_[j];
    lo += std::min(a, b);
    hi += std::max(a, b);
  }
  return {lo, hi};
}

double ContextModel::sup_norm_bound() const {
  double worst = 0.0;
  for (int i = 0; i < d_; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d_);
    e[i] = 1.0;
    auto [lo, hi] = value_interval(e);
    worst = std::max(worst, std::max(std::abs(lo), std::abs(hi)));
  }
  return worst;
}

}  // namespace reservelab
