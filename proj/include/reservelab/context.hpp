#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "reservelab/rng.hpp"

namespace reservelab {

// Context generator: independent per-coordinate uniforms on [lower_j, upper_j],
// optionally mixed by a fixed full-rank square matrix. The mixing route makes
// the covariance positive definite analytically instead of empirically.
class ContextModel {
 public:
  ContextModel() = default;  // empty shell; parse/construct before use
  ContextModel(int d, std::vector<double> lower, std::vector<double> upper,
               double x_max, std::optional<Eigen::MatrixXd> mixing = std::nullopt);

  int dim() const { return d_; }
  double x_max() const { return x_max_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  bool has_mixing() const { return mixing_.has_value(); }
  const Eigen::MatrixXd& mixing() const { return *mixing_; }

  Eigen::VectorXd sample(RngStream& rng) const;

  // Covariance of the sampling distribution (exact: diag((hi-lo)^2/12),
  // congruence-transformed by the mixing matrix when present).
  Eigen::MatrixXd covariance() const;
  double lambda0_sq() const;  // smallest eigenvalue of the covariance

  // Exact range of <w, x> over the support box (interval arithmetic on the
  // pre-mix coordinates; the map is affine so the extremes are attained).
  std::pair<double, double> value_interval(const Eigen::VectorXd& w) const;

  // Exact sup over the support of |x_i| for each output coordinate; used to
  // verify the ||x||_inf <= x_max invariant.
  double sup_norm_bound() const;

 private:
  int d_ = 0;
  std::vector<double> lower_, upper_;
  double x_max_ = 0.0;
  std::optional<Eigen::MatrixXd> mixing_;
};

}  // namespace reservelab
