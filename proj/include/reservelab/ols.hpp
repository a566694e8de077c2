#pragma once

#include <Eigen/Dense>
#include <vector>

namespace reservelab {

// Running ordinary-least-squares state: Gram matrix and moment vector kept
// as sums so refits are O(d^2) per round. The solve goes through a
// pseudo-inverse (eigendecomposition of the d x d Gram, eigenvalues below
// 1e-12 of the largest treated as zero), so rank-deficient designs are fine.
class OlsAccumulator {
 public:
  explicit OlsAccumulator(int d)
      : gram_(Eigen::MatrixXd::Zero(d, d)), moment_(Eigen::VectorXd::Zero(d)), rows_(0) {}

  void add(const Eigen::VectorXd& x, double y) {
    gram_.noalias() += x * x.transpose();
    moment_.noalias() += x * y;
    ++rows_;
  }

  long rows() const { return rows_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& moment_matrix() const { return gram_; }
  const Eigen::VectorXd& moment() const { return moment_; }

  Eigen::VectorXd solve() const { return solve_for(moment_); }
  Eigen::VectorXd solve_for(const Eigen::VectorXd& moment) const;

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd moment_;
  long rows_;
};

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& symmetric);

Eigen::VectorXd ols_fit(const std::vector<Eigen::VectorXd>& xs, const std::vector<double>& ys);

}  // namespace reservelab
