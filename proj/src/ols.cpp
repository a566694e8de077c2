#include "reservelab/ols.hpp"

#include <stdexcept>

namespace reservelab {

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric);
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  double cutoff = 1e-12 * std::max(vals.cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(vals.size());
  for (int i = 0; i < vals.size(); ++i)
    if (vals[i] > cutoff) inv[i] = 1.0 / vals[i];
  return vecs * inv.asDiagonal() * vecs.transpose();
}

Eigen::VectorXd OlsAccumulator::solve_for(const Eigen::VectorXd& moment) const {
  if (rows_ == 0) return Eigen::VectorXd::Zero(gram_.rows());
  return pseudo_inverse(gram_) * moment;
}

Eigen::VectorXd ols_fit(const std::vector<Eigen::VectorXd>& xs, const std::vector<double>& ys) {
  if (xs.empty() || xs.size() != ys.size())
    throw std::invalid_argument("ols_fit: needs equally many contexts and responses");
  OlsAccumulator acc(static_cast<int>(xs.front().size()));
  for (std::size_t i = 0; i < xs.size(); ++i) acc.add(xs[i], ys[i]);
  return acc.solve();
}

}  // namespace reservelab
