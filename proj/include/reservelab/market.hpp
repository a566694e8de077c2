#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "reservelab/context.hpp"
#include "reservelab/noise.hpp"
#include "reservelab/rng.hpp"

namespace reservelab {

// Ground truth of one simulated market instance. Buyer i's valuation in
// round t is <beta, x_t> + eps_{i,t} with i.i.d. noise; everything here is
// immutable after construction and shared read-only across replications.
struct MarketConfig {
  Eigen::VectorXd beta;
  NoiseModel noise;
  ContextModel context;
  int n_buyers = 0;
  double v_max = 0.0;
  double a_max = 0.0;
  double eta = 0.0;  // buyers' utility discount factor, in (0,1)

  double common_value(const Eigen::VectorXd& x) const { return beta.dot(x); }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string joined() const;
};

// Checks the standing model assumptions: valuations stay in [0, v_max] over
// the whole context support, the noise is mean-zero with a positive density
// floor, the context covariance is positive definite, and the scalar
// parameters are in range. Never throws; returns the violation list.
ValidationReport validate_market(const MarketConfig& config);

struct Round {
  Eigen::VectorXd context;
  std::vector<double> valuations;
};

Round sample_round(const MarketConfig& config, RngStream& rng);

}  // namespace reservelab
