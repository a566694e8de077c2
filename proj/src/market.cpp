#include "reservelab/market.hpp"

#include <cmath>
#include <sstream>

namespace reservelab {

std::string ValidationReport::joined() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i];
  }
  return os.str();
}

ValidationReport validate_market(const MarketConfig& config) {
  ValidationReport report;
  auto fail = [&report](const std::string& what) { report.violations.push_back(what); };

  if (config.n_buyers < 1) fail("n_buyers: must be >= 1");
  if (!(config.v_max > 0.0)) fail("v_max: must be positive");
  if (config.a_max < 0.0) fail("a_max: must be nonnegative");
  if (!(config.eta > 0.0 && config.eta < 1.0)) fail("eta: must lie in (0,1)");
  if (config.beta.size() != config.context.dim())
    fail("beta: length must equal context dimension");

  if (std::abs(config.noise.mean()) > 1e-9) {
    std::ostringstream os;
    os << "mean zero: noise mean is " << config.noise.mean();
    fail(os.str());
  }
  if (!(config.noise.density_inf() > 0.0)) fail("density floor: inf f must be positive");
  if (!std::isfinite(config.noise.density_sup())) fail("density bound: sup f must be finite");

  if (config.context.sup_norm_bound() > config.context.x_max() + 1e-12)
    fail("context bound: ||x||_inf can exceed x_max on the support");
  if (!(config.context.lambda0_sq() > 0.0))
    fail("covariance: smallest eigenvalue must be positive");

  if (config.beta.size() == config.context.dim()) {
    auto [cv_lo, cv_hi] = config.context.value_interval(config.beta);
    if (cv_hi + config.noise.eps_max() > config.v_max + 1e-12) {
      std::ostringstream os;
      os << "valuation bound: max <beta,x> + eps_max = " << cv_hi + config.noise.eps_max()
         << " exceeds v_max = " << config.v_max;
      fail(os.str());
    }
    if (cv_lo - config.noise.eps_max() < -1e-12) {
      std::ostringstream os;
      os << "valuation bound: min <beta,x> - eps_max = " << cv_lo - config.noise.eps_max()
         << " is negative";
      fail(os.str());
    }
  }
  return report;
}

Round sample_round(const MarketConfig& config, RngStream& rng) {
  Round round;
  round.context = config.context.sample(rng);
  double cv = config.common_value(round.context);
  round.valuations.resize(config.n_buyers);
  for (int i = 0; i < config.n_buyers; ++i)
    round.valuations[i] = cv + config.noise.sample(rng);
  return round;
}

}  // namespace reservelab
