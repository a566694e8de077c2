#include "reservelab/buyers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reservelab {

double nominal_corruption(const BuyerStrategy& strategy, long round, int phase) {
  struct Visitor {
    long round;
    int phase;
    double operator()(const Truthful&) const { return 0.0; }
    double operator()(const ConstantShader& s) const { return s.a; }
    double operator()(const PhaseShader& s) const {
      if (s.a_per_phase.empty()) return 0.0;
      std::size_t idx = static_cast<std::size_t>(std::max(0, phase - 1));
      if (idx >= s.a_per_phase.size()) idx = s.a_per_phase.size() - 1;
      return s.a_per_phase[idx];
    }
    double operator()(const IsolationAwareHeuristic& s) const {
      return round <= s.stop_after_period ? s.shade : 0.0;
    }
    double operator()(const RandomAnomalous&) const { return 0.0; }
  };
  return std::visit(Visitor{round, phase}, strategy);
}

double form_bid(const BuyerStrategy& strategy, double valuation, long round, int phase,
                double v_max, RngStream& rng) {
  if (std::holds_alternative<RandomAnomalous>(strategy)) {
    const auto& s = std::get<RandomAnomalous>(strategy);
    return rng.uniform(s.lo, s.hi);
  }
  double a = nominal_corruption(strategy, round, phase);
  return std::clamp(valuation - a, 0.0, v_max);
}

double discounted_utility(const UtilityTrace& trace, double eta, long from_round) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("discounted_utility: eta must lie in (0,1)");
  double total = 0.0;
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    long tau = static_cast<long>(k) + 1;
    if (tau < from_round) continue;
    const auto& e = trace.rounds[k];
    double net = (e.won ? e.valuation : 0.0) - e.payment;
    total += std::pow(eta, static_cast<double>(tau)) * net;
  }
  return total;
}

double expected_isolation_loss(double a, double v_max, int n_buyers, long phase_len) {
  if (std::abs(a) > v_max)
    throw std::invalid_argument("expected_isolation_loss: |a| must be <= v_max");
  if (n_buyers < 1 || phase_len < 1)
    throw std::invalid_argument("expected_isolation_loss: n_buyers and phase_len must be >= 1");
  return a * a / (2.0 * v_max * static_cast<double>(n_buyers) * static_cast<double>(phase_len));
}

}  // namespace reservelab
