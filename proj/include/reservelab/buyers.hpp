#pragma once

#include <variant>
#include <vector>

#include "reservelab/rng.hpp"

namespace reservelab {

// Bid-generation behaviors. Every strategy except RandomAnomalous submits
// b = clamp(v - a, 0, v_max) with |a| <= a_max; positive a shades, negative a
// overbids. RandomAnomalous is deliberately unconstrained within [0, v_max].
struct Truthful {};

struct ConstantShader {
  double a = 0.0;
};

struct PhaseShader {
  std::vector<double> a_per_phase;  // indexed by phase-1; last entry repeats
};

// Shades by `shade` until the configured round, then reverts to truthful.
// Mimics a budget-limited response to the isolation lottery: the caller picks
// stop_after_period so the cumulative expected isolation loss stays below a
// chosen budget (see expected_isolation_loss).
struct IsolationAwareHeuristic {
  double shade = 0.0;
  long stop_after_period = 0;
};

struct RandomAnomalous {
  double lo = 0.0;
  double hi = 0.0;  // bid ~ Uniform(lo, hi), required within [0, v_max]
};

using BuyerStrategy =
    std::variant<Truthful, ConstantShader, PhaseShader, IsolationAwareHeuristic, RandomAnomalous>;

// The nominal corruption a the strategy applies this round (0 for Truthful;
// meaningless for RandomAnomalous and reported as 0).
double nominal_corruption(const BuyerStrategy& strategy, long round, int phase);

double form_bid(const BuyerStrategy& strategy, double valuation, long round, int phase,
                double v_max, RngStream& rng);

struct UtilityTrace {
  struct Entry {
    bool won = false;
    double valuation = 0.0;
    double payment = 0.0;
  };
  std::vector<Entry> rounds;  // rounds[k] is round k+1
};

// Realized discounted utility sum_{tau >= from_round} eta^tau (v w - p).
double discounted_utility(const UtilityTrace& trace, double eta, long from_round);

// Per-round expected utility loss of bidding v - a under the isolation
// lottery: isolated with probability 1/(n_buyers * phase_len) at a
// Uniform(0, v_max) posted price, a fixed one-sided deviation a costs
// a^2 / (2 v_max) conditional on isolation.
double expected_isolation_loss(double a, double v_max, int n_buyers, long phase_len);

}  // namespace reservelab
