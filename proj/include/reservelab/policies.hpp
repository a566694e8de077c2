#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reservelab/estimation.hpp"
#include "reservelab/market.hpp"
#include "reservelab/ols.hpp"
#include "reservelab/pricing.hpp"
#include "reservelab/rng.hpp"

namespace reservelab {

struct ReserveDecision {
  double reserve = 0.0;                // the price actually posted
  std::optional<int> isolated_buyer;   // set during isolation rounds
  double planned_reserve = 0.0;        // the non-isolation reserve for this round
};

struct ObservedRound {
  Eigen::VectorXd context;
  std::vector<double> bids;  // one bid per buyer, every round
  bool isolation = false;
  int isolated_buyer = -1;
  double reserve = 0.0;
};

// decide/observe alternate strictly within one replication; policy state is
// single-owner and never shared.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual ReserveDecision decide(const Eigen::VectorXd& x, RngStream& rng) = 0;
  virtual void observe(const ObservedRound& round) = 0;
  virtual std::string name() const = 0;
  virtual std::optional<EstimateSnapshot> snapshot() const { return std::nullopt; }
  virtual const PhaseSchedule* schedule() const { return nullptr; }
};

class FixedReservePolicy : public Policy {
 public:
  explicit FixedReservePolicy(double reserve) : reserve_(reserve) {}
  ReserveDecision decide(const Eigen::VectorXd&, RngStream&) override {
    return {reserve_, std::nullopt, reserve_};
  }
  void observe(const ObservedRound&) override {}
  std::string name() const override { return "fixed"; }

 private:
  double reserve_;
};

// Clairvoyant oracle: knows beta and the noise distribution and prices each
// context at the revenue-maximizing reserve. Stateless and time-invariant.
class BenchmarkPolicy : public Policy {
 public:
  explicit BenchmarkPolicy(const MarketConfig& config);
  ReserveDecision decide(const Eigen::VectorXd& x, RngStream&) override;
  void observe(const ObservedRound&) override {}
  std::string name() const override { return "benchmark"; }
  const TruthfulRevenueModel& model() const { return model_; }

 private:
  Eigen::VectorXd beta_;
  double v_max_;
  TruthfulRevenueModel model_;
};

// Keeps the sorted multiset of residuals raw_value[i] - <beta, x[i]> across
// beta refits. The permutation from the previous refit is nearly sorted, so
// an insertion pass is usually O(n); badly shuffled rounds fall back to a
// full sort.
class ResidualTracker {
 public:
  void append() {
    perm_.push_back(static_cast<int>(perm_.size()));
    vals_.push_back(0.0);
  }
  template <typename F>
  void rebuild(F&& residual_of) {
    std::size_t n = perm_.size();
    for (std::size_t i = 0; i < n; ++i) vals_[i] = residual_of(perm_[i]);
    resort();
  }
  const std::vector<double>& sorted() const { return vals_; }

 private:
  void resort();
  std::vector<int> perm_;
  std::vector<double> vals_;
};

// All-history policy for truthful buyers: refits beta by OLS on the average
// bid each round and rebuilds the top-two residual ECDFs from the stored raw
// rounds (beta moves every round, so the residuals all shift). The rebuild is
// the dominant cost; refresh_every > 1 trades staleness for speed.
class NpacTPolicy : public Policy {
 public:
  NpacTPolicy(int d, double v_max, long refresh_every = 1);
  ReserveDecision decide(const Eigen::VectorXd& x, RngStream&) override;
  void observe(const ObservedRound& round) override;
  std::string name() const override { return "npac-t"; }
  std::optional<EstimateSnapshot> snapshot() const override;
  const Eigen::VectorXd& beta_hat() const { return beta_hat_; }

 private:
  int d_;
  double v_max_;
  long refresh_every_;
  long t_ = 0;
  OlsAccumulator ols_;
  std::vector<Eigen::VectorXd> xs_;
  std::vector<double> tops_, seconds_;
  Eigen::VectorXd beta_hat_;
  ResidualTracker track_minus_, track_plus_;
  StepCdf f_minus_, f_plus_;
  std::vector<double> cv_scratch_;
};

// Phased policy for strategic buyers. Phase l prices with estimates built
// from phase l-1 only; each round, with probability 1/|E_l|, one buyer is
// isolated at a Uniform(0, v_max) price.
class NpacSPolicy : public Policy {
 public:
  NpacSPolicy(int d, int n_buyers, double v_max, long horizon);
  ReserveDecision decide(const Eigen::VectorXd& x, RngStream& rng) override;
  void observe(const ObservedRound& round) override;
  std::string name() const override { return "npac-s"; }
  std::optional<EstimateSnapshot> snapshot() const override;
  const PhaseSchedule* schedule() const override { return &sched_; }

 private:
  int d_;
  int n_buyers_;
  double v_max_;
  PhaseSchedule sched_;
  long t_ = 0;
  std::vector<BidRound> phase_data_;
  std::optional<EstimateSnapshot> snap_;
};

// Anomaly-robust policy: per-buyer OLS + residual ECDFs, MAX-COMP clustering
// to pick an estimate consistent with the truthful majority, and a capped
// reserve search. Rounds 1..9 post reserve 0.
class NpacAPolicy : public Policy {
 public:
  struct Options {
    double h_bar;                           // feasible-region slack
    double x_max;                           // scales the beta edge threshold
    std::optional<double> beta_threshold;   // override (default 2 delta_t / x_max)
    std::optional<double> cdf_threshold;    // override (default 2(log t delta_t + gamma_t))
    long burn_in = 9;                       // rounds priced at 0
  };

  NpacAPolicy(int d, int n_buyers, double v_max, Options options);
  ReserveDecision decide(const Eigen::VectorXd& x, RngStream&) override;
  void observe(const ObservedRound& round) override;
  std::string name() const override { return "npac-a"; }
  std::optional<EstimateSnapshot> snapshot() const override;
  const std::vector<PerBuyerEstimate>& estimates() const { return estimates_; }
  MaxCompResult cluster(long round) const;  // MAX-COMP on the current estimates

 private:
  int d_;
  int n_buyers_;
  double v_max_;
  Options opt_;
  long t_ = 0;
  OlsAccumulator gram_;  // shared design; per-buyer moments below
  std::vector<Eigen::VectorXd> moments_;
  std::vector<Eigen::VectorXd> xs_;
  std::vector<std::vector<double>> bids_;
  std::vector<ResidualTracker> trackers_;
  std::vector<PerBuyerEstimate> estimates_;
  std::vector<double> cv_scratch_;
  mutable std::optional<EstimateSnapshot> last_snapshot_;
};

}  // namespace reservelab
