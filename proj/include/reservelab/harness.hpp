#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reservelab/buyers.hpp"
#include "reservelab/market.hpp"
#include "reservelab/policies.hpp"
#include "reservelab/pricing.hpp"

namespace reservelab {

enum class RegretMode { kExpected, kRealized };
enum class RecordMode { kAuto, kFull, kThin, kNone };

struct PolicySpec {
  std::string name = "npac-t";  // benchmark | fixed | npac-t | npac-s | npac-a
  double fixed_reserve = 0.0;
  long refresh_every = 1;
  double h_bar = -1.0;  // npac-a feasible-region slack; <0 means eps_max of the true model
  std::optional<double> beta_threshold;
  std::optional<double> cdf_threshold;
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const MarketConfig& market,
                                    long horizon);

struct Scenario {
  MarketConfig market;
  PolicySpec policy;
  std::vector<BuyerStrategy> strategies;  // one per buyer
  RegretMode mode = RegretMode::kRealized;
};

// One auction round's full trace. Every regret piece is recomputable from
// the other fields.
struct RoundRecord {
  long t = 0;
  int phase = 1;
  Eigen::VectorXd context;
  bool isolation = false;
  int isolated_buyer = -1;
  double reserve = 0.0;
  double planned_reserve = 0.0;  // the non-isolation reserve for this round
  std::vector<double> valuations;
  std::vector<double> corruptions;  // a_i = v_i - b_i
  std::vector<double> bids;
  bool allocated = false;
  int winner = -1;
  std::vector<double> payments;
  double realized_revenue = 0.0;
  double benchmark_reserve = 0.0;
  double benchmark_expected_revenue = 0.0;
  double policy_expected_revenue = 0.0;  // NaN in realized mode
  double instant_regret = 0.0;
};

struct CheckpointStat {
  long t = 0;
  double beta_err_l1 = 0.0;
  double beta_err_l2 = 0.0;
  double sup_err_minus = 0.0;
  double sup_err_plus = 0.0;
  double beta_bound = 0.0;  // delta / x_max
  double minus_bound = 0.0;
  double plus_bound = 0.0;
  bool xi = false;        // beta error within bound
  bool xi_minus = false;  // F- sup error within bound
  bool xi_plus = false;   // F+ sup error within bound
};

struct RunResult {
  std::uint64_t master_seed = 0;
  std::uint64_t replication = 0;
  long horizon = 0;
  std::string policy_name;
  RegretMode mode = RegretMode::kRealized;
  bool records_complete = false;
  std::vector<RoundRecord> records;
  std::vector<double> cum_regret;  // prefix sums of instantaneous regret, one per round
  std::vector<CheckpointStat> checkpoints;
  double final_cum_regret = 0.0;
  double total_realized_revenue = 0.0;
  long isolation_rounds = 0;
};

// REV* and r* as functions of the common value, tabulated once per market
// (each node solved by the full grid+golden search) and interpolated
// linearly. Shared read-only across replications.
class BenchmarkOracle {
 public:
  explicit BenchmarkOracle(const MarketConfig& config, int nodes = 8193);
  double r_star(double cv) const;
  double rev_star(double cv) const;
  const TruthfulRevenueModel& model() const { return model_; }

 private:
  TruthfulRevenueModel model_;
  double v_max_;
  double lo_ = 0.0, hi_ = 0.0, step_ = 0.0;
  std::vector<double> r_, rev_;
};

RunResult simulate_run(const Scenario& scenario, long horizon, std::uint64_t master_seed,
                       std::uint64_t replication, const BenchmarkOracle& oracle,
                       RecordMode record_mode = RecordMode::kAuto);

// Replications fan out across `jobs` workers; results are reduced in
// replication order, so serial and parallel execution agree byte for byte.
std::vector<RunResult> run_replications(const Scenario& scenario, long horizon,
                                        std::uint64_t master_seed, int replications, int jobs,
                                        const BenchmarkOracle& oracle,
                                        RecordMode record_mode = RecordMode::kAuto);

// Instantaneous regret of one recorded round. Expected mode is only defined
// under truthful bidding and uses the closed-form conditional revenue;
// realized mode subtracts the realized revenue and is unbiased across
// replications.
double per_round_regret(const RoundRecord& record, const MarketConfig& market,
                        const BenchmarkOracle& oracle, RegretMode mode);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points_used = 0;
  std::string warning;
};

// Least-squares line through (log T, log regret); nonpositive regrets are
// excluded with a warning.
ScalingFit fit_scaling(const std::vector<double>& horizons, const std::vector<double>& regrets);

struct PhaseDiagnostics {
  int phase = 1;
  long phase_len = 0;
  double corruption_budget = 0.0;           // L_ell (NaN if out of domain)
  std::vector<long> significant;            // |S_{i,l}| per buyer
  std::vector<long> mismatch_shade;         // |B^s_{i,l}|
  std::vector<long> mismatch_overbid;       // |B^o_{i,l}|
};

struct DiagnosticsReport {
  std::vector<PhaseDiagnostics> phases;
  std::vector<CheckpointStat> checkpoints;
  double xi_freq = 0.0;
  double xi_minus_freq = 0.0;
  double xi_plus_freq = 0.0;
  long burn_in_t0 = 0;  // analysis-only threshold, nothing gates on it
};

DiagnosticsReport diagnostics(const RunResult& run, const Scenario& scenario);

}  // namespace reservelab
