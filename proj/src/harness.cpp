#include "reservelab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "reservelab/auction.hpp"

namespace reservelab {

namespace {

bool all_truthful(const std::vector<BuyerStrategy>& strategies) {
  for (const auto& s : strategies)
    if (!std::holds_alternative<Truthful>(s)) return false;
  return true;
}

// sup_z |S(z) - F(z)| for a step CDF against a continuous CDF: the supremum
// is attained at a jump, approached from either side.
double sup_error_vs_truth(const StepCdf& step, const NoiseModel& noise, int n_buyers,
                          bool highest) {
  if (step.empty()) return 1.0;
  double sup = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < step.xs().size(); ++i) {
    double f = noise.cdf(step.xs()[i]);
    double truth = highest ? lift_cdf_highest(f, n_buyers) : lift_cdf_second_highest(f, n_buyers);
    sup = std::max(sup, std::abs(step.vs()[i] - truth));
    sup = std::max(sup, std::abs(prev - truth));
    prev = step.vs()[i];
  }
  return sup;
}

std::vector<long> checkpoint_times(long horizon, const PhaseSchedule* sched) {
  std::vector<long> ts;
  for (long t = 10; t <= horizon; t *= 2) ts.push_back(t);
  ts.push_back(horizon);
  if (sched) {
    for (int ell = 1; ell <= sched->phase_count(); ++ell) {
      long end = sched->phase_begin(ell) + sched->phase_length(ell) - 1;
      if (end <= horizon) ts.push_back(end);
    }
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

bool keep_record(long t, long horizon, RecordMode mode) {
  switch (mode) {
    case RecordMode::kNone:
      return false;
    case RecordMode::kFull:
      return true;
    case RecordMode::kAuto:
      if (horizon <= 10000) return true;
      [[fallthrough]];
    case RecordMode::kThin: {
      if (t == horizon || t <= 16) return true;
      // geometric thinning: keep t when it crosses the next 1.05^k level
      double lg = std::log(static_cast<double>(t)) / std::log(1.05);
      long level = static_cast<long>(lg);
      double lower = std::pow(1.05, static_cast<double>(level));
      return t - 1 < lower;
    }
  }
  return true;
}

CheckpointStat make_checkpoint(long t, const EstimateSnapshot& snap, const Scenario& scenario,
                               const PhaseSchedule* sched) {
  const MarketConfig& m = scenario.market;
  CheckpointStat cp;
  cp.t = t;
  Eigen::VectorXd err = snap.beta_hat - m.beta;
  cp.beta_err_l1 = err.lpNorm<1>();
  cp.beta_err_l2 = err.norm();
  cp.sup_err_minus = sup_error_vs_truth(snap.f_minus, m.noise, m.n_buyers, false);
  cp.sup_err_plus = sup_error_vs_truth(snap.f_plus, m.noise, m.n_buyers, true);

  double x_max = m.context.x_max();
  double lambda0 = m.context.lambda0_sq();
  double c_f = m.noise.density_sup();
  double n = m.n_buyers;
  if (sched) {
    // Phase-based events: the snapshot in use was built from the previous
    // phase, so the constants are evaluated at that phase's length.
    long len = snap.built_from_end - snap.built_from_begin + 1;
    if (len >= 3) {
      try {
        double delta = rates::delta_phase(len, m.context.dim(), m.noise.eps_max(), x_max,
                                          lambda0, m.n_buyers, m.a_max, m.v_max, m.eta);
        double gamma = rates::gamma_phase(len, m.n_buyers);
        double big_l = rates::corruption_budget_L(len, m.v_max, m.n_buyers, m.eta);
        double z = gamma + c_f * delta + (c_f + big_l) / static_cast<double>(len);
        cp.beta_bound = delta / x_max;
        cp.minus_bound = 2.0 * n * n * z;
        cp.plus_bound = n * z;
      } catch (const std::invalid_argument&) {
        cp.beta_bound = cp.minus_bound = cp.plus_bound =
            std::numeric_limits<double>::quiet_NaN();
      }
    }
  } else if (t >= 3) {
    double delta = rates::delta_t(t, m.context.dim(), m.noise.eps_max(), x_max, lambda0,
                                  m.n_buyers);
    double gamma = rates::gamma_t(t);
    cp.beta_bound = delta / x_max;
    cp.minus_bound = gamma + 2.0 * c_f * n * n * delta;
    cp.plus_bound = gamma + c_f * n * delta;
  }
  cp.xi = cp.beta_err_l1 <= cp.beta_bound;
  cp.xi_minus = cp.sup_err_minus <= cp.minus_bound;
  cp.xi_plus = cp.sup_err_plus <= cp.plus_bound;
  return cp;
}

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const MarketConfig& market,
                                    long horizon) {
  if (spec.name == "benchmark") return std::make_unique<BenchmarkPolicy>(market);
  if (spec.name == "fixed") return std::make_unique<FixedReservePolicy>(spec.fixed_reserve);
  if (spec.name == "npac-t")
    return std::make_unique<NpacTPolicy>(market.context.dim(), market.v_max,
                                         spec.refresh_every);
  if (spec.name == "npac-s")
    return std::make_unique<NpacSPolicy>(market.context.dim(), market.n_buyers, market.v_max,
                                         horizon);
  if (spec.name == "npac-a") {
    NpacAPolicy::Options opt{spec.h_bar < 0.0 ? market.noise.eps_max() : spec.h_bar,
                             market.context.x_max(), spec.beta_threshold, spec.cdf_threshold};
    return std::make_unique<NpacAPolicy>(market.context.dim(), market.n_buyers, market.v_max,
                                         opt);
  }
  throw std::invalid_argument("unknown policy: " + spec.name);
}

BenchmarkOracle::BenchmarkOracle(const MarketConfig& config, int nodes)
    : model_(config.noise, config.n_buyers), v_max_(config.v_max) {
  auto [lo, hi] = config.context.value_interval(config.beta);
  lo_ = lo;
  hi_ = hi;
  if (hi_ - lo_ < 1e-12) {
    step_ = 1.0;
    r_.push_back(model_.optimize_reserve(lo_, v_max_));
    rev_.push_back(model_.expected_revenue(r_.front(), lo_));
    return;
  }
  step_ = (hi_ - lo_) / (nodes - 1);
  r_.resize(nodes);
  rev_.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    double cv = lo_ + i * step_;
    r_[i] = model_.optimize_reserve(cv, v_max_);
    rev_[i] = model_.expected_revenue(r_[i], cv);
  }
}

double BenchmarkOracle::r_star(double cv) const {
  if (r_.size() == 1) return r_.front();
  double pos = std::clamp((cv - lo_) / step_, 0.0, static_cast<double>(r_.size() - 1));
  std::size_t i = std::min(static_cast<std::size_t>(pos), r_.size() - 2);
  double w = pos - static_cast<double>(i);
  return (1.0 - w) * r_[i] + w * r_[i + 1];
}

double BenchmarkOracle::rev_star(double cv) const {
  if (rev_.size() == 1) return rev_.front();
  double pos = std::clamp((cv - lo_) / step_, 0.0, static_cast<double>(rev_.size() - 1));
  std::size_t i = std::min(static_cast<std::size_t>(pos), rev_.size() - 2);
  double w = pos - static_cast<double>(i);
  return (1.0 - w) * rev_[i] + w * rev_[i + 1];
}

double per_round_regret(const RoundRecord& record, const MarketConfig& market,
                        const BenchmarkOracle& oracle, RegretMode mode) {
  double cv = market.common_value(record.context);
  double rev_star = oracle.rev_star(cv);
  if (mode == RegretMode::kRealized) return rev_star - record.realized_revenue;
  double expected;
  if (record.isolation) {
    // Single truthful buyer at a posted price: sells iff v >= r.
    expected = record.reserve * (1.0 - market.noise.cdf(record.reserve - cv));
  } else {
    expected = oracle.model().expected_revenue(record.reserve, cv);
  }
  return rev_star - expected;
}

RunResult simulate_run(const Scenario& scenario, long horizon, std::uint64_t master_seed,
                       std::uint64_t replication, const BenchmarkOracle& oracle,
                       RecordMode record_mode) {
  const MarketConfig& market = scenario.market;
  if (scenario.mode == RegretMode::kExpected && !all_truthful(scenario.strategies))
    throw std::invalid_argument("expected-mode regret requires all-truthful buyers");
  if (static_cast<int>(scenario.strategies.size()) != market.n_buyers)
    throw std::invalid_argument("strategies: need one per buyer");

  auto policy = make_policy(scenario.policy, market, horizon);
  const PhaseSchedule* sched = policy->schedule();

  RngStream market_rng = derive_stream(master_seed, replication, StreamChannel::kMarket);
  RngStream policy_rng = derive_stream(master_seed, replication, StreamChannel::kPolicy);
  RngStream buyers_rng = derive_stream(master_seed, replication, StreamChannel::kBuyers);

  RunResult result;
  result.master_seed = master_seed;
  result.replication = replication;
  result.horizon = horizon;
  result.policy_name = policy->name();
  result.mode = scenario.mode;
  result.records_complete =
      record_mode == RecordMode::kFull ||
      (record_mode == RecordMode::kAuto && horizon <= 10000);
  result.cum_regret.reserve(horizon);

  std::vector<long> cps = checkpoint_times(horizon, sched);
  std::size_t next_cp = 0;

  double cum = 0.0;
  for (long t = 1; t <= horizon; ++t) {
    Round round = sample_round(market, market_rng);
    double cv = market.common_value(round.context);
    ReserveDecision decision = policy->decide(round.context, policy_rng);

    int phase = sched ? sched->phase_of(t) : 1;
    std::vector<double> bids(market.n_buyers);
    for (int i = 0; i < market.n_buyers; ++i)
      bids[i] = form_bid(scenario.strategies[i], round.valuations[i], t, phase, market.v_max,
                         buyers_rng);

    RoundRecord rec;
    rec.t = t;
    rec.phase = phase;
    rec.context = round.context;
    rec.reserve = decision.reserve;
    rec.planned_reserve = decision.planned_reserve;
    rec.valuations = round.valuations;
    rec.bids = bids;
    rec.corruptions.resize(market.n_buyers);
    for (int i = 0; i < market.n_buyers; ++i)
      rec.corruptions[i] = round.valuations[i] - bids[i];
    rec.payments.assign(market.n_buyers, 0.0);

    if (decision.isolated_buyer) {
      int j = *decision.isolated_buyer;
      rec.isolation = true;
      rec.isolated_buyer = j;
      AuctionOutcome iso = run_isolation(bids[j], decision.reserve);
      rec.allocated = iso.allocated;
      rec.winner = iso.allocated ? j : -1;
      if (iso.allocated) rec.payments[j] = iso.payments[0];
      rec.realized_revenue = realized_revenue(iso);
      result.isolation_rounds++;
    } else {
      AuctionOutcome out = run_second_price({bids}, decision.reserve, market.v_max);
      rec.allocated = out.allocated;
      rec.winner = out.winner ? *out.winner : -1;
      rec.payments = out.payments;
      rec.realized_revenue = realized_revenue(out);
    }

    policy->observe({round.context, bids, rec.isolation, rec.isolated_buyer, rec.reserve});

    rec.benchmark_reserve = oracle.r_star(cv);
    rec.benchmark_expected_revenue = oracle.rev_star(cv);
    if (scenario.mode == RegretMode::kExpected) {
      rec.instant_regret = per_round_regret(rec, market, oracle, RegretMode::kExpected);
      rec.policy_expected_revenue = rec.benchmark_expected_revenue - rec.instant_regret;
    } else {
      rec.policy_expected_revenue = std::numeric_limits<double>::quiet_NaN();
      rec.instant_regret = per_round_regret(rec, market, oracle, RegretMode::kRealized);
    }

    cum += rec.instant_regret;
    result.cum_regret.push_back(cum);
    result.total_realized_revenue += rec.realized_revenue;

    if (keep_record(t, horizon, record_mode)) result.records.push_back(std::move(rec));

    if (next_cp < cps.size() && t == cps[next_cp]) {
      ++next_cp;
      if (auto snap = policy->snapshot())
        result.checkpoints.push_back(make_checkpoint(t, *snap, scenario, sched));
    }
  }
  result.final_cum_regret = cum;
  return result;
}

std::vector<RunResult> run_replications(const Scenario& scenario, long horizon,
                                        std::uint64_t master_seed, int replications, int jobs,
                                        const BenchmarkOracle& oracle, RecordMode record_mode) {
  std::vector<RunResult> results(replications);
  if (jobs < 1) jobs = 1;
  jobs = std::min<int>(jobs, replications);
  if (jobs == 1) {
    for (int k = 0; k < replications; ++k)
      results[k] = simulate_run(scenario, horizon, master_seed, k, oracle, record_mode);
    return results;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&]() {
      for (int k = next.fetch_add(1); k < replications; k = next.fetch_add(1))
        results[k] = simulate_run(scenario, horizon, master_seed, k, oracle, record_mode);
    });
  }
  for (auto& th : workers) th.join();
  return results;
}

ScalingFit fit_scaling(const std::vector<double>& horizons, const std::vector<double>& regrets) {
  if (horizons.size() != regrets.size() || horizons.size() < 3)
    throw std::invalid_argument("fit_scaling: needs >= 3 (horizon, regret) pairs");
  ScalingFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(regrets[i] > 0.0)) {
      fit.warning = "nonpositive regret values excluded from the fit";
      continue;
    }
    lx.push_back(std::log(horizons[i]));
    ly.push_back(std::log(regrets[i]));
  }
  fit.points_used = static_cast<int>(lx.size());
  if (fit.points_used < 2) {
    fit.warning = "too few positive regret values to fit";
    return fit;
  }
  double n = static_cast<double>(lx.size());
  double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

DiagnosticsReport diagnostics(const RunResult& run, const Scenario& scenario) {
  if (!run.records_complete)
    throw std::runtime_error("diagnostics: records not retained");
  const MarketConfig& m = scenario.market;
  int n = m.n_buyers;

  // Phase partition: the run's schedule for npac-s, otherwise one phase.
  std::vector<std::pair<long, long>> spans;  // [begin, end] inclusive
  if (scenario.policy.name == "npac-s") {
    PhaseSchedule sched(run.horizon);
    for (int ell = 1; ell <= sched.phase_count(); ++ell)
      spans.push_back({sched.phase_begin(ell),
                       sched.phase_begin(ell) + sched.phase_length(ell) - 1});
  } else {
    spans.push_back({1, run.horizon});
  }

  DiagnosticsReport report;
  for (std::size_t p = 0; p < spans.size(); ++p) {
    PhaseDiagnostics pd;
    pd.phase = static_cast<int>(p + 1);
    pd.phase_len = spans[p].second - spans[p].first + 1;
    try {
      pd.corruption_budget = rates::corruption_budget_L(pd.phase_len, m.v_max, n, m.eta);
    } catch (const std::invalid_argument&) {
      pd.corruption_budget = std::numeric_limits<double>::quiet_NaN();
    }
    pd.significant.assign(n, 0);
    pd.mismatch_shade.assign(n, 0);
    pd.mismatch_overbid.assign(n, 0);
    report.phases.push_back(pd);
  }

  for (const auto& rec : run.records) {
    std::size_t p = 0;
    while (p + 1 < spans.size() && rec.t > spans[p].second) ++p;
    PhaseDiagnostics& pd = report.phases[p];
    double threshold = 1.0 / static_cast<double>(pd.phase_len);
    for (int i = 0; i < n; ++i) {
      if (std::abs(rec.corruptions[i]) >= threshold) pd.significant[i]++;
      double others_top = -1.0;
      for (int j = 0; j < n; ++j)
        if (j != i) others_top = std::max(others_top, rec.bids[j]);
      double bar = std::max(others_top, rec.planned_reserve);
      if (rec.valuations[i] >= bar && rec.bids[i] <= bar) pd.mismatch_shade[i]++;
      if (rec.valuations[i] <= bar && rec.bids[i] >= bar) pd.mismatch_overbid[i]++;
    }
  }

  report.checkpoints = run.checkpoints;
  long with_bounds = 0, xi = 0, xi_m = 0, xi_p = 0;
  for (const auto& cp : run.checkpoints) {
    if (!(cp.beta_bound > 0.0)) continue;
    ++with_bounds;
    xi += cp.xi;
    xi_m += cp.xi_minus;
    xi_p += cp.xi_plus;
  }
  if (with_bounds > 0) {
    report.xi_freq = static_cast<double>(xi) / with_bounds;
    report.xi_minus_freq = static_cast<double>(xi_m) / with_bounds;
    report.xi_plus_freq = static_cast<double>(xi_p) / with_bounds;
  }

  double d = m.context.dim();
  double t0 = std::max({std::sqrt(d * static_cast<double>(run.horizon)),
                        16.0 * m.context.x_max() * m.context.x_max() *
                            std::log(static_cast<double>(run.horizon)) /
                            m.context.lambda0_sq(),
                        2.0});
  report.burn_in_t0 = static_cast<long>(std::ceil(t0)) + 1;
  return report;
}

}  // namespace reservelab
