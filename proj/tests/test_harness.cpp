#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "reservelab/cli.hpp"
#include "reservelab/harness.hpp"

using namespace reservelab;

namespace {

MarketConfig standard_market(int n_buyers = 3) {
  Eigen::VectorXd beta(2);
  beta << 0.5, 0.5;
  return MarketConfig{beta, NoiseModel::uniform(0.5),
                      ContextModel(2, {0.5, 0.5}, {1.0, 1.0}, 1.0), n_buyers, 1.5, 0.3, 0.9};
}

Scenario scenario_with(PolicySpec policy, RegretMode mode, int n_buyers = 3,
                       std::vector<BuyerStrategy> strategies = {}) {
  Scenario s;
  s.market = standard_market(n_buyers);
  s.policy = std::move(policy);
  if (strategies.empty())
    s.strategies.assign(n_buyers, Truthful{});
  else
    s.strategies = std::move(strategies);
  s.mode = mode;
  return s;
}

}  // namespace

TEST_CASE("fixed-zero reserve always allocates at the second-highest valuation") {
  Scenario s = scenario_with({.name = "fixed", .fixed_reserve = 0.0}, RegretMode::kRealized);
  BenchmarkOracle oracle(s.market);
  RunResult run = simulate_run(s, 300, 123, 0, oracle);
  for (const auto& rec : run.records) {
    CHECK(rec.allocated);
    std::vector<double> sorted = rec.valuations;
    std::sort(sorted.begin(), sorted.end());
    CHECK(rec.realized_revenue == doctest::Approx(sorted[sorted.size() - 2]));
  }
}

TEST_CASE("benchmark policy has (numerically) zero expected regret") {
  Scenario s = scenario_with({.name = "benchmark"}, RegretMode::kExpected);
  BenchmarkOracle oracle(s.market);
  RunResult run = simulate_run(s, 150, 321, 0, oracle);
  for (const auto& rec : run.records)
    CHECK(std::abs(rec.instant_regret) < 2e-5);
}

TEST_CASE("benchmark oracle table matches the direct optimizer") {
  MarketConfig m = standard_market();
  BenchmarkOracle oracle(m);
  TruthfulRevenueModel model(m.noise, m.n_buyers);
  RngStream rng(60);
  for (int k = 0; k < 25; ++k) {
    double cv = rng.uniform(0.5, 1.0);
    double direct_r = model.optimize_reserve(cv, m.v_max);
    double direct_rev = model.expected_revenue(direct_r, cv);
    CHECK(std::abs(oracle.rev_star(cv) - direct_rev) < 5e-6);
    CHECK(std::abs(oracle.r_star(cv) - direct_r) < 5e-4);
  }
}

TEST_CASE("same seed reproduces a run byte for byte") {
  Scenario s = scenario_with({.name = "npac-t"}, RegretMode::kExpected);
  BenchmarkOracle oracle(s.market);
  RunResult a = simulate_run(s, 200, 777, 3, oracle);
  RunResult b = simulate_run(s, 200, 777, 3, oracle);
  CHECK(rounds_csv(a) == rounds_csv(b));
}

TEST_CASE("parallel and serial replication runs agree") {
  Scenario s = scenario_with({.name = "npac-s"}, RegretMode::kExpected);
  BenchmarkOracle oracle(s.market);
  auto serial = run_replications(s, 120, 99, 6, 1, oracle);
  auto parallel = run_replications(s, 120, 99, 6, 3, oracle);
  for (int k = 0; k < 6; ++k)
    CHECK(rounds_csv(serial[k]) == rounds_csv(parallel[k]));
}

TEST_CASE("regret additivity: cumulative series is the prefix sum") {
  Scenario s = scenario_with({.name = "npac-t"}, RegretMode::kExpected);
  BenchmarkOracle oracle(s.market);
  RunResult run = simulate_run(s, 250, 11, 0, oracle);
  double acc = 0.0;
  for (const auto& rec : run.records) {
    acc += rec.instant_regret;
    CHECK(run.cum_regret[rec.t - 1] == doctest::Approx(acc).epsilon(1e-12));
  }
  CHECK(run.final_cum_regret == doctest::Approx(acc));
}

TEST_CASE("per_round_regret") {
  MarketConfig m = standard_market();
  BenchmarkOracle oracle(m);

  SUBCASE("pricing at the benchmark reserve gives zero expected regret") {
    RoundRecord rec;
    rec.context = Eigen::VectorXd::Constant(2, 0.8);
    double cv = m.common_value(rec.context);
    rec.reserve = oracle.r_star(cv);
    rec.isolation = false;
    CHECK(std::abs(per_round_regret(rec, m, oracle, RegretMode::kExpected)) < 2e-5);
  }

  SUBCASE("realized-mode average converges to the expected value") {
    RoundRecord rec;
    rec.context = Eigen::VectorXd::Constant(2, 0.9);
    rec.reserve = 0.7;
    double cv = m.common_value(rec.context);
    double expected = per_round_regret(rec, m, oracle, RegretMode::kExpected);
    auto draw = [&](RngStream& rng) {
      double best = -1e9, second = -1e9;
      for (int i = 0; i < m.n_buyers; ++i) {
        double v = cv + m.noise.sample(rng);
        if (v > best) {
          second = best;
          best = v;
        } else if (v > second) {
          second = v;
        }
      }
      double revenue = best >= rec.reserve ? std::max(rec.reserve, second) : 0.0;
      return oracle.rev_star(cv) - revenue;
    };
    auto mc = oracles::monte_carlo(draw, 200000, 2024);
    CHECK(std::abs(mc.mean - expected) <= 3.0 * mc.std_error + 1e-5);
  }

  SUBCASE("reserve above the support leaves positive regret") {
    RoundRecord rec;
    rec.context = Eigen::VectorXd::Constant(2, 0.6);
    rec.reserve = m.v_max;
    CHECK(per_round_regret(rec, m, oracle, RegretMode::kExpected) > 0.0);
  }
}

TEST_CASE("expected and realized cumulative regret agree across replications") {
  Scenario expected_s = scenario_with({.name = "npac-t"}, RegretMode::kExpected);
  Scenario realized_s = expected_s;
  realized_s.mode = RegretMode::kRealized;
  BenchmarkOracle oracle(expected_s.market);
  const int reps = 40;
  const long horizon = 250;
  auto e_runs = run_replications(expected_s, horizon, 5150, reps, 2, oracle, RecordMode::kNone);
  auto r_runs = run_replications(realized_s, horizon, 5150, reps, 2, oracle, RecordMode::kNone);
  double me = 0.0, mr = 0.0;
  for (int k = 0; k < reps; ++k) {
    me += e_runs[k].final_cum_regret;
    mr += r_runs[k].final_cum_regret;
  }
  me /= reps;
  mr /= reps;
  double var = 0.0;
  for (int k = 0; k < reps; ++k)
    var += (r_runs[k].final_cum_regret - mr) * (r_runs[k].final_cum_regret - mr);
  double sd = std::sqrt(var / (reps - 1));
  CHECK(std::abs(me - mr) <= 3.0 * sd / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("fit_scaling") {
  std::vector<double> horizons = {1000, 2000, 4000, 8000};
  std::vector<double> sqrt_regret, linear_regret, mixed_regret;
  for (double t : horizons) {
    sqrt_regret.push_back(3.0 * std::sqrt(t));
    linear_regret.push_back(0.25 * t);
    mixed_regret.push_back(2.0 * std::sqrt(t * std::log(t)));
  }
  CHECK(fit_scaling(horizons, sqrt_regret).slope == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fit_scaling(horizons, linear_regret).slope == doctest::Approx(1.0).epsilon(1e-10));
  double mixed = fit_scaling(horizons, mixed_regret).slope;
  CHECK(mixed > 0.55);
  CHECK(mixed < 0.60);

  auto with_bad = fit_scaling({1000, 2000, 4000}, {-1.0, 10.0, 14.0});
  CHECK_FALSE(with_bad.warning.empty());
  CHECK(with_bad.points_used == 2);
  CHECK_THROWS_AS(fit_scaling({1000, 2000}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("diagnostics") {
  SUBCASE("truthful run has zero corruption and mismatch counts") {
    Scenario s = scenario_with({.name = "npac-t"}, RegretMode::kExpected);
    BenchmarkOracle oracle(s.market);
    RunResult run = simulate_run(s, 200, 31337, 0, oracle);
    DiagnosticsReport report = diagnostics(run, s);
    REQUIRE(report.phases.size() == 1);
    for (int i = 0; i < 3; ++i) {
      CHECK(report.phases[0].significant[i] == 0);
      CHECK(report.phases[0].mismatch_shade[i] == 0);
      CHECK(report.phases[0].mismatch_overbid[i] == 0);
    }
  }

  SUBCASE("constant shader trips the significance threshold every round") {
    // Use npac-s so phases exist; phase 1 of T=100 has length 10 and
    // 0.3 > 1/10 in every round. Common values stay >= 1.0 > a, so clamping
    // never shrinks the realized corruption.
    Eigen::VectorXd beta(2);
    beta << 1.0, 1.0;
    Scenario s;
    s.market = MarketConfig{beta, NoiseModel::uniform(0.5),
                            ContextModel(2, {0.5, 0.5}, {1.0, 1.0}, 1.0), 3, 2.5, 0.3, 0.9};
    s.policy = {.name = "npac-s"};
    s.strategies.assign(3, ConstantShader{0.3});
    s.mode = RegretMode::kRealized;
    BenchmarkOracle oracle(s.market);
    RunResult run = simulate_run(s, 100, 4242, 0, oracle);
    DiagnosticsReport report = diagnostics(run, s);
    REQUIRE(report.phases.size() >= 2);
    CHECK(report.phases[0].phase_len == 10);
    for (int i = 0; i < 3; ++i) CHECK(report.phases[0].significant[i] == 10);
  }

  SUBCASE("counts equal an independent recount from the raw records") {
    Scenario s = scenario_with(
        {.name = "npac-s"}, RegretMode::kRealized, 3,
        {ConstantShader{0.25}, Truthful{}, IsolationAwareHeuristic{0.2, 60}});
    BenchmarkOracle oracle(s.market);
    RunResult run = simulate_run(s, 150, 777, 0, oracle);
    DiagnosticsReport report = diagnostics(run, s);

    PhaseSchedule sched(150);
    for (std::size_t p = 0; p < report.phases.size(); ++p) {
      long begin = sched.phase_begin(static_cast<int>(p + 1));
      long end = begin + sched.phase_length(static_cast<int>(p + 1)) - 1;
      for (int i = 0; i < 3; ++i) {
        long sig = 0, shade = 0, over = 0;
        for (const auto& rec : run.records) {
          if (rec.t < begin || rec.t > end) continue;
          if (std::abs(rec.corruptions[i]) >= 1.0 / sched.phase_length(static_cast<int>(p + 1)))
            ++sig;
          double top_other = -1.0;
          for (int j = 0; j < 3; ++j)
            if (j != i) top_other = std::max(top_other, rec.bids[j]);
          double bar = std::max(top_other, rec.planned_reserve);
          if (rec.valuations[i] >= bar && rec.bids[i] <= bar) ++shade;
          if (rec.valuations[i] <= bar && rec.bids[i] >= bar) ++over;
        }
        CHECK(report.phases[p].significant[i] == sig);
        CHECK(report.phases[p].mismatch_shade[i] == shade);
        CHECK(report.phases[p].mismatch_overbid[i] == over);
      }
    }
  }

  SUBCASE("records not retained is an error") {
    Scenario s = scenario_with({.name = "npac-t"}, RegretMode::kExpected);
    BenchmarkOracle oracle(s.market);
    RunResult run = simulate_run(s, 100, 1, 0, oracle, RecordMode::kNone);
    CHECK_THROWS_AS(diagnostics(run, s), std::runtime_error);
  }
}

TEST_CASE("phased forgetting beats run-all-history under a front-loaded attack") {
  // Buyers shade hard through the first two phases, then turn truthful. The
  // poisoned early bids stay in NPAC-T's history forever but are dropped by
  // NPAC-S at the next phase boundary.
  Eigen::VectorXd beta(2);
  beta << 5.0, 5.0;
  Scenario s;
  s.market = MarketConfig{beta, NoiseModel::uniform(5.0),
                          ContextModel(2, {0.5, 0.5}, {1.0, 1.0}, 1.0), 3, 15.0, 3.0, 0.9};
  s.strategies.assign(3, PhaseShader{{3.0, 3.0, 0.0}});
  s.mode = RegretMode::kRealized;
  BenchmarkOracle oracle(s.market);
  Scenario t = s;
  s.policy = {.name = "npac-s"};
  t.policy = {.name = "npac-t"};
  int s_wins = 0;
  for (int rep = 0; rep < 3; ++rep) {
    RunResult rs = simulate_run(s, 4000, 987000 + rep, rep, oracle, RecordMode::kNone);
    RunResult rt = simulate_run(t, 4000, 987000 + rep, rep, oracle, RecordMode::kNone);
    if (rs.final_cum_regret < rt.final_cum_regret) ++s_wins;
  }
  CHECK(s_wins == 3);
}

TEST_CASE("DKW calibration of the ECDF sup error across resamples") {
  auto noise = NoiseModel::uniform(0.5);
  const long n = 2000;
  const int resamples = 500;
  double gamma = oracles::dkw_band(n, 0.999);
  int exceed = 0;
  for (int r = 0; r < resamples; ++r) {
    RngStream rng(70000 + r);
    std::vector<double> pts(n);
    for (auto& p : pts) p = noise.sample(rng);
    auto cdf = EmpiricalCdf::from_samples(pts);
    if (oracles::sup_vs_continuous(cdf, [&](double z) { return noise.cdf(z); }) > gamma)
      ++exceed;
  }
  // 2 exp(-2 n gamma^2) = 0.001; the empirical exceedance frequency must stay
  // under the bound (with a one-count cushion on 500 draws).
  CHECK(exceed <= 3);
  CHECK(static_cast<double>(exceed) / resamples <= 0.005);
}
