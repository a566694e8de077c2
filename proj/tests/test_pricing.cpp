#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "reservelab/pricing.hpp"

using namespace reservelab;

namespace {

StepCdf step_of(std::vector<double> samples) {
  return StepCdf::from_ecdf(EmpiricalCdf::from_samples(std::move(samples)));
}

}  // namespace

TEST_CASE("objective_rho on step CDFs") {
  StepCdf f1 = step_of({0.6});
  StepCdf f2 = step_of({0.2});

  CHECK(objective_rho(0.0, 0.0, f1, f2) == 0.0);

  // F2 == 1 and F1 == 0 over the [0, y] window makes rho(y) = y.
  StepCdf ones = step_of({-5.0});
  StepCdf zeros = step_of({100.0});
  CHECK(objective_rho(0.7, 0.0, zeros, ones) == doctest::Approx(0.7));

  // Failure term evaluates with the left limit at its own jump.
  CHECK(objective_rho(0.6, 0.0, f1, f2) == doctest::Approx(0.4));
  // Just past the jump the full mass binds.
  CHECK(objective_rho(0.6 + 1e-9, 0.0, f1, f2) ==
        doctest::Approx(0.4 - 0.6).epsilon(1e-6));
}

TEST_CASE("objective_rho matches a brute-force prober on random ECDF pairs") {
  RngStream rng(41);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> fail_pts(1 + rng.uniform_index(30));
    std::vector<double> int_pts(1 + rng.uniform_index(30));
    for (auto& p : fail_pts) p = rng.uniform(-0.5, 1.0);
    for (auto& p : int_pts) p = rng.uniform(-0.5, 1.0);
    StepCdf f1 = step_of(fail_pts);
    StepCdf f2 = step_of(int_pts);
    double cv = rng.uniform(0.0, 0.5);
    double y = rng.uniform(0.0, 1.5);
    double got = objective_rho(y, cv, f1, f2);
    double want = oracles::brute_rho(y, cv, fail_pts, int_pts, 40000);
    CHECK(got == doctest::Approx(want).epsilon(5e-4));
  }
}

TEST_CASE("objective_rho analytic overload agrees with the revenue model") {
  auto noise = NoiseModel::bimodal(0.5);
  TruthfulRevenueModel model(noise, 3);
  for (double y : {0.1, 0.4, 0.9, 1.3}) {
    for (double cv : {0.5, 0.8, 1.0}) {
      CHECK(objective_rho(y, cv, noise, 3) == doctest::Approx(model.rho(y, cv)).epsilon(1e-7));
    }
  }
}

TEST_CASE("optimize_empirical_reserve") {
  SUBCASE("empty snapshot defaults to zero") {
    EstimateSnapshot snap;
    snap.beta_hat = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(2, 0.7);
    CHECK(optimize_empirical_reserve(snap, x, 1.0) == 0.0);
  }

  SUBCASE("single-jump fixtures") {
    EstimateSnapshot snap;
    snap.beta_hat = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
    snap.f_minus = step_of({0.2});
    snap.f_plus = step_of({0.6});
    CHECK(optimize_empirical_reserve(snap, x, 1.0) == doctest::Approx(0.6));
    CHECK(objective_rho(0.6, 0.0, snap.f_plus, snap.f_minus) == doctest::Approx(0.4));

    snap.f_minus = step_of({0.1});
    snap.f_plus = step_of({0.4});
    CHECK(optimize_empirical_reserve(snap, x, 1.0) == doctest::Approx(0.4));
    CHECK(objective_rho(0.4, 0.0, snap.f_plus, snap.f_minus) == doctest::Approx(0.3));
  }

  SUBCASE("argmax dominance over uniform probes") {
    RngStream rng(42);
    for (int rep = 0; rep < 200; ++rep) {
      int nm = 1 + rng.uniform_index(40);
      int np = 1 + rng.uniform_index(40);
      std::vector<double> minus_pts(nm), plus_pts(np);
      for (auto& p : minus_pts) p = rng.uniform(-0.5, 1.0);
      for (auto& p : plus_pts) p = rng.uniform(-0.5, 1.0);
      StepCdf fm = step_of(minus_pts);
      StepCdf fp = step_of(plus_pts);
      double cv = rng.uniform(0.0, 0.5);
      ReserveSearch best = search_reserve_on_steps(fm, fp, cv, 1.5);
      RhoEvaluator eval(fp, fm, cv);
      for (int g = 0; g <= 101; ++g) {
        double y = 1.5 * g / 101.0;
        CHECK(eval.rho(y) <= best.value + 1e-12);
      }
    }
  }
}

TEST_CASE("optimize_true_reserve") {
  SUBCASE("degenerate noise: the seller extracts the common value") {
    // With N >= 2 near-degenerate bidders the objective is flat at its
    // maximum on [0, cv - eps] (competition already clears at ~cv), so the
    // smallest-maximizer tie-break lands at 0 while revenue stays ~cv.
    auto tiny = NoiseModel::uniform(1e-3);
    TruthfulRevenueModel model(tiny, 2);
    double r = model.optimize_reserve(0.8, 1.5);
    CHECK(model.expected_revenue(r, 0.8) == doctest::Approx(0.8).epsilon(2e-3));
    // No reserve on the plateau can beat the returned one.
    for (double probe : {0.0, 0.2, 0.5, 0.7988})
      CHECK(model.rho(probe, 0.8) <= model.rho(r, 0.8) + 1e-9);
  }

  SUBCASE("uniform(1), N=2, cv=1 regression value") {
    // rho(y) = y^2/2 - y^3/3 on [0, 2]: maximum at y = 1 with value 1/6.
    auto uni = NoiseModel::uniform(1.0);
    TruthfulRevenueModel model(uni, 2);
    double r = model.optimize_reserve(1.0, 2.0);
    CHECK(r == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(model.rho(r, 1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
    CHECK(model.expected_revenue(r, 1.0) == doctest::Approx(-1.0 / 3.0 + 1.0 + 1.0 / 6.0));
  }

  SUBCASE("grid refinement stability") {
    auto noise = NoiseModel::bimodal(0.5);
    for (double cv : {0.5, 0.7, 0.95}) {
      double coarse = optimize_true_reserve(noise, 3, cv, 1.5, 20000);
      double fine = optimize_true_reserve(noise, 3, cv, 1.5, 100000);
      CHECK(std::abs(coarse - fine) <= 2.0 * 1.5 / 20000.0);
    }
  }
}

TEST_CASE("expected_revenue_truthful") {
  auto uni = NoiseModel::uniform(1.0);
  SUBCASE("zero reserve gives the expected second-highest valuation") {
    CHECK(expected_revenue_truthful(0.0, 1.0, uni, 2) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  }

  SUBCASE("reserve at the top of the support") {
    double cv = 1.0, r = 2.0;
    double closed = expected_revenue_truthful(r, cv, uni, 2);
    auto draw = [&](RngStream& rng) {
      double v1 = cv + uni.sample(rng), v2 = cv + uni.sample(rng);
      double top = std::max(v1, v2), second = std::min(v1, v2);
      return top >= r ? std::max(r, second) : 0.0;
    };
    auto mc = oracles::monte_carlo(draw, 1000000, 777);
    CHECK(std::abs(closed - mc.mean) <= 3.0 * mc.std_error + 1e-6);
  }

  SUBCASE("Monte Carlo agreement at random reserve/common-value pairs") {
    RngStream pick(43);
    for (int rep = 0; rep < 4; ++rep) {
      double cv = pick.uniform(1.0, 1.5);
      double r = pick.uniform(0.0, 2.0);
      double closed = expected_revenue_truthful(r, cv, uni, 3);
      auto draw = [&](RngStream& rng) {
        double best = -1e9, second = -1e9;
        for (int i = 0; i < 3; ++i) {
          double v = cv + uni.sample(rng);
          if (v > best) {
            second = best;
            best = v;
          } else if (v > second) {
            second = v;
          }
        }
        return best >= r ? std::max(r, second) : 0.0;
      };
      auto mc = oracles::monte_carlo(draw, 1000000, 900 + rep);
      CHECK(std::abs(closed - mc.mean) <= 3.0 * mc.std_error + 1e-6);
    }
  }

  SUBCASE("model table agrees with the standalone operation") {
    auto noise = NoiseModel::truncated_gaussian(0.5, 0.25);
    TruthfulRevenueModel model(noise, 3);
    RngStream rng(44);
    for (int rep = 0; rep < 20; ++rep) {
      double cv = rng.uniform(0.5, 1.0);
      double r = rng.uniform(0.0, 1.5);
      CHECK(model.expected_revenue(r, cv) ==
            doctest::Approx(expected_revenue_truthful(r, cv, noise, 3)).epsilon(1e-6));
    }
  }
}

TEST_CASE("benchmark reserve follows the uniform-noise closed form") {
  // For uniform(e) noise and any N >= 2, stationarity of rho gives
  // r*(cv) = (cv + e)/2 on the interior regime (cv < 3e), so raising the
  // common value by c moves the oracle reserve by exactly c/2.
  for (double e : {0.5, 1.0}) {
    auto uni = NoiseModel::uniform(e);
    for (int n : {2, 3, 5}) {
      TruthfulRevenueModel model(uni, n);
      double prev = -1.0;
      for (double cv : {1.0, 1.2, 1.4}) {
        if (cv >= 3.0 * e) continue;
        double r = model.optimize_reserve(cv, 3.0);
        CHECK(r == doctest::Approx((cv + e) / 2.0).epsilon(1e-4));
        CHECK(r > prev);  // monotone in the common value
        prev = r;
      }
    }
  }
}

TEST_CASE("phase_schedule") {
  PhaseSchedule s16(16);
  CHECK(s16.lengths() == std::vector<long>{4, 8, 4});
  CHECK(s16.phase_of(1) == 1);
  CHECK(s16.phase_of(4) == 1);
  CHECK(s16.phase_of(5) == 2);
  CHECK(s16.phase_of(16) == 3);
  CHECK(s16.is_phase_end(12));
  CHECK_FALSE(s16.is_phase_end(11));

  PhaseSchedule s100(100);
  CHECK(s100.phase_length(1) == 10);

  CHECK_THROWS_AS(PhaseSchedule(3), std::invalid_argument);

  for (long t = 4; t <= 10000; t = t < 40 ? t + 1 : t + 37) {
    PhaseSchedule s(t);
    long total = 0;
    bool truncated = false;
    for (int ell = 1; ell <= s.phase_count(); ++ell) {
      long len = s.phase_length(ell);
      total += len;
      if (ell > 1 && !truncated) {
        if (len < s.phase_length(ell - 1)) {
          truncated = true;
          CHECK(ell == s.phase_count());  // only the final phase shrinks
        }
      }
    }
    CHECK(total == t);
    int cap = static_cast<int>(std::ceil(std::log2(std::log2(static_cast<double>(t))))) + 1;
    CHECK(s.phase_count() <= cap);
  }
}
