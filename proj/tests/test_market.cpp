#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "reservelab/market.hpp"

using namespace reservelab;

namespace {

MarketConfig standard_market(int n_buyers = 3) {
  Eigen::VectorXd beta(2);
  beta << 0.5, 0.5;
  return MarketConfig{beta, NoiseModel::uniform(0.5),
                      ContextModel(2, {0.5, 0.5}, {1.0, 1.0}, 1.0), n_buyers, 1.5, 0.3, 0.9};
}

}  // namespace

TEST_CASE("noise_cdf analytic values") {
  auto uni = NoiseModel::uniform(1.0);
  CHECK(uni.cdf(0.0) == doctest::Approx(0.5));
  CHECK(uni.cdf(-1.0) == 0.0);
  CHECK(uni.cdf(1.0) == 1.0);
  CHECK(uni.cdf(-5.0) == 0.0);
  CHECK(uni.cdf(5.0) == 1.0);

  auto hist = NoiseModel::piecewise_constant({-1.0, 0.0, 1.0}, {0.25, 0.75});
  CHECK(hist.cdf(0.5) == doctest::Approx(0.625));
  CHECK(hist.cdf(-0.5) == doctest::Approx(0.125));

  auto tg = NoiseModel::truncated_gaussian(0.5, 0.3);
  CHECK(tg.cdf(0.0) == doctest::Approx(0.5));
  CHECK(tg.cdf(-0.5) == 0.0);
  CHECK(tg.cdf(0.5) == 1.0);
}

TEST_CASE("noise models are mean zero with positive density floor") {
  for (const auto& m : {NoiseModel::uniform(0.5), NoiseModel::truncated_gaussian(0.5, 0.25),
                        NoiseModel::bimodal(0.75)}) {
    CHECK(std::abs(m.mean()) < 1e-9);
    CHECK(m.density_inf() > 0.0);
    CHECK(m.density_sup() >= m.density_inf());
  }
  // The density integrates to one (midpoint rule; only the cells straddling
  // the histogram edges contribute error).
  auto bi = NoiseModel::bimodal(0.75);
  double mass = oracles::quad([&](double z) { return bi.density(z); }, -0.75, 0.75, 200000);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("noise_sample: support, CLT band, symmetric median") {
  for (const auto& m : {NoiseModel::uniform(1.0), NoiseModel::truncated_gaussian(1.0, 0.6),
                        NoiseModel::bimodal(1.0)}) {
    RngStream rng(42);
    double sum = 0.0;
    const long n = 1000000;
    for (long i = 0; i < n; ++i) {
      double z = m.sample(rng);
      REQUIRE(z > -1.0 - 1e-12);
      REQUIRE(z < 1.0 + 1e-12);
      sum += z;
    }
    double band = 4.0 * std::sqrt(m.variance()) / 1000.0;
    CHECK(std::abs(sum / n) < band);
    CHECK(m.quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("quantile inverts the cdf") {
  for (const auto& m : {NoiseModel::uniform(0.5), NoiseModel::truncated_gaussian(0.5, 0.2),
                        NoiseModel::bimodal(0.6)}) {
    for (double u : {0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
      CHECK(m.cdf(m.quantile(u)) == doctest::Approx(u).epsilon(1e-9));
    }
  }
}

TEST_CASE("order_stat_cdfs") {
  auto uni = NoiseModel::uniform(1.0);
  auto [fm, fp] = order_stat_cdfs(uni, 2, 0.0);
  CHECK(fm == doctest::Approx(0.75));
  CHECK(fp == doctest::Approx(0.25));
  auto [fm2, fp2] = order_stat_cdfs(uni, 2, -1.0);
  CHECK(fm2 == 0.0);
  CHECK(fp2 == 0.0);
  auto [fm3, fp3] = order_stat_cdfs(NoiseModel::bimodal(1.0), 3, 1.0);
  CHECK(fm3 == doctest::Approx(1.0));
  CHECK(fp3 == doctest::Approx(1.0));
  CHECK(fm >= fp);
  CHECK_THROWS_AS(order_stat_cdfs(uni, 1, 0.0), std::invalid_argument);
}

TEST_CASE("second_highest_noise_mean") {
  auto uni = NoiseModel::uniform(1.0);
  CHECK(second_highest_noise_mean(uni, 2) == doctest::Approx(-1.0 / 3.0).epsilon(1e-6));

  double prev = second_highest_noise_mean(uni, 2);
  for (int n = 3; n <= 8; ++n) {
    double cur = second_highest_noise_mean(uni, n);
    CHECK(cur > prev);
    prev = cur;
  }

  // Symmetric models: E[eps^-] = -E[eps^+] for N = 2.
  for (const auto& m : {uni, NoiseModel::bimodal(1.0), NoiseModel::truncated_gaussian(1.0, 0.5)}) {
    double e_minus = second_highest_noise_mean(m, 2);
    double int_fplus = oracles::quad(
        [&](double z) { return lift_cdf_highest(m.cdf(z), 2); }, -1.0, 1.0, 200000);
    double e_plus = 1.0 - int_fplus;
    CHECK(e_minus == doctest::Approx(-e_plus).epsilon(1e-5));
  }
}

TEST_CASE("sample_round formula and determinism") {
  MarketConfig config = standard_market();

  SUBCASE("zero beta means valuations equal noise draws") {
    MarketConfig zb = config;
    zb.beta = Eigen::VectorXd::Zero(2);
    RngStream a(7), b(7);
    Round round = sample_round(zb, a);
    // Replay the same stream: context coordinates first, then noise.
    b.uniform(0.5, 1.0);
    b.uniform(0.5, 1.0);
    for (int i = 0; i < zb.n_buyers; ++i)
      CHECK(round.valuations[i] == zb.noise.sample(b));
  }

  SUBCASE("narrow noise pins valuations to the common value") {
    MarketConfig nn = config;
    nn.noise = NoiseModel::uniform(1e-9);
    RngStream rng(3);
    Round round = sample_round(nn, rng);
    double cv = nn.common_value(round.context);
    for (double v : round.valuations) CHECK(v == doctest::Approx(cv).epsilon(1e-7));
  }

  SUBCASE("valuation identity v = <beta,x> + eps") {
    RngStream a(11), b(11);
    Round round = sample_round(config, a);
    Eigen::VectorXd x = config.context.sample(b);
    CHECK((round.context - x).norm() == 0.0);
    for (int i = 0; i < config.n_buyers; ++i) {
      double eps = config.noise.sample(b);
      CHECK(round.valuations[i] == config.common_value(x) + eps);
    }
  }

  SUBCASE("identical seed gives byte-exact trajectories") {
    RngStream a(99), b(99);
    for (int t = 0; t < 200; ++t) {
      Round ra = sample_round(config, a);
      Round rb = sample_round(config, b);
      CHECK(ra.context == rb.context);
      CHECK(ra.valuations == rb.valuations);
    }
  }
}

TEST_CASE("validate_market") {
  MarketConfig good = standard_market();
  CHECK(validate_market(good).ok());

  MarketConfig bad_bound = good;
  bad_bound.beta = Eigen::VectorXd::Constant(2, 2.0);
  auto report = validate_market(bad_bound);
  CHECK_FALSE(report.ok());
  CHECK(report.joined().find("valuation bound") != std::string::npos);

  MarketConfig bad_mean = good;
  bad_mean.noise = NoiseModel::piecewise_constant({-0.5, 0.0, 0.5}, {0.25, 0.75});
  report = validate_market(bad_mean);
  CHECK_FALSE(report.ok());
  CHECK(report.joined().find("mean zero") != std::string::npos);

  MarketConfig bad_eta = good;
  bad_eta.eta = 1.0;
  CHECK_FALSE(validate_market(bad_eta).ok());
}

TEST_CASE("Lipschitz bounds for F, F-, F+ on point-pair grids") {
  for (const auto& m : {NoiseModel::uniform(0.5), NoiseModel::bimodal(0.5),
                        NoiseModel::truncated_gaussian(0.5, 0.2)}) {
    double c_f = m.density_sup();
    for (int n : {2, 3, 4}) {
      RngStream rng(1234);
      for (int k = 0; k < 1000; ++k) {
        double z1 = rng.uniform(-0.7, 0.7);
        double z2 = rng.uniform(-0.7, 0.7);
        double gap = std::abs(z2 - z1);
        CHECK(std::abs(m.cdf(z2) - m.cdf(z1)) <= c_f * gap + 1e-12);
        auto [fm1, fp1] = order_stat_cdfs(m, n, z1);
        auto [fm2, fp2] = order_stat_cdfs(m, n, z2);
        CHECK(std::abs(fm2 - fm1) <= 2.0 * c_f * n * n * gap + 1e-12);
        CHECK(std::abs(fp2 - fp1) <= c_f * n * gap + 1e-12);
      }
    }
  }
}

TEST_CASE("order-statistic CDFs match brute-force simulation within DKW band") {
  auto model = NoiseModel::uniform(0.5);
  const long rounds = 100000;
  for (int n : {2, 3, 4}) {
    RngStream rng(5000 + n);
    std::vector<double> top(rounds), second(rounds);
    for (long r = 0; r < rounds; ++r) {
      double best = -1e9, next = -1e9;
      for (int i = 0; i < n; ++i) {
        double z = model.sample(rng);
        if (z > best) {
          next = best;
          best = z;
        } else if (z > next) {
          next = z;
        }
      }
      top[r] = best;
      second[r] = next;
    }
    auto top_cdf = EmpiricalCdf::from_samples(top);
    auto second_cdf = EmpiricalCdf::from_samples(second);
    double band = oracles::dkw_band(rounds, 0.999);
    CHECK(oracles::sup_vs_continuous(
              top_cdf, [&](double z) { return lift_cdf_highest(model.cdf(z), n); }) < band);
    CHECK(oracles::sup_vs_continuous(second_cdf, [&](double z) {
            return lift_cdf_second_highest(model.cdf(z), n);
          }) < band);
  }
}
