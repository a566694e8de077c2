#pragma once

#include <string>
#include <utility>
#include <vector>

#include "reservelab/rng.hpp"

namespace reservelab {

enum class NoiseKind { kUniform, kTruncatedGaussian, kPiecewiseConstant };

// Mean-zero market noise on a bounded support (-eps_max, eps_max) with a
// density bounded away from 0 and infinity. All sampling is inverse-CDF:
// one uniform draw per noise variable.
class NoiseModel {
 public:
  NoiseModel() = default;  // empty shell; replace via a factory before use

  static NoiseModel uniform(double eps_max);
  static NoiseModel truncated_gaussian(double eps_max, double sigma);
  // Histogram density on [edges.front(), edges.back()] == [-eps_max, eps_max].
  // Heights are relative weights; they are renormalized to integrate to 1.
  static NoiseModel piecewise_constant(std::vector<double> edges,
                                       std::vector<double> heights);
  // The standard non-MHR stress instance: symmetric bimodal histogram with
  // relative heights {0.8, 0.2, 0.8} on three equal bins.
  static NoiseModel bimodal(double eps_max);

  NoiseKind kind() const { return kind_; }
  double eps_max() const { return eps_max_; }

  double cdf(double z) const;
  double density(double z) const;
  double quantile(double u) const;
  double sample(RngStream& rng) const { return quantile(rng.next_unit()); }

  double density_sup() const { return c_f_; }    // c_f
  double density_inf() const { return f_min_; }  // inf f > 0
  double mean() const { return mean_; }
  double variance() const;

  // Kind-specific parameters, exposed for config round-trips.
  double sigma() const { return sigma_; }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& heights() const { return heights_; }

  std::string describe() const;

 private:
  NoiseKind kind_ = NoiseKind::kUniform;
  double eps_max_ = 0.0;
  double c_f_ = 0.0;
  double f_min_ = 0.0;
  double mean_ = 0.0;

  double sigma_ = 0.0;        // truncated gaussian: pre-truncation stddev
  double trunc_mass_ = 1.0;   // Phi(e/s) - Phi(-e/s)
  double phi_lo_ = 0.0;       // Phi(-e/s)

  std::vector<double> edges_;    // histogram bin edges
  std::vector<double> heights_;  // normalized densities per bin
  std::vector<double> cum_;      // cumulative mass at each edge
};

// CDFs of the highest (F+) and second-highest (F-) of n i.i.d. noise draws:
// F+(z) = F(z)^n, F-(z) = n F(z)^(n-1) - (n-1) F(z)^n. Returns (F-, F+).
std::pair<double, double> order_stat_cdfs(const NoiseModel& model, int n_buyers, double z);

// Order-statistic lift of a bare CDF value.
double lift_cdf_second_highest(double f, int n_buyers);
double lift_cdf_highest(double f, int n_buyers);

// E[eps^-] for the second-highest of n draws, by composite trapezoid on the
// CDF with 2e5 nodes (E[X] = eps_max - \int F^-).
double second_highest_noise_mean(const NoiseModel& model, int n_buyers);

// Standard normal helpers used by the truncated-gaussian kind.
double std_normal_cdf(double z);
double std_normal_quantile(double p);

}  // namespace reservelab
