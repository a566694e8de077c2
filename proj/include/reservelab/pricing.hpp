#pragma once

#include <Eigen/Dense>
#include <vector>

#include "reservelab/ecdf.hpp"
#include "reservelab/estimation.hpp"
#include "reservelab/noise.hpp"

namespace reservelab {

// Exact evaluator of the reserve objective
//   rho(y) = \int_0^y F2(z - cv) dz  -  y * F1((y - cv)^-)
// for step CDFs. The integral of the step function is computed exactly from
// prefix sums; the failure term F1 uses the left limit (allocation is b >= r,
// so the no-sale probability at reserve r is P(b+ < r)). With strict F1 the
// objective is piecewise linear in y and attains its supremum at a jump.
class RhoEvaluator {
 public:
  RhoEvaluator(const StepCdf& failure, const StepCdf& integral, double common_value);

  double rho(double y) const { return rho_margin(y - cv_); }
  // Margin-space evaluation (m = y - cv). The optimizer works here so that a
  // jump point is hit exactly instead of through the rounded y - cv round
  // trip, which would spill the jump's own mass into the strict failure term.
  double rho_margin(double m) const;
  double integral_upto_margin(double m) const;  // \int_0^{m+cv} F2(z - cv) dz

 private:
  const StepCdf& failure_;
  const StepCdf& integral_;
  double cv_;
  std::vector<double> prefix_;  // \int_{-inf}^{xs[i]} F2(u) du
  double antiderivative(double m) const;
};

// Single-point objective for step CDFs (F1 = failure CDF, strict; F2 = the
// CDF under the integral).
double objective_rho(double y, double common_value, const StepCdf& f1, const StepCdf& f2);

// Analytic counterpart for true order-statistic CDFs of a noise model
// (adaptive quadrature, error < 1e-8).
double objective_rho(double y, double common_value, const NoiseModel& noise, int n_buyers);

// Exact maximizer of the empirical objective over y in [0, upper]: the
// objective is piecewise linear between consecutive shifted jump points, so
// the search evaluates {0, upper} plus every shifted jump, breaking ties
// toward the smallest maximizer.
struct ReserveSearch {
  double reserve = 0.0;
  double value = 0.0;  // objective at the maximizing margin
};
ReserveSearch search_reserve_on_steps(const StepCdf& f_minus, const StepCdf& f_plus,
                                      double common_value, double upper);
double optimize_reserve_on_steps(const StepCdf& f_minus, const StepCdf& f_plus,
                                 double common_value, double upper);

double optimize_empirical_reserve(const EstimateSnapshot& snapshot, const Eigen::VectorXd& x,
                                  double v_max);

// Cached analytic revenue machinery for one (noise, n_buyers) pair: a
// 2e5-node trapezoid prefix table of F^- makes rho, expected revenue, and the
// grid reserve search O(1)/O(grid) per call with quadrature error far below
// the 1e-8 contract.
class TruthfulRevenueModel {
 public:
  TruthfulRevenueModel(const NoiseModel& noise, int n_buyers);

  const NoiseModel& noise() const { return noise_; }
  int n_buyers() const { return n_; }
  double second_highest_mean() const { return e_minus_mean_; }

  double integral_f_minus(double m) const;  // \int_{-inf}^m F^-(u) du
  double rho(double y, double common_value) const;
  double expected_revenue(double reserve, double common_value) const;

  // Uniform grid of `grid` points on [0, v_max], then one golden-section
  // pass on the best bracket. Deterministic given the grid.
  double optimize_reserve(double common_value, double v_max, int grid = 20000) const;

 private:
  NoiseModel noise_;
  int n_;
  double eps_;
  double h_;
  double e_minus_mean_;
  std::vector<double> prefix_;  // trapezoid prefix of F^- on [-eps, eps]
  double f_minus(double z) const { return lift_cdf_second_highest(noise_.cdf(z), n_); }
  double f_plus(double z) const { return lift_cdf_highest(noise_.cdf(z), n_); }
};

// Proposition-style closed form E[eps^-] + cv + \int_0^r F^-(z-cv) dz
// - r F^+(r-cv), quadrature error < 1e-6.
double expected_revenue_truthful(double reserve, double common_value, const NoiseModel& noise,
                                 int n_buyers);

// Clairvoyant reserve for a context with common value cv.
double optimize_true_reserve(const NoiseModel& noise, int n_buyers, double common_value,
                             double v_max, int grid = 20000);

// Partition of [1, T] into phases of length round(T^(1 - 2^-l)), the final
// phase truncated so the lengths sum to exactly T.
class PhaseSchedule {
 public:
  explicit PhaseSchedule(long horizon);  // horizon >= 4

  long horizon() const { return horizon_; }
  int phase_count() const { return static_cast<int>(lengths_.size()); }
  long phase_length(int ell) const { return lengths_[ell - 1]; }   // 1-based
  long phase_begin(int ell) const { return begins_[ell - 1]; }     // first round, 1-based
  int phase_of(long t) const;
  bool is_phase_end(long t) const;
  const std::vector<long>& lengths() const { return lengths_; }

 private:
  long horizon_;
  std::vector<long> lengths_;
  std::vector<long> begins_;
};

}  // namespace reservelab
