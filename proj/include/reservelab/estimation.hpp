#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "reservelab/ecdf.hpp"
#include "reservelab/ols.hpp"

namespace reservelab {

// A (beta_hat, F-, F+) triple frozen at an update boundary; this is what a
// policy prices with. The CDFs evaluate in [0,1] and are nondecreasing.
struct EstimateSnapshot {
  Eigen::VectorXd beta_hat;
  StepCdf f_minus;
  StepCdf f_plus;
  long built_from_begin = 0;  // first and last round (1-based, inclusive)
  long built_from_end = 0;
};

struct TopTwoRound {
  Eigen::VectorXd context;
  double top_bid = 0.0;
  double second_bid = 0.0;
};

struct BidRound {
  Eigen::VectorXd context;
  std::vector<double> bids;
};

// ECDFs of the top-two bid residuals against <beta_hat, x>.
std::pair<EmpiricalCdf, EmpiricalCdf> estimate_Fpm_truthful(
    const std::vector<TopTwoRound>& history, const Eigen::VectorXd& beta_hat);

// Pooled residual ECDF over all n_buyers * |phase| per-buyer bids.
EmpiricalCdf estimate_F_pooled(const std::vector<BidRound>& phase_history,
                               const Eigen::VectorXd& beta_hat);

struct PerBuyerEstimate {
  Eigen::VectorXd beta_hat;
  EmpiricalCdf residual_cdf;
};

std::vector<PerBuyerEstimate> per_buyer_estimates(const std::vector<BidRound>& history);

struct MaxCompResult {
  int chosen;                  // smallest index in the selected component
  std::vector<int> component;  // ascending member indices
};

// Builds the similarity graph with an edge (i,j) iff both the L1 distance of
// the beta estimates and the sup distance of the residual CDFs are within the
// thresholds, then returns the largest connected component (ties broken by
// smallest contained index).
MaxCompResult maxcomp(const std::vector<PerBuyerEstimate>& estimates, double beta_threshold,
                      double cdf_threshold);

// Theoretical rate constants surfaced for diagnostics and the MAX-COMP edge
// thresholds. Only the anomalous-section pair feeds a policy; the others are
// evaluated with true-model values injected.
namespace rates {

// 4 sqrt(d log(t-1)) eps_max x_max^2 / (lambda0^2 sqrt(N (t-1))), t >= 3.
double delta_t(long t, int d, double eps_max, double x_max, double lambda0_sq, int n_buyers);

// sqrt(2 log t) / sqrt(t), t >= 2.
double gamma_t(long t);

// log(v_max^2 N |E|^4 - 1) / log(1/eta); requires v_max^2 N |E|^4 > 2.
double corruption_budget_L(long phase_len, double v_max, int n_buyers, double eta);

// Phase-level beta error scale (strategic setting).
double delta_phase(long phase_len, int d, double eps_max, double x_max, double lambda0_sq,
                   int n_buyers, double a_max, double v_max, double eta);

// sqrt(log |E|) / sqrt(2 N |E|).
double gamma_phase(long phase_len, int n_buyers);

// 2 sqrt(d) log(t-1) / sqrt(t-1), t >= 3 (per-buyer estimation, no model
// constants -- computable by the seller).
double delta_anomalous(long t, int d);

// sqrt(2 log t) / sqrt(t).
double gamma_anomalous(long t);

}  // namespace rates

}  // namespace reservelab
