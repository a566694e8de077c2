#include "reservelab/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace reservelab {

std::pair<EmpiricalCdf, EmpiricalCdf> estimate_Fpm_truthful(
    const std::vector<TopTwoRound>& history, const Eigen::VectorXd& beta_hat) {
  std::vector<double> res_minus, res_plus;
  res_minus.reserve(history.size());
  res_plus.reserve(history.size());
  for (const auto& round : history) {
    double cv = beta_hat.dot(round.context);
    res_plus.push_back(round.top_bid - cv);
    res_minus.push_back(round.second_bid - cv);
  }
  return {EmpiricalCdf::from_samples(std::move(res_minus)),
          EmpiricalCdf::from_samples(std::move(res_plus))};
}

EmpiricalCdf estimate_F_pooled(const std::vector<BidRound>& phase_history,
                               const Eigen::VectorXd& beta_hat) {
  std::vector<double> residuals;
  for (const auto& round : phase_history) {
    double cv = beta_hat.dot(round.context);
    for (double b : round.bids) residuals.push_back(b - cv);
  }
  return EmpiricalCdf::from_samples(std::move(residuals));
}

std::vector<PerBuyerEstimate> per_buyer_estimates(const std::vector<BidRound>& history) {
  if (history.empty()) throw std::invalid_argument("per_buyer_estimates: empty history");
  int d = static_cast<int>(history.front().context.size());
  int n = static_cast<int>(history.front().bids.size());

  OlsAccumulator gram_only(d);
  std::vector<Eigen::VectorXd> moments(n, Eigen::VectorXd::Zero(d));
  for (const auto& round : history) {
    gram_only.add(round.context, 0.0);
    for (int i = 0; i < n; ++i) moments[i].noalias() += round.context * round.bids[i];
  }

  std::vector<PerBuyerEstimate> out(n);
  for (int i = 0; i < n; ++i) out[i].beta_hat = gram_only.solve_for(moments[i]);
  std::vector<std::vector<double>> residuals(n);
  for (auto& r : residuals) r.reserve(history.size());
  for (const auto& round : history) {
    for (int i = 0; i < n; ++i)
      residuals[i].push_back(round.bids[i] - out[i].beta_hat.dot(round.context));
  }
  for (int i = 0; i < n; ++i)
    out[i].residual_cdf = EmpiricalCdf::from_samples(std::move(residuals[i]));
  return out;
}

MaxCompResult maxcomp(const std::vector<PerBuyerEstimate>& estimates, double beta_threshold,
                      double cdf_threshold) {
  int n = static_cast<int>(estimates.size());
  if (n < 1) throw std::invalid_argument("maxcomp: needs at least one estimate");

  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double beta_dist = (estimates[i].beta_hat - estimates[j].beta_hat).lpNorm<1>();
      if (beta_dist > beta_threshold) continue;
      if (ecdf_sup_distance(estimates[i].residual_cdf, estimates[j].residual_cdf) >
          cdf_threshold)
        continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  }

  std::vector<int> best;
  std::vector<bool> seen(n, false);
  for (int start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<int> comp, stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (int u : adj[v]) {
        if (!seen[u]) {
          seen[u] = true;
          stack.push_back(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    // Larger wins; equal sizes break toward the smaller contained index,
    // which is comp.front() since components are discovered in index order.
    if (comp.size() > best.size()) best = std::move(comp);
  }
  return {best.front(), best};
}

namespace rates {

double delta_t(long t, int d, double eps_max, double x_max, double lambda0_sq, int n_buyers) {
  if (t < 3) throw std::invalid_argument("rates::delta_t: t must be >= 3");
  double tm1 = static_cast<double>(t - 1);
  return 4.0 * std::sqrt(d * std::log(tm1)) * eps_max * x_max * x_max /
         (lambda0_sq * std::sqrt(static_cast<double>(n_buyers) * tm1));
}

double gamma_t(long t) {
  if (t < 2) throw std::invalid_argument("rates::gamma_t: t must be >= 2");
  double td = static_cast<double>(t);
  return std::sqrt(2.0 * std::log(td)) / std::sqrt(td);
}

double corruption_budget_L(long phase_len, double v_max, int n_buyers, double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("rates::corruption_budget_L: eta must be in (0,1)");
  double len = static_cast<double>(phase_len);
  double arg = v_max * v_max * n_buyers * len * len * len * len - 1.0;
  if (!(arg > 1.0))
    throw std::invalid_argument("rates::corruption_budget_L: v_max^2 N |E|^4 must exceed 2");
  return std::log(arg) / std::log(1.0 / eta);
}

double delta_phase(long phase_len, int d, double eps_max, double x_max, double lambda0_sq,
                   int n_buyers, double a_max, double v_max, double eta) {
  double len = static_cast<double>(phase_len);
  double big_l = corruption_budget_L(phase_len, v_max, n_buyers, eta);
  double first = std::sqrt(2.0 * d * std::log(len)) * eps_max * x_max * x_max /
                 (lambda0_sq * std::sqrt(static_cast<double>(n_buyers) * len));
  double second = std::sqrt(static_cast<double>(d)) * (n_buyers * big_l * a_max + 1.0) * x_max *
                  x_max / (len * lambda0_sq);
  return first + second;
}

double gamma_phase(long phase_len, int n_buyers) {
  double len = static_cast<double>(phase_len);
  return std::sqrt(std::log(len)) / std::sqrt(2.0 * n_buyers * len);
}

double delta_anomalous(long t, int d) {
  if (t < 3) throw std::invalid_argument("rates::delta_anomalous: t must be >= 3");
  double tm1 = static_cast<double>(t - 1);
  return 2.0 * std::sqrt(static_cast<double>(d)) * std::log(tm1) / std::sqrt(tm1);
}

double gamma_anomalous(long t) { return gamma_t(t); }

}  // namespace rates

}  // namespace reservelab
