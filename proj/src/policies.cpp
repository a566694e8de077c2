#include "reservelab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace reservelab {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::pair<double, double> top_two(const std::vector<double>& bids) {
  double top = -1.0, second = -1.0;
  for (double b : bids) {
    if (b > top) {
      second = top;
      top = b;
    } else if (b > second) {
      second = b;
    }
  }
  return {top, second};
}

}  // namespace

void ResidualTracker::resort() {
  std::size_t n = vals_.size();
  if (n < 2) return;
  std::size_t descents = 0;
  for (std::size_t i = 1; i < n; ++i) descents += vals_[i] < vals_[i - 1];
  if (descents > n / 8 + 8) {
    std::vector<std::pair<double, int>> tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = {vals_[i], perm_[i]};
    std::sort(tmp.begin(), tmp.end());
    for (std::size_t i = 0; i < n; ++i) {
      vals_[i] = tmp[i].first;
      perm_[i] = tmp[i].second;
    }
    return;
  }
  for (std::size_t i = 1; i < n; ++i) {
    double v = vals_[i];
    int p = perm_[i];
    std::size_t j = i;
    while (j > 0 && vals_[j - 1] > v) {
      vals_[j] = vals_[j - 1];
      perm_[j] = perm_[j - 1];
      --j;
    }
    vals_[j] = v;
    perm_[j] = p;
  }
}

BenchmarkPolicy::BenchmarkPolicy(const MarketConfig& config)
    : beta_(config.beta), v_max_(config.v_max), model_(config.noise, config.n_buyers) {}

ReserveDecision BenchmarkPolicy::decide(const Eigen::VectorXd& x, RngStream&) {
  double r = model_.optimize_reserve(beta_.dot(x), v_max_);
  return {r, std::nullopt, r};
}

NpacTPolicy::NpacTPolicy(int d, double v_max, long refresh_every)
    : d_(d), v_max_(v_max), refresh_every_(std::max(1L, refresh_every)), ols_(d),
      beta_hat_(Eigen::VectorXd::Zero(d)) {}

ReserveDecision NpacTPolicy::decide(const Eigen::VectorXd& x, RngStream&) {
  double cv = beta_hat_.dot(x);
  double r = optimize_reserve_on_steps(f_minus_, f_plus_, cv, v_max_);
  return {r, std::nullopt, r};
}

void NpacTPolicy::observe(const ObservedRound& round) {
  ++t_;
  auto [top, second] = top_two(round.bids);
  xs_.push_back(round.context);
  tops_.push_back(top);
  seconds_.push_back(second);
  track_plus_.append();
  track_minus_.append();

  ols_.add(round.context, mean_of(round.bids));
  beta_hat_ = ols_.solve();

  if (t_ % refresh_every_ == 0) {
    cv_scratch_.resize(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) cv_scratch_[i] = beta_hat_.dot(xs_[i]);
    track_plus_.rebuild([&](int i) { return tops_[i] - cv_scratch_[i]; });
    track_minus_.rebuild([&](int i) { return seconds_[i] - cv_scratch_[i]; });
    f_plus_ = StepCdf::from_ecdf(EmpiricalCdf::from_sorted(track_plus_.sorted()));
    f_minus_ = StepCdf::from_ecdf(EmpiricalCdf::from_sorted(track_minus_.sorted()));
  }
}

std::optional<EstimateSnapshot> NpacTPolicy::snapshot() const {
  EstimateSnapshot snap;
  snap.beta_hat = beta_hat_;
  snap.f_minus = f_minus_;
  snap.f_plus = f_plus_;
  snap.built_from_begin = 1;
  snap.built_from_end = t_;
  return snap;
}

NpacSPolicy::NpacSPolicy(int d, int n_buyers, double v_max, long horizon)
    : d_(d), n_buyers_(n_buyers), v_max_(v_max), sched_(horizon) {}

ReserveDecision NpacSPolicy::decide(const Eigen::VectorXd& x, RngStream& rng) {
  long t = t_ + 1;
  int ell = sched_.phase_of(t);
  double planned = 0.0;
  if (snap_) planned = optimize_empirical_reserve(*snap_, x, v_max_);
  double coin = rng.next_unit();
  if (coin < 1.0 / static_cast<double>(sched_.phase_length(ell))) {
    int buyer = rng.uniform_index(n_buyers_);
    double ru = rng.uniform(0.0, v_max_);
    return {ru, buyer, planned};
  }
  return {planned, std::nullopt, planned};
}

void NpacSPolicy::observe(const ObservedRound& round) {
  ++t_;
  phase_data_.push_back({round.context, round.bids});
  if (!sched_.is_phase_end(t_)) return;

  // Phase boundary: estimates use this phase's data only, then it is dropped.
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> ys;
  xs.reserve(phase_data_.size());
  ys.reserve(phase_data_.size());
  for (const auto& r : phase_data_) {
    xs.push_back(r.context);
    ys.push_back(mean_of(r.bids));
  }
  Eigen::VectorXd beta = ols_fit(xs, ys);
  EmpiricalCdf pooled = estimate_F_pooled(phase_data_, beta);
  StepCdf base = StepCdf::from_ecdf(pooled);

  EstimateSnapshot snap;
  snap.beta_hat = std::move(beta);
  snap.f_minus = base.lifted_second_highest(n_buyers_);
  snap.f_plus = base.lifted_highest(n_buyers_);
  int ell = sched_.phase_of(t_);
  snap.built_from_begin = sched_.phase_begin(ell);
  snap.built_from_end = t_;
  snap_ = std::move(snap);
  phase_data_.clear();
}

std::optional<EstimateSnapshot> NpacSPolicy::snapshot() const { return snap_; }

NpacAPolicy::NpacAPolicy(int d, int n_buyers, double v_max, Options options)
    : d_(d), n_buyers_(n_buyers), v_max_(v_max), opt_(options), gram_(d),
      moments_(n_buyers, Eigen::VectorXd::Zero(d)), trackers_(n_buyers),
      estimates_(n_buyers) {
  for (auto& e : estimates_) e.beta_hat = Eigen::VectorXd::Zero(d);
}

MaxCompResult NpacAPolicy::cluster(long round) const {
  double delta = rates::delta_anomalous(round, d_);
  double beta_thr =
      opt_.beta_threshold ? *opt_.beta_threshold : 2.0 * delta / opt_.x_max;
  double cdf_thr = opt_.cdf_threshold
                       ? *opt_.cdf_threshold
                       : 2.0 * (std::log(static_cast<double>(round)) * delta +
                                rates::gamma_anomalous(round));
  return maxcomp(estimates_, beta_thr, cdf_thr);
}

ReserveDecision NpacAPolicy::decide(const Eigen::VectorXd& x, RngStream&) {
  long t = t_ + 1;
  if (t <= opt_.burn_in) {
    last_snapshot_.reset();
    return {0.0, std::nullopt, 0.0};
  }
  MaxCompResult comp = cluster(t);
  const PerBuyerEstimate& pick = estimates_[comp.chosen];
  StepCdf base = StepCdf::from_ecdf(pick.residual_cdf);

  EstimateSnapshot snap;
  snap.beta_hat = pick.beta_hat;
  snap.f_minus = base.lifted_second_highest(n_buyers_);
  snap.f_plus = base.lifted_highest(n_buyers_);
  snap.built_from_begin = 1;
  snap.built_from_end = t_;
  last_snapshot_ = snap;

  double cv = pick.beta_hat.dot(x);
  double delta = rates::delta_anomalous(t, d_);
  double cap = std::max(0.0, cv + opt_.h_bar + n_buyers_ * delta);
  double upper = std::min(cap, v_max_);
  double r = optimize_reserve_on_steps(snap.f_minus, snap.f_plus, cv, upper);
  return {r, std::nullopt, r};
}

void NpacAPolicy::observe(const ObservedRound& round) {
  ++t_;
  xs_.push_back(round.context);
  bids_.push_back(round.bids);
  gram_.add(round.context, 0.0);
  for (int i = 0; i < n_buyers_; ++i) {
    moments_[i].noalias() += round.context * round.bids[i];
    trackers_[i].append();
  }
  Eigen::MatrixXd pinv = pseudo_inverse(gram_.gram());
  cv_scratch_.resize(xs_.size());
  for (int i = 0; i < n_buyers_; ++i) {
    estimates_[i].beta_hat = pinv * moments_[i];
    const Eigen::VectorXd& beta = estimates_[i].beta_hat;
    for (std::size_t k = 0; k < xs_.size(); ++k) cv_scratch_[k] = beta.dot(xs_[k]);
    trackers_[i].rebuild([&](int k) { return bids_[k][i] - cv_scratch_[k]; });
    estimates_[i].residual_cdf = EmpiricalCdf::from_sorted(trackers_[i].sorted());
  }
}

std::optional<EstimateSnapshot> NpacAPolicy::snapshot() const { return last_snapshot_; }

}  // namespace reservelab
