#include "reservelab/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reservelab {

namespace {

constexpr int kModelTableNodes = 200000;

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

RhoEvaluator::RhoEvaluator(const StepCdf& failure, const StepCdf& integral, double common_value)
    : failure_(failure), integral_(integral), cv_(common_value) {
  const auto& xs = integral_.xs();
  const auto& vs = integral_.vs();
  prefix_.resize(xs.size(), 0.0);
  for (std::size_t i = 1; i < xs.size(); ++i)
    prefix_[i] = prefix_[i - 1] + vs[i - 1] * (xs[i] - xs[i - 1]);
}

double RhoEvaluator::antiderivative(double m) const {
  const auto& xs = integral_.xs();
  const auto& vs = integral_.vs();
  if (xs.empty() || m <= xs.front()) return 0.0;
  if (m >= xs.back()) return prefix_.back() + vs.back() * (m - xs.back());
  auto it = std::upper_bound(xs.begin(), xs.end(), m);
  std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  return prefix_[i] + vs[i] * (m - xs[i]);
}

double RhoEvaluator::integral_upto_margin(double m) const {
  return antiderivative(m) - antiderivative(-cv_);
}

double RhoEvaluator::rho_margin(double m) const {
  return integral_upto_margin(m) - (m + cv_) * failure_.eval_strict(m);
}

double objective_rho(double y, double common_value, const StepCdf& f1, const StepCdf& f2) {
  return RhoEvaluator(f1, f2, common_value).rho(y);
}

double objective_rho(double y, double common_value, const NoiseModel& noise, int n_buyers) {
  auto fm = [&](double z) {
    return lift_cdf_second_highest(noise.cdf(z - common_value), n_buyers);
  };
  double integral = integrate(fm, 0.0, y, 1e-9);
  return integral - y * lift_cdf_highest(noise.cdf(y - common_value), n_buyers);
}

ReserveSearch search_reserve_on_steps(const StepCdf& f_minus, const StepCdf& f_plus,
                                      double common_value, double upper) {
  if (upper <= 0.0) return {0.0, 0.0};
  // Candidate margins: the interval ends and every jump strictly inside. The
  // objective is piecewise linear between consecutive candidates, so this
  // scan is exact; ties resolve to the smallest reserve. A single merged
  // pointer walk keeps the whole search O(#jumps); the arithmetic per
  // candidate matches RhoEvaluator bit for bit.
  const auto& mxs = f_minus.xs();
  const auto& mvs = f_minus.vs();
  const auto& pxs = f_plus.xs();
  const auto& pvs = f_plus.vs();
  const long nm = static_cast<long>(mxs.size());
  const long np = static_cast<long>(pxs.size());
  const double m_lo = 0.0 - common_value;
  const double m_hi = upper - common_value;

  std::vector<double> prefix(mxs.size(), 0.0);
  for (long i = 1; i < nm; ++i)
    prefix[i] = prefix[i - 1] + mvs[i - 1] * (mxs[i] - mxs[i - 1]);

  long ii = -1;  // last f_minus jump <= current margin
  long jj = -1;  // last f_plus jump < current margin
  auto anti = [&](double m) {
    while (ii + 1 < nm && mxs[ii + 1] <= m) ++ii;
    return ii < 0 ? 0.0 : prefix[ii] + mvs[ii] * (m - mxs[ii]);
  };
  auto failure = [&](double m) {
    while (jj + 1 < np && pxs[jj + 1] < m) ++jj;
    return jj < 0 ? 0.0 : pvs[jj];
  };

  double anti_lo = anti(m_lo);
  double best_m = m_lo;
  // rho at the lower end is exactly 0: empty integral, zero price.
  double best_rho = (anti(m_lo) - anti_lo) - (m_lo + common_value) * failure(m_lo);

  long a = 0, b = 0;
  double prev = m_lo;
  auto consider = [&](double m) {
    if (m <= prev) return;
    prev = m;
    double rho = (anti(m) - anti_lo) - (m + common_value) * failure(m);
    if (rho > best_rho) {
      best_rho = rho;
      best_m = m;
    }
  };
  while (a < nm || b < np) {
    double m;
    if (b >= np || (a < nm && mxs[a] <= pxs[b]))
      m = mxs[a++];
    else
      m = pxs[b++];
    if (m <= m_lo) continue;
    if (m >= m_hi) break;
    consider(m);
  }
  consider(m_hi);

  if (best_m == m_lo) return {0.0, best_rho};
  if (best_m == m_hi) return {upper, best_rho};
  return {best_m + common_value, best_rho};
}

double optimize_reserve_on_steps(const StepCdf& f_minus, const StepCdf& f_plus,
                                 double common_value, double upper) {
  return search_reserve_on_steps(f_minus, f_plus, common_value, upper).reserve;
}

double optimize_empirical_reserve(const EstimateSnapshot& snapshot, const Eigen::VectorXd& x,
                                  double v_max) {
  double cv = snapshot.beta_hat.size() == x.size() ? snapshot.beta_hat.dot(x) : 0.0;
  return optimize_reserve_on_steps(snapshot.f_minus, snapshot.f_plus, cv, v_max);
}

TruthfulRevenueModel::TruthfulRevenueModel(const NoiseModel& noise, int n_buyers)
    : noise_(noise), n_(n_buyers), eps_(noise.eps_max()) {
  if (n_ < 2) throw std::invalid_argument("TruthfulRevenueModel: requires n_buyers >= 2");
  h_ = 2.0 * eps_ / kModelTableNodes;
  prefix_.resize(kModelTableNodes + 1, 0.0);
  double prev = f_minus(-eps_);
  for (int i = 1; i <= kModelTableNodes; ++i) {
    double cur = f_minus(-eps_ + i * h_);
    prefix_[i] = prefix_[i - 1] + 0.5 * (prev + cur) * h_;
    prev = cur;
  }
  e_minus_mean_ = eps_ - prefix_.back();
}

double TruthfulRevenueModel::integral_f_minus(double m) const {
  if (m <= -eps_) return 0.0;
  if (m >= eps_) return prefix_.back() + (m - eps_);
  double pos = (m + eps_) / h_;
  int i = static_cast<int>(pos);
  if (i >= kModelTableNodes) i = kModelTableNodes - 1;
  double mi = -eps_ + i * h_;
  return prefix_[i] + 0.5 * (f_minus(mi) + f_minus(m)) * (m - mi);
}

double TruthfulRevenueModel::rho(double y, double common_value) const {
  double integral = integral_f_minus(y - common_value) - integral_f_minus(-common_value);
  return integral - y * f_plus(y - common_value);
}

double TruthfulRevenueModel::expected_revenue(double reserve, double common_value) const {
  return e_minus_mean_ + common_value + rho(reserve, common_value);
}

double TruthfulRevenueModel::optimize_reserve(double common_value, double v_max,
                                              int grid) const {
  if (grid < 2) throw std::invalid_argument("optimize_reserve: grid too small");
  double step = v_max / (grid - 1);
  int best = 0;
  double best_rho = rho(0.0, common_value);
  for (int j = 1; j < grid; ++j) {
    double r = rho(j * step, common_value);
    if (r > best_rho) {
      best_rho = r;
      best = j;
    }
  }
  double lo = std::max(0.0, (best - 1) * step);
  double hi = std::min(v_max, (best + 1) * step);
  // Golden-section pass on the winning bracket.
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = rho(c, common_value), fd = rho(d, common_value);
  for (int it = 0; it < 80 && (b - a) > 1e-13 * std::max(1.0, v_max); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = rho(c, common_value);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = rho(d, common_value);
    }
  }
  double refined = 0.5 * (a + b);
  double refined_rho = rho(refined, common_value);
  if (refined_rho > best_rho) return refined;
  if (refined_rho == best_rho) return std::min(refined, best * step);
  return best * step;
}

double expected_revenue_truthful(double reserve, double common_value, const NoiseModel& noise,
                                 int n_buyers) {
  if (n_buyers < 2)
    throw std::invalid_argument("expected_revenue_truthful: requires n_buyers >= 2");
  auto fm = [&](double z) {
    return lift_cdf_second_highest(noise.cdf(z - common_value), n_buyers);
  };
  double integral = integrate(fm, 0.0, reserve, 1e-8);
  double failure = reserve * lift_cdf_highest(noise.cdf(reserve - common_value), n_buyers);
  return second_highest_noise_mean(noise, n_buyers) + common_value + integral - failure;
}

double optimize_true_reserve(const NoiseModel& noise, int n_buyers, double common_value,
                             double v_max, int grid) {
  TruthfulRevenueModel model(noise, n_buyers);
  return model.optimize_reserve(common_value, v_max, grid);
}

PhaseSchedule::PhaseSchedule(long horizon) : horizon_(horizon) {
  if (horizon < 4) throw std::invalid_argument("phase_schedule: horizon must be >= 4");
  long remaining = horizon;
  long start = 1;
  int ell = 1;
  while (remaining > 0) {
    double raw = std::pow(static_cast<double>(horizon), 1.0 - std::pow(2.0, -ell));
    long len = static_cast<long>(std::floor(raw + 0.5));  // round half up
    if (len < 1) len = 1;
    if (len > remaining) len = remaining;
    lengths_.push_back(len);
    begins_.push_back(start);
    start += len;
    remaining -= len;
    ++ell;
  }
}

int PhaseSchedule::phase_of(long t) const {
  if (t < 1) return 1;
  auto it = std::upper_bound(begins_.begin(), begins_.end(), t);
  int idx = static_cast<int>(it - begins_.begin());
  return std::min(idx, phase_count());
}

bool PhaseSchedule::is_phase_end(long t) const {
  int ell = phase_of(t);
  return t == begins_[ell - 1] + lengths_[ell - 1] - 1;
}

}  // namespace reservelab
