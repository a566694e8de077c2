#include "reservelab/noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace reservelab {

namespace {

constexpr int kTrapezoidNodes = 200000;

}  // namespace

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

// Acklam's rational approximation refined by one Halley step against erfc.
double std_normal_quantile(double p) {
  if (p <= 0.0) return -HUGE_VAL;
  if (p >= 1.0) return HUGE_VAL;
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = std_normal_cdf(x) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

NoiseModel NoiseModel::uniform(double eps_max) {
  if (!(eps_max > 0.0)) throw std::invalid_argument("noise: eps_max must be positive");
  NoiseModel m;
  m.kind_ = NoiseKind::kUniform;
  m.eps_max_ = eps_max;
  m.c_f_ = m.f_min_ = 1.0 / (2.0 * eps_max);
  m.mean_ = 0.0;
  return m;
}

NoiseModel NoiseModel::truncated_gaussian(double eps_max, double sigma) {
  if (!(eps_max > 0.0)) throw std::invalid_argument("noise: eps_max must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("noise: sigma must be positive");
  NoiseModel m;
  m.kind_ = NoiseKind::kTruncatedGaussian;
  m.eps_max_ = eps_max;
  m.sigma_ = sigma;
  m.phi_lo_ = std_normal_cdf(-eps_max / sigma);
  m.trunc_mass_ = std_normal_cdf(eps_max / sigma) - m.phi_lo_;
  double peak = 1.0 / (sigma * std::sqrt(2.0 * M_PI) * m.trunc_mass_);
  m.c_f_ = peak;
  m.f_min_ = peak * std::exp(-0.5 * (eps_max / sigma) * (eps_max / sigma));
  m.mean_ = 0.0;  // symmetric truncation of a symmetric density
  return m;
}

NoiseModel NoiseModel::piecewise_constant(std::vector<double> edges,
                                          std::vector<double> heights) {
  if (edges.size() < 2 || heights.size() + 1 != edges.size())
    throw std::invalid_argument("noise: histogram needs k+1 edges for k heights");
  if (!std::is_sorted(edges.begin(), edges.end()))
    throw std::invalid_argument("noise: histogram edges must be ascending");
  if (std::abs(edges.front() + edges.back()) > 1e-12 || !(edges.back() > 0.0))
    throw std::invalid_argument("noise: histogram support must be [-eps_max, eps_max]");
  double total = 0.0;
  for (std::size_t i = 0; i < heights.size(); ++i) {
    if (!(heights[i] > 0.0))
      throw std::invalid_argument("noise: histogram heights must be positive");
    if (!(edges[i + 1] > edges[i]))
      throw std::invalid_argument("noise: histogram bins must have positive width");
    total += heights[i] * (edges[i + 1] - edges[i]);
  }
  NoiseModel m;
  m.kind_ = NoiseKind::kPiecewiseConstant;
  m.eps_max_ = edges.back();
  m.edges_ = std::move(edges);
  m.heights_.resize(heights.size());
  for (std::size_t i = 0; i < heights.size(); ++i) m.heights_[i] = heights[i] / total;
  m.cum_.assign(m.edges_.size(), 0.0);
  double mean = 0.0;
  for (std::size_t i = 0; i + 1 < m.edges_.size(); ++i) {
    double w = m.edges_[i + 1] - m.edges_[i];
    m.cum_[i + 1] = m.cum_[i] + m.heights_[i] * w;
    mean += m.heights_[i] * 0.5 * (m.edges_[i + 1] * m.edges_[i + 1] - m.edges_[i] * m.edges_[i]);
  }
  m.cum_.back() = 1.0;
  m.mean_ = mean;
  m.c_f_ = *std::max_element(m.heights_.begin(), m.heights_.end());
  m.f_min_ = *std::min_element(m.heights_.begin(), m.heights_.end());
  return m;
}

NoiseModel NoiseModel::bimodal(double eps_max) {
  double e = eps_max;
  return piecewise_constant({-e, -e / 3.0, e / 3.0, e}, {0.8, 0.2, 0.8});
}

double NoiseModel::cdf(double z) const {
  if (z <= -eps_max_) return 0.0;
  if (z >= eps_max_) return 1.0;
  switch (kind_) {
    case NoiseKind::kUniform:
      return (z + eps_max_) / (2.0 * eps_max_);
    case NoiseKind::kTruncatedGaussian:
      return (std_normal_cdf(z / sigma_) - phi_lo_) / trunc_mass_;
    case NoiseKind::kPiecewiseConstant: {
      auto it = std::upper_bound(edges_.begin(), edges_.end(), z);
      std::size_t bin = static_cast<std::size_t>(it - edges_.begin()) - 1;
      if (bin >= heights_.size()) bin = heights_.size() - 1;
      return std::min(1.0, cum_[bin] + heights_[bin] * (z - edges_[bin]));
    }
  }
  return 0.0;
}

double NoiseModel::density(double z) const {
  if (z < -eps_max_ || z > eps_max_) return 0.0;
  switch (kind_) {
    case NoiseKind::kUniform:
      return 1.0 / (2.0 * eps_max_);
    case NoiseKind::kTruncatedGaussian:
      return c_f_ * std::exp(-0.5 * (z / sigma_) * (z / sigma_));
    case NoiseKind::kPiecewiseConstant: {
      auto it = std::upper_bound(edges_.begin(), edges_.end(), z);
      std::size_t bin = static_cast<std::size_t>(it - edges_.begin());
      bin = bin == 0 ? 0 : bin - 1;
      if (bin >= heights_.size()) bin = heights_.size() - 1;
      return heights_[bin];
    }
  }
  return 0.0;
}

double NoiseModel::quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  switch (kind_) {
    case NoiseKind::kUniform:
      return -eps_max_ + 2.0 * eps_max_ * u;
    case NoiseKind::kTruncatedGaussian: {
      double z = sigma_ * std_normal_quantile(phi_lo_ + u * trunc_mass_);
      return std::clamp(z, -eps_max_, eps_max_);
    }
    case NoiseKind::kPiecewiseConstant: {
      auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
      std::size_t bin = static_cast<std::size_t>(it - cum_.begin());
      bin = bin == 0 ? 0 : bin - 1;
      if (bin >= heights_.size()) bin = heights_.size() - 1;
      double z = edges_[bin] + (u - cum_[bin]) / heights_[bin];
      return std::clamp(z, -eps_max_, eps_max_);
    }
  }
  return 0.0;
}

double NoiseModel::variance() const {
  // Composite trapezoid of z^2 f(z); the integrand is bounded and piecewise
  // smooth on the compact support.
  const int n = kTrapezoidNodes;
  double h = 2.0 * eps_max_ / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    double z = -eps_max_ + i * h;
    double v = (z - mean_) * (z - mean_) * density(z);
    acc += (i == 0 || i == n) ? 0.5 * v : v;
  }
  return acc * h;
}

std::string NoiseModel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case NoiseKind::kUniform:
      os << "uniform(eps_max=" << eps_max_ << ")";
      break;
    case NoiseKind::kTruncatedGaussian:
      os << "truncated-gaussian(eps_max=" << eps_max_ << ", sigma=" << sigma_ << ")";
      break;
    case NoiseKind::kPiecewiseConstant:
      os << "piecewise-constant(eps_max=" << eps_max_ << ", bins=" << heights_.size() << ")";
      break;
  }
  return os.str();
}

namespace {

// f^k for small nonnegative integer k; the transcendental pow is measurably
// slow in the reserve-search inner loops.
double ipow(double f, int k) {
  double acc = 1.0;
  double base = f;
  for (; k > 0; k >>= 1) {
    if (k & 1) acc *= base;
    base *= base;
  }
  return acc;
}

}  // namespace

double lift_cdf_highest(double f, int n_buyers) {
  return ipow(f, n_buyers);
}

double lift_cdf_second_highest(double f, int n_buyers) {
  double fn1 = ipow(f, n_buyers - 1);
  return n_buyers * fn1 - (n_buyers - 1) * fn1 * f;
}

std::pair<double, double> order_stat_cdfs(const NoiseModel& model, int n_buyers, double z) {
  if (n_buyers < 2) throw std::invalid_argument("order_stat_cdfs: requires n_buyers >= 2");
  double f = model.cdf(z);
  return {lift_cdf_second_highest(f, n_buyers), lift_cdf_highest(f, n_buyers)};
}

double second_highest_noise_mean(const NoiseModel& model, int n_buyers) {
  if (n_buyers < 2) throw std::invalid_argument("second_highest_noise_mean: requires n_buyers >= 2");
  const int n = kTrapezoidNodes;
  double e = model.eps_max();
  double h = 2.0 * e / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    double z = -e + i * h;
    double v = lift_cdf_second_highest(model.cdf(z), n_buyers);
    acc += (i == 0 || i == n) ? 0.5 * v : v;
  }
  // E[X] on [-e, e] equals e - \int F^-.
  return e - acc * h;
}

}  // namespace reservelab
