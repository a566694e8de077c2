#include "reservelab/ecdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "reservelab/noise.hpp"

namespace reservelab {

EmpiricalCdf EmpiricalCdf::from_samples(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  return from_sorted(std::move(samples));
}

EmpiricalCdf EmpiricalCdf::from_sorted(std::vector<double> sorted_samples) {
  EmpiricalCdf cdf;
  cdf.points_ = std::move(sorted_samples);
  return cdf;
}

double EmpiricalCdf::eval(double z) const {
  if (points_.empty()) return 0.0;
  auto it = std::upper_bound(points_.begin(), points_.end(), z);
  return static_cast<double>(it - points_.begin()) / static_cast<double>(points_.size());
}

double EmpiricalCdf::eval_strict(double z) const {
  if (points_.empty()) return 0.0;
  auto it = std::lower_bound(points_.begin(), points_.end(), z);
  return static_cast<double>(it - points_.begin()) / static_cast<double>(points_.size());
}

double ecdf_sup_distance(const EmpiricalCdf& c1, const EmpiricalCdf& c2) {
  if (c1.empty() || c2.empty())
    throw std::invalid_argument("ecdf_sup_distance: both CDFs must be nonempty");
  const auto& a = c1.points();
  const auto& b = c2.points();
  double na = static_cast<double>(a.size());
  double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < a.size() || j < b.size()) {
    double z =
        (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    // Left limit just before z, then the value at z after consuming ties.
    double left = std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
    while (i < a.size() && a[i] == z) ++i;
    while (j < b.size() && b[j] == z) ++j;
    double at = std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
    sup = std::max(sup, std::max(left, at));
  }
  return sup;
}

StepCdf::StepCdf(std::vector<double> xs, std::vector<double> vs)
    : xs_(std::move(xs)), vs_(std::move(vs)) {
  if (xs_.size() != vs_.size()) throw std::invalid_argument("StepCdf: xs/vs size mismatch");
}

StepCdf StepCdf::from_ecdf(const EmpiricalCdf& ecdf) {
  StepCdf s;
  const auto& pts = ecdf.points();
  double n = static_cast<double>(pts.size());
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    while (j < pts.size() && pts[j] == pts[i]) ++j;
    s.xs_.push_back(pts[i]);
    s.vs_.push_back(static_cast<double>(j) / n);
    i = j;
  }
  return s;
}

double StepCdf::eval(double z) const {
  auto it = std::upper_bound(xs_.begin(), xs_.end(), z);
  if (it == xs_.begin()) return 0.0;
  return vs_[static_cast<std::size_t>(it - xs_.begin()) - 1];
}

double StepCdf::eval_strict(double z) const {
  auto it = std::lower_bound(xs_.begin(), xs_.end(), z);
  if (it == xs_.begin()) return 0.0;
  return vs_[static_cast<std::size_t>(it - xs_.begin()) - 1];
}

StepCdf StepCdf::lifted_highest(int n_buyers) const {
  StepCdf out;
  out.xs_ = xs_;
  out.vs_.resize(vs_.size());
  for (std::size_t i = 0; i < vs_.size(); ++i)
    out.vs_[i] = lift_cdf_highest(vs_[i], n_buyers);
  return out;
}

StepCdf StepCdf::lifted_second_highest(int n_buyers) const {
  StepCdf out;
  out.xs_ = xs_;
  out.vs_.resize(vs_.size());
  for (std::size_t i = 0; i < vs_.size(); ++i)
    out.vs_[i] = lift_cdf_second_highest(vs_[i], n_buyers);
  return out;
}

}  // namespace reservelab
