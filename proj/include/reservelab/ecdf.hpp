#pragma once

#include <vector>

namespace reservelab {

// Sample-backed empirical CDF: sorted jump locations (duplicates allowed).
// eval uses <= (right-continuous value), eval_strict uses < (left limit);
// the reserve optimizer needs both semantics.
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  static EmpiricalCdf from_samples(std::vector<double> samples);         // sorts
  static EmpiricalCdf from_sorted(std::vector<double> sorted_samples);   // trusts order

  long count() const { return static_cast<long>(points_.size()); }
  bool empty() const { return points_.empty(); }
  const std::vector<double>& points() const { return points_; }

  double eval(double z) const;         // #(points <= z) / count; 0 when empty
  double eval_strict(double z) const;  // #(points < z) / count

 private:
  std::vector<double> points_;
};

// Kolmogorov distance between two ECDFs, computed exactly at the union of
// jump points and their left limits.
double ecdf_sup_distance(const EmpiricalCdf& c1, const EmpiricalCdf& c2);

// Right-continuous step function with unique ascending jump locations xs and
// post-jump values vs (nondecreasing, 0 before the first jump). This is the
// representation policies price with: plain ECDFs and their order-statistic
// lifts both materialize to it.
class StepCdf {
 public:
  StepCdf() = default;
  StepCdf(std::vector<double> xs, std::vector<double> vs);
  static StepCdf from_ecdf(const EmpiricalCdf& ecdf);

  bool empty() const { return xs_.empty(); }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& vs() const { return vs_; }

  double eval(double z) const;
  double eval_strict(double z) const;

  // Pointwise algebraic lifts to the order-statistic CDFs of n i.i.d. draws.
  StepCdf lifted_highest(int n_buyers) const;         // F^n
  StepCdf lifted_second_highest(int n_buyers) const;  // n F^(n-1) - (n-1) F^n

 private:
  std::vector<double> xs_;
  std::vector<double> vs_;
};

}  // namespace reservelab
