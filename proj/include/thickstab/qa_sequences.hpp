#pragma once

#include "thickstab/symbol.hpp"

#include <vector>

namespace thickstab {

struct MomentSearch {
  double s_min = -50.0;
  double r_cap = 0.0;  // 0 means the symbol's own r_cap
  int grid_points = 4096;
  double tolerance = 1e-12;
};

struct LogMoment {
  double log_moment;
  double argmax;
};

// log M_k = sup_{r >= 0} (k log r - F(r)), maximized over s = log r.
LogMoment log_moment(const MultiplierSymbol& F, int k, const MomentSearch& search = {});

class QASequence {
 public:
  QASequence(MultiplierSymbol symbol, std::vector<double> log_moments, std::vector<double> argmax);

  static QASequence build(const MultiplierSymbol& F, int k_max, const MomentSearch& search = {});

  const MultiplierSymbol& symbol() const noexcept { return symbol_; }
  const std::vector<double>& log_moments() const noexcept { return log_moments_; }
  const std::vector<double>& argmax_locations() const noexcept { return argmax_; }
  int k_max() const noexcept { return int(log_moments_.size()) - 1; }
  // sup_k M_k / M_{k+1}.
  double ratio_bound() const noexcept { return ratio_bound_; }
  // M_k / M_{k+1} for k = 0..k_max-1.
  std::vector<double> ratios() const;

 private:
  MultiplierSymbol symbol_;
  std::vector<double> log_moments_;
  std::vector<double> argmax_;
  double ratio_bound_;
};

// sum_{k=0}^{K-1} M_k / M_{k+1}.
double dc_partial_sum(const QASequence& seq, int K);

struct ConvexityReport {
  bool holds;
  double worst_violation;  // max_k 2 log M_k - log M_{k+1} - log M_{k-1}
  int worst_k;
};

ConvexityReport log_convexity_report(const QASequence& seq);

// int_0^{T_max} F(t) / (1 + t^2) dt.
double integral_test(const MultiplierSymbol& F, double T_max);

struct ScalingCheck {
  double lhs;  // log M_k^{TF}
  double rhs;  // (1/p - T) inf F + (1/p) log M_{kp}^F
  bool holds;
};

ScalingCheck scaling_inequality_check(const MultiplierSymbol& F, double T, int p, int k);

struct CriticalPointCheck {
  double t_k;              // root of t F_p'(t) = k, finite differences
  double t_k_closed_form;  // same root with the closed-form derivative
  double bound;            // 2 k phi_p(k)
  bool holds;
};

CriticalPointCheck tk_bound_check(int p, int k, int k_floor = 100);

struct RatioCheck {
  double ratio;  // M_{k-1} / M_k
  double bound;  // 1 / (2 k phi_p(k))
  bool holds;
};

RatioCheck ratio_lower_bound_check(int p, int k, int k_floor = 100);

}  // namespace thickstab
