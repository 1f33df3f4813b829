#include "thickstab/qa_sequences.hpp"

#include "numerics.hpp"
#include "thickstab/errors.hpp"
#include "thickstab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace thickstab {

LogMoment log_moment(const MultiplierSymbol& F, int k, const MomentSearch& search) {
  if (k < 0) throw InvalidArgument("log_moment: k must be >= 0");
  if (F.family() == SymbolFamily::Shifted) {
    LogMoment m = log_moment(*F.base(), k, search);
    m.log_moment += F.parameter();
    return m;
  }
  if (k == 0) return {-F.inf_value(), F.inf_argmin()};

  const double r_cap = search.r_cap > 0.0 ? search.r_cap : F.r_cap();
  const double s_max = std::log(r_cap);
  const double s_min = search.s_min;
  if (!(s_max > s_min)) throw InvalidArgument("log_moment: empty search interval");
  const auto neg_h = [&](double s) { return F(std::exp(s)) - k * s; };

  detail::Extremum best =
      F.log_convex() ? detail::golden_minimize(neg_h, s_min, s_max, search.tolerance)
                     : detail::scan_minimize(neg_h, s_min, s_max, search.grid_points, search.tolerance);
  const double edge = 1e-6 * (s_max - s_min);
  if (best.x >= s_max - edge) {
    std::ostringstream os;
    os << "supremum infinite: k log r - F(r) still increasing at r_cap = " << r_cap << " for "
       << F.name() << ", k = " << k;
    throw NumericalFailure(os.str());
  }
  if (!std::isfinite(best.value)) throw NumericalFailure("log_moment: non-finite objective for " + F.name());
  return {-best.value, std::exp(best.x)};
}

QASequence::QASequence(MultiplierSymbol symbol, std::vector<double> log_moments, std::vector<double> argmax)
    : symbol_(std::move(symbol)), log_moments_(std::move(log_moments)), argmax_(std::move(argmax)) {
  if (log_moments_.empty() || argmax_.size() != log_moments_.size())
    throw InvalidArgument("sequence needs matching, non-empty moment and argmax arrays");
  for (double v : log_moments_)
    if (!std::isfinite(v)) throw NumericalFailure("sequence holds a non-finite log moment");
  ratio_bound_ = 0.0;
  for (std::size_t k = 0; k + 1 < log_moments_.size(); ++k)
    ratio_bound_ = std::max(ratio_bound_, std::exp(log_moments_[k] - log_moments_[k + 1]));
}

QASequence QASequence::build(const MultiplierSymbol& F, int k_max, const MomentSearch& search) {
  if (k_max < 0) throw InvalidArgument("sequence: k_max must be >= 0");
  std::vector<double> lm(std::size_t(k_max) + 1), arg(std::size_t(k_max) + 1);
  parallel_for(lm.size(), [&](std::size_t k) {
    const LogMoment m = log_moment(F, int(k), search);
    lm[k] = m.log_moment;
    arg[k] = m.argmax;
  });
  return QASequence(F, std::move(lm), std::move(arg));
}

std::vector<double> QASequence::ratios() const {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < log_moments_.size(); ++k)
    out.push_back(std::exp(log_moments_[k] - log_moments_[k + 1]));
  return out;
}

double dc_partial_sum(const QASequence& seq, int K) {
  if (K < 0 || K > seq.k_max()) throw InvalidArgument("dc_partial_sum: K must lie in [0, k_max]");
  const auto& lm = seq.log_moments();
  double sum = 0.0;
  for (int k = 0; k < K; ++k) sum += std::exp(lm[k] - lm[k + 1]);
  return sum;
}

ConvexityReport log_convexity_report(const QASequence& seq) {
  if (seq.k_max() < 2) throw InvalidArgument("log_convexity_report: needs k_max >= 2");
  const auto& lm = seq.log_moments();
  ConvexityReport rep{true, -std::numeric_limits<double>::infinity(), 1};
  for (int k = 1; k < seq.k_max(); ++k) {
    const double v = 2.0 * lm[k] - lm[k + 1] - lm[k - 1];
    const double tol = 1e-9 * std::abs(lm[k]) + 1e-12;
    if (v > rep.worst_violation) {
      rep.worst_violation = v;
      rep.worst_k = k;
    }
    if (v > tol) rep.holds = false;
  }
  return rep;
}

namespace {

double simpson_adaptive(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson_adaptive(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40);
}

}  // namespace

double integral_test(const MultiplierSymbol& F, double T_max) {
  if (!(T_max > 0.0) || !std::isfinite(T_max)) throw InvalidArgument("integral_test: T_max must be positive");
  const std::function<double(double)> f = [&](double t) { return F(t) / (1.0 + t * t); };
  // Dyadic panels keep the adaptive rule well scaled on long ranges.
  double total = 0.0, a = 0.0, b = std::min(T_max, 1.0);
  while (true) {
    total += simpson(f, a, b, 1e-13 * std::max(1.0, b - a));
    if (b >= T_max) break;
    a = b;
    b = std::min(T_max, 2.0 * b);
  }
  return total;
}

ScalingCheck scaling_inequality_check(const MultiplierSymbol& F, double T, int p, int k) {
  if (p < 1 || !(T >= 1.0 / p)) throw InvalidArgument("scaling check needs p >= 1 and T >= 1/p");
  if (k < 0) throw InvalidArgument("scaling check needs k >= 0");
  const double lhs = log_moment(MultiplierSymbol::scaled(F, T), k).log_moment;
  const double rhs = (1.0 / p - T) * F.inf_value() + log_moment(F, k * p).log_moment / p;
  const double tol = 1e-9 * (1.0 + std::abs(rhs));
  return {lhs, rhs, lhs <= rhs + tol};
}

namespace {

// Root of g(t) = k on (0, inf) for increasing g, by bracketing then bisection.
double solve_increasing(const std::function<double(double)>& g, double k, const char* what) {
  double lo = 0.0, hi = 1.0;
  while (g(hi) < k) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) {
      std::ostringstream os;
      os << what << ": bracket failure, t F'(t) < " << k << " on scanned interval [0, " << hi << "]";
      throw NumericalFailure(os.str());
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < k ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CriticalPointCheck tk_bound_check(int p, int k, int k_floor) {
  if (k < k_floor) throw InvalidArgument("tk_bound_check: k below k_floor = " + std::to_string(k_floor));
  const MultiplierSymbol F = MultiplierSymbol::iterated(p);
  const IteratedLog aux(p);
  const std::function<double(double)> fd = [&](double t) {
    const double h = std::max(1e-6 * t, 1e-6);
    return t * (F(t + h) - F(std::max(t - h, 0.0))) / (t + h - std::max(t - h, 0.0));
  };
  const std::function<double(double)> exact = [&](double t) { return t * aux.symbol_derivative(t); };
  const double t_k = solve_increasing(fd, double(k), "tk_bound_check");
  const double t_exact = solve_increasing(exact, double(k), "tk_bound_check");
  const double bound = 2.0 * k * aux.phi(double(k));
  return {t_k, t_exact, bound, t_k <= bound};
}

RatioCheck ratio_lower_bound_check(int p, int k, int k_floor) {
  if (k < k_floor) throw InvalidArgument("ratio_lower_bound_check: k below k_floor = " + std::to_string(k_floor));
  const MultiplierSymbol F = MultiplierSymbol::iterated(p);
  const double ratio = std::exp(log_moment(F, k - 1).log_moment - log_moment(F, k).log_moment);
  const double bound = 1.0 / (2.0 * k * IteratedLog(p).phi(double(k)));
  return {ratio, bound, ratio >= bound};
}

}  // namespace thickstab
