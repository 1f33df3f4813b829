#include <doctest.h>

#include "thickstab/errors.hpp"
#include "thickstab/qa_sequences.hpp"

#include <cmath>

using namespace thickstab;

TEST_CASE("moment oracles") {
  const LogMoment m3 = log_moment(MultiplierSymbol::halfheat(), 3);
  CHECK(m3.log_moment == doctest::Approx(0.2958368660043291).epsilon(1e-10));
  CHECK(m3.argmax == doctest::Approx(3.0).epsilon(1e-6));

  const LogMoment m2 = log_moment(MultiplierSymbol::fractional(1.0), 2);
  CHECK(std::abs(m2.log_moment + 1.0) <= 1e-8);
  CHECK(m2.argmax == doctest::Approx(1.0).epsilon(1e-6));

  CHECK(log_moment(MultiplierSymbol::loglog(1.0, 1.0), 0).log_moment == 0.0);
}

TEST_CASE("halfheat moments follow k log k - k") {
  const QASequence seq = QASequence::build(MultiplierSymbol::halfheat(), 100);
  for (int k = 1; k <= 100; ++k)
    CHECK(std::abs(seq.log_moments()[k] - (k * std::log(k) - k)) <= 1e-8);
}

TEST_CASE("bounded symbols have no moments") {
  CHECK_THROWS_AS(log_moment(MultiplierSymbol::saturating(), 1), NumericalFailure);
}

TEST_CASE("partial sums") {
  const QASequence seq = QASequence::build(MultiplierSymbol::halfheat(), 10000);
  CHECK(dc_partial_sum(seq, 1) == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
  // Closed-form offsets S_K - ln K, summed independently.
  CHECK(dc_partial_sum(seq, 10) - std::log(10.0) == doctest::Approx(2.6998777546866153).epsilon(1e-8));
  CHECK(dc_partial_sum(seq, 100) - std::log(100.0) == doctest::Approx(2.699671811279501).epsilon(1e-8));
  CHECK(dc_partial_sum(seq, 1000) - std::log(1000.0) == doctest::Approx(2.6996697488102868).epsilon(1e-8));
  CHECK(dc_partial_sum(seq, 10000) - std::log(10000.0) == doctest::Approx(2.699669728185304).epsilon(1e-8));

  double last = 0.0;
  for (int K = 0; K <= 200; ++K) {
    const double s = dc_partial_sum(seq, K);
    CHECK(s >= last);
    last = s;
  }
  const auto ratios = seq.ratios();
  for (std::size_t k = 1; k < ratios.size(); ++k) CHECK(ratios[k] <= ratios[k - 1] * (1 + 1e-12));
  CHECK(seq.ratio_bound() == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("fractional(1) partial sums grow like sqrt K") {
  const QASequence seq = QASequence::build(MultiplierSymbol::fractional(1.0), 4000);
  auto closed = [](int k) { return k == 0 ? 0.0 : 0.5 * k * std::log(k / 2.0) - 0.5 * k; };
  double brute = 0.0;
  for (int k = 0; k < 4000; ++k) brute += std::exp(closed(k) - closed(k + 1));
  CHECK(dc_partial_sum(seq, 4000) == doctest::Approx(brute).epsilon(1e-7));
  const double r1 = dc_partial_sum(seq, 1000) / std::sqrt(1000.0);
  const double r2 = dc_partial_sum(seq, 4000) / std::sqrt(4000.0);
  CHECK(r2 == doctest::Approx(r1).epsilon(0.05));
}

TEST_CASE("log-convexity") {
  const QASequence hh = QASequence::build(MultiplierSymbol::halfheat(), 200);
  const ConvexityReport r = log_convexity_report(hh);
  CHECK(r.holds);
  CHECK(r.worst_violation <= 1e-9);

  CHECK(log_convexity_report(QASequence::build(MultiplierSymbol::loglog(1.0, 1.0), 200)).holds);

  auto lm = hh.log_moments();
  auto am = hh.argmax_locations();
  lm[5] += std::log(2.0);
  const ConvexityReport bad = log_convexity_report(QASequence(MultiplierSymbol::halfheat(), lm, am));
  CHECK_FALSE(bad.holds);
  CHECK(bad.worst_k == 5);
}

TEST_CASE("comparison and shift") {
  const MultiplierSymbol F = MultiplierSymbol::fractional(0.75);
  const MultiplierSymbol G = MultiplierSymbol::halfheat();
  const MultiplierSymbol Fs = MultiplierSymbol::shifted(F, -2.0);
  for (int k = 0; k <= 60; k += 3) {
    const double base = log_moment(F, k).log_moment;
    CHECK(log_moment(Fs, k).log_moment == doctest::Approx(base - 2.0).epsilon(1e-12));
  }
  // F = r^2 >= r on [1, inf) but not below 1, so compare r^2 + 1 >= r.
  const MultiplierSymbol big = MultiplierSymbol::shifted(MultiplierSymbol::fractional(1.0), -1.0);
  for (int k = 1; k <= 40; ++k) CHECK(log_moment(big, k).log_moment <= log_moment(G, k).log_moment);
}

TEST_CASE("integral test") {
  const MultiplierSymbol hh = MultiplierSymbol::halfheat();
  for (int m = 1; m <= 8; ++m) {
    const double T = std::exp(double(m));
    CHECK(integral_test(hh, T) == doctest::Approx(0.5 * std::log1p(T * T)).epsilon(1e-8));
  }
  CHECK(integral_test(MultiplierSymbol::fractional(1.0), 0.01) == doctest::Approx(1e-6 / 3).epsilon(1e-3));
  const MultiplierSymbol sat = MultiplierSymbol::saturating();
  const double far = integral_test(sat, 1e6);
  CHECK(integral_test(sat, 1e7) - far <= 2e-6);
  // Brute-force midpoint sum on [0, 1e6] after t = tan(u).
  double brute = 0.0;
  const int n = 200000;
  const double umax = std::atan(1e6);
  for (int i = 0; i < n; ++i) {
    const double t = std::tan((i + 0.5) * umax / n);
    brute += t / (1 + t) * umax / n;
  }
  CHECK(far == doctest::Approx(brute).epsilon(1e-6));
}

TEST_CASE("scaling inequality") {
  const ScalingCheck eq = scaling_inequality_check(MultiplierSymbol::halfheat(), 1.0, 1, 7);
  CHECK(eq.holds);
  CHECK(eq.lhs == doctest::Approx(eq.rhs).epsilon(1e-12));
  CHECK(scaling_inequality_check(MultiplierSymbol::halfheat(), 0.5, 2, 4).holds);
  CHECK(scaling_inequality_check(MultiplierSymbol::loglog(1.0, 0.5), 2.0, 1, 10).holds);
  CHECK_THROWS_AS(scaling_inequality_check(MultiplierSymbol::halfheat(), 0.4, 2, 4), InvalidArgument);
}

TEST_CASE("critical point and ratio bounds") {
  const CriticalPointCheck c = tk_bound_check(1, 1000);
  CHECK(c.holds);
  CHECK(c.bound == doctest::Approx(2000.0 * std::log(std::exp(1.0) + 1000.0)).epsilon(1e-12));
  CHECK(c.t_k == doctest::Approx(c.t_k_closed_form).epsilon(1e-5));
  CHECK(tk_bound_check(1, 100000).holds);
  CHECK(tk_bound_check(2, 10000).holds);
  CHECK(ratio_lower_bound_check(1, 1000).holds);
  CHECK(ratio_lower_bound_check(1, 10000).holds);
  CHECK(ratio_lower_bound_check(2, 1000).holds);
  CHECK_THROWS_AS(tk_bound_check(1, 10), InvalidArgument);
}
