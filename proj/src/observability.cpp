#include "thickstab/observability.hpp"

#include "numerics.hpp"
#include "thickstab/errors.hpp"
#include "thickstab/parallel.hpp"
#include "thickstab/thick_sets.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace thickstab {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
}

void check_time(double T, int steps) {
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("T must be positive");
  if (steps < 32) throw InvalidArgument("quadrature steps must be >= 32");
}

double trapezoid(const std::vector<double>& y, double h) {
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * h;
}

// Samples |e^{-t_i A} g|^2 on omega at t_i = i T / steps.
std::vector<double> observed_integrand(const ComplexArray& g_hat, const RealArray& D, const SupportMask& mask,
                                       double T, int steps) {
  const Grid& grid = mask.grid();
  std::vector<double> y(std::size_t(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    const double t = T * i / steps;
    const ComplexArray c = (-t * D).exp().cast<Complex>() * g_hat;
    y[std::size_t(i)] = restricted_norm_squared(inverse_transform(grid, c), mask);
  }
  return y;
}

struct ProbeEvaluation {
  double norm_squared, lhs, obs_integral, required_C;
  bool infinite;
  std::vector<double> integrand;
};

ProbeEvaluation evaluate_probe(const GaussianProbe& p, const RealArray& D, const SupportMask& mask, double T,
                               double epsilon, int steps) {
  const Grid& grid = mask.grid();
  const ComplexArray g_hat = transform(sample_probe(p, grid));
  ProbeEvaluation e;
  e.norm_squared = coefficient_norm_squared(grid, g_hat);
  e.lhs = coefficient_norm_squared(grid, (-T * D).exp().cast<Complex>() * g_hat);
  e.integrand = observed_integrand(g_hat, D, mask, T, steps);
  e.obs_integral = trapezoid(e.integrand, T / steps);
  const double excess = e.lhs - epsilon * e.norm_squared;
  e.infinite = e.obs_integral <= 0.0 && excess > 0.0;
  if (e.infinite)
    e.required_C = std::numeric_limits<double>::infinity();
  else
    e.required_C = excess > 0.0 ? excess / e.obs_integral : 0.0;
  return e;
}

}  // namespace

ObservabilityReport estimate_observability_constant(const MultiplierSymbol& F, const SupportMask& mask, double T,
                                                    double epsilon, const std::vector<GaussianProbe>& probes,
                                                    int quadrature_steps) {
  check_epsilon(epsilon);
  check_time(T, quadrature_steps);
  if (probes.empty()) throw InvalidArgument("observability: probe list is empty");
  for (std::size_t i = 0; i < probes.size(); ++i)
    if (auto why = probe_admissibility(probes[i], mask.grid()); !why.empty())
      throw InvalidArgument("probe " + std::to_string(i) + ": " + why);
  const RealArray D = symbol_on_lattice(mask.grid(), F);
  std::vector<ProbeResult> rows(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    ProbeEvaluation e = evaluate_probe(probes[i], D, mask, T, epsilon, quadrature_steps);
    rows[i] = {int(i), probes[i], e.norm_squared, e.lhs, e.obs_integral, e.required_C, e.infinite,
               std::move(e.integrand)};
  });
  ObservabilityReport rep{F, mask, T, epsilon, quadrature_steps, std::move(rows), 0.0, false};
  for (const auto& r : rep.probes) {
    rep.C_est = std::max(rep.C_est, r.required_C);
    rep.C_infinite = rep.C_infinite || r.infinite;
  }
  return rep;
}

std::vector<GaussianProbe> random_probes(const Grid& grid, int count, std::uint64_t seed, double min_width,
                                         double max_width) {
  if (count < 1) throw InvalidArgument("probe count must be >= 1");
  if (!(min_width > 0.0) || !(max_width >= min_width)) throw InvalidArgument("probe widths must satisfy 0 < min <= max");
  std::mt19937_64 rng(seed);
  auto u = [&] { return detail::unit_uniform(rng()); };
  std::vector<GaussianProbe> out;
  for (int i = 0; i < count; ++i) {
    GaussianProbe p;
    p.width = min_width + (max_width - min_width) * u();
    const double rho = grid.nyquist_radius() - kProbeSpectralMargin / p.width;
    if (rho < 0.0) throw InvalidArgument("probe width too small for the grid's Nyquist radius");
    p.center = Point(grid.extent() * u(), grid.dim() == 2 ? grid.extent() * u() : 0.0);
    if (grid.dim() == 1) {
      p.modulation = Point(rho * (2.0 * u() - 1.0), 0.0);
    } else {
      do {
        p.modulation = Point(rho * (2.0 * u() - 1.0), rho * (2.0 * u() - 1.0));
      } while (p.modulation.norm() > rho);
    }
    if (auto why = probe_admissibility(p, grid); !why.empty()) throw InvalidArgument(why);
    out.push_back(p);
  }
  return out;
}

ShiftIdentityCheck shift_observability_identity_check(const ObservabilityReport& report, double mu,
                                                      double tolerance) {
  std::vector<GaussianProbe> probes;
  for (const auto& r : report.probes) probes.push_back(r.probe);
  const ObservabilityReport shifted =
      estimate_observability_constant(MultiplierSymbol::shifted(report.symbol, mu), report.mask, report.T,
                                      report.epsilon, probes, report.quadrature_steps);
  auto rel = [](double got, double want) {
    if (want == 0.0) return std::abs(got);
    return std::abs(got - want) / std::abs(want);
  };
  ShiftIdentityCheck out{true, 0.0, 0.0};
  const int steps = report.quadrature_steps;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto& a = report.probes[p];
    const auto& b = shifted.probes[p];
    out.worst_lhs_error = std::max(out.worst_lhs_error, rel(b.lhs, std::exp(2.0 * report.T * mu) * a.lhs));
    for (int i = 0; i <= steps; ++i) {
      const double t = report.T * i / steps;
      const std::size_t k = std::size_t(i);
      out.worst_integrand_error =
          std::max(out.worst_integrand_error, rel(b.integrand[k], std::exp(2.0 * t * mu) * a.integrand[k]));
    }
  }
  out.holds = out.worst_lhs_error <= tolerance && out.worst_integrand_error <= tolerance;
  return out;
}

NecessityScan necessity_probe_scan(const MultiplierSymbol& F, const SupportMask& mask, double T, double epsilon,
                                   double C, const std::vector<Point>& centers, double width, int quadrature_steps) {
  check_epsilon(epsilon);
  check_time(T, quadrature_steps);
  if (!(C > 0.0)) throw InvalidArgument("necessity scan: C must be positive");
  if (centers.empty()) throw InvalidArgument("necessity scan: empty center schedule");
  const Grid& grid = mask.grid();
  const RealArray D = symbol_on_lattice(grid, F);

  // The lattice frequency along axis 0 where e^{-2TF} is largest.
  int best_mode = 0;
  double best_value = std::numeric_limits<double>::infinity();
  const double reach = grid.nyquist_radius() - kProbeSpectralMargin / width;
  for (int k = -grid.points() / 2; k < grid.points() / 2; ++k) {
    const double xi = std::abs(grid.frequency(k));
    if (xi > reach) continue;
    const double v = F(xi);
    if (v < best_value || (v == best_value && std::abs(k) < std::abs(best_mode))) {
      best_value = v;
      best_mode = k;
    }
  }
  if (!(std::exp(-2.0 * T * best_value) > epsilon)) {
    std::ostringstream os;
    os << "necessity scan: no admissible xi0 with e^{-2TF(|xi0|)} > epsilon (best F = " << best_value
       << "); the argument needs inf F <= 0 with epsilon < e^{-2T inf F}";
    throw InvalidArgument(os.str());
  }
  NecessityScan scan;
  scan.modulation = Point(grid.frequency(best_mode), 0.0);
  scan.curve.resize(centers.size());
  parallel_for(centers.size(), [&](std::size_t i) {
    GaussianProbe p{centers[i], scan.modulation, width};
    if (auto why = probe_admissibility(p, grid); !why.empty())
      throw InvalidArgument("necessity scan center " + std::to_string(i) + ": " + why);
    const ProbeEvaluation e = evaluate_probe(p, D, mask, T, epsilon, quadrature_steps);
    scan.curve[i] = {p, e.lhs, e.obs_integral, e.required_C, e.infinite,
                     e.lhs > C * e.obs_integral + epsilon * e.norm_squared};
  });
  for (std::size_t i = 0; i < scan.curve.size(); ++i)
    if (scan.curve[i].violates) {
      scan.witness = i;
      break;
    }
  return scan;
}

KovrijkineFit kovrijkine_empirical(const SupportMask& mask, const std::vector<double>& R_ladder, double C_n,
                                   const SpectralConstantOptions& options) {
  if (!mask.certificate()) throw InvalidArgument("kovrijkine: mask carries no thickness certificate");
  if (R_ladder.size() < 2) throw InvalidArgument("kovrijkine: R ladder needs at least two values");
  if (!(C_n > 0.0)) throw InvalidArgument("kovrijkine: C_n must be positive");
  KovrijkineFit fit;
  fit.R = R_ladder;
  fit.C_emp.resize(R_ladder.size());
  parallel_for(R_ladder.size(), [&](std::size_t i) {
    fit.C_emp[i] = estimate_spectral_constant(mask, R_ladder[i], options).constant;
  });
  const std::size_t n = R_ladder.size();
  double sr = 0, sy = 0, srr = 0, sry = 0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
  fit.nondecreasing = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = std::log(fit.C_emp[i]);
    sr += R_ladder[i];
    sy += y;
    srr += R_ladder[i] * R_ladder[i];
    sry += R_ladder[i] * y;
    lo = std::min(lo, y);
    hi = std::max(hi, y);
    if (i > 0 && y < std::log(fit.C_emp[i - 1]) - 1e-12) fit.nondecreasing = false;
  }
  const double denom = double(n) * srr - sr * sr;
  if (!(denom > 0.0)) throw InvalidArgument("kovrijkine: R ladder needs distinct values");
  fit.slope = (double(n) * sry - sr * sy) / denom;
  fit.intercept = (sy - fit.slope * sr) / double(n);
  fit.max_residual = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    fit.max_residual =
        std::max(fit.max_residual, std::abs(std::log(fit.C_emp[i]) - fit.intercept - fit.slope * R_ladder[i]));
  fit.log_range = hi - lo;
  const auto& cert = *mask.certificate();
  fit.bound_slope = C_n * cert.scale * std::log(C_n / cert.gamma);
  return fit;
}

std::vector<NegativeLimitPoint> negative_limit_experiment(const MultiplierSymbol& F, const SpectralField& psi,
                                                          const Point& center, double r, double T0,
                                                          const std::vector<double>& h_ladder,
                                                          int quadrature_steps) {
  const auto sup = F.sup_value();
  if (!sup) throw InvalidArgument("negative-limit experiment: F must be bounded (sup F finite)");
  const auto limit = F.limit_at_infinity();
  if (!limit || !(*limit >= 0.0) || !std::isfinite(*limit))
    throw InvalidArgument("negative-limit experiment: F needs a finite non-negative limit at infinity");
  check_time(T0, quadrature_steps);
  if (!(r > 0.0)) throw InvalidArgument("negative-limit experiment: r must be positive");
  if (h_ladder.empty()) throw InvalidArgument("negative-limit experiment: empty h ladder");
  for (std::size_t i = 0; i < h_ladder.size(); ++i) {
    if (!(h_ladder[i] > 0.0)) throw InvalidArgument("negative-limit experiment: h values must be positive");
    if (i > 0 && !(h_ladder[i] < h_ladder[i - 1]))
      throw InvalidArgument("negative-limit experiment: h ladder must decrease");
  }
  const Grid& grid = psi.grid();
  const ComplexArray psi_hat = transform(psi);
  const double psi_norm2 = coefficient_norm_squared(grid, psi_hat);
  std::vector<NegativeLimitPoint> curve(h_ladder.size());
  parallel_for(h_ladder.size(), [&](std::size_t i) {
    const double h = h_ladder[i];
    const SupportMask omega = make_ball_complement(grid, center, r / h);
    const RealArray D = symbol_on_lattice(grid, MultiplierSymbol::dilated(F, h));
    std::vector<double> y = observed_integrand(psi_hat, D, omega, T0, quadrature_steps);
    const double integral = trapezoid(y, T0 / quadrature_steps);
    if (!(integral > 0.0)) throw NumericalFailure("negative-limit experiment: zero observation integral at h = " +
                                                  std::to_string(h));
    curve[i] = {h, integral, psi_norm2 / integral, std::move(y)};
  });
  return curve;
}

}  // namespace thickstab
