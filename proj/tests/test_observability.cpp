#include <doctest.h>

#include "thickstab/errors.hpp"
#include "thickstab/observability.hpp"
#include "thickstab/thick_sets.hpp"

#include <cmath>
#include <random>

using namespace thickstab;

namespace {

GaussianProbe centered(const Grid& g, double width) {
  GaussianProbe p;
  p.center = Point(g.extent() / 2, g.dim() == 2 ? g.extent() / 2 : 0.0);
  p.width = width;
  return p;
}

SpectralField random_band(const Grid& g, double R, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  const RealArray ball = ball_indicator(g, R);
  ComplexArray c(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) c(i) = ball(i) * Complex(n(rng), n(rng));
  return inverse_transform(g, c);
}

}  // namespace

TEST_CASE("observability on trivial masks") {
  const Grid g = make_grid(1, 32.0, 256);
  const std::vector<GaussianProbe> probes = {centered(g, 1.0)};
  const ObservabilityReport full =
      estimate_observability_constant(MultiplierSymbol::constant(0.0), make_full_mask(g), 2.0, 0.25, probes);
  CHECK(full.C_est == doctest::Approx(0.75 / 2.0).epsilon(1e-12));
  CHECK_FALSE(full.C_infinite);

  const ObservabilityReport empty =
      estimate_observability_constant(MultiplierSymbol::halfheat(), make_empty_mask(g), 1.0, 0.25, probes);
  CHECK(empty.C_infinite);
  CHECK(std::isinf(empty.C_est));

  CHECK_THROWS_AS(estimate_observability_constant(MultiplierSymbol::halfheat(), make_full_mask(g), 1.0, 1.0, probes),
                  InvalidArgument);
  CHECK_THROWS_AS(
      estimate_observability_constant(MultiplierSymbol::halfheat(), make_full_mask(g), 1.0, 0.5, probes, 16),
      InvalidArgument);
}

TEST_CASE("probe lhs matches the continuum integral") {
  const Grid g = make_grid(1, 64.0, 512);
  const MultiplierSymbol F = MultiplierSymbol::fractional(1.0);
  GaussianProbe p = centered(g, 1.3);
  p.modulation = Point(g.frequency(7), 0.0);
  const ObservabilityReport rep = estimate_observability_constant(F, make_full_mask(g), 0.8, 0.5, {p});
  // (1/2pi) int e^{-2T F} (2pi) e^{-l^2 (xi - xi0)^2} dxi, midpoint rule on [-40, 40].
  double ref = 0.0;
  const int n = 400000;
  const double a = -40.0, h = 80.0 / n;
  for (int i = 0; i < n; ++i) {
    const double xi = a + (i + 0.5) * h;
    const double d = xi - p.modulation(0);
    ref += std::exp(-2 * 0.8 * F(std::abs(xi)) - p.width * p.width * d * d) * h;
  }
  CHECK(rep.probes[0].lhs == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("estimates on a thick mask") {
  const Grid g = make_grid(1, 32.0, 256);
  const MultiplierSymbol F = MultiplierSymbol::fractional(1.0);
  const SupportMask mask = make_periodic_thick(g, 1.0, 0.5);
  const auto probes = random_probes(g, 32, 99, 0.5, 2.0);
  CHECK(probes.size() == 32);
  const ObservabilityReport a = estimate_observability_constant(F, mask, 1.0, 0.5, probes);
  const ObservabilityReport b = estimate_observability_constant(F, mask, 1.0, 0.5, random_probes(g, 32, 99, 0.5, 2.0));
  CHECK(std::isfinite(a.C_est));
  CHECK(a.C_est == b.C_est);
  for (const auto& r : a.probes) {
    CHECK(r.lhs >= 0.0);
    CHECK(r.obs_integral <= 1.0 * r.norm_squared * (1 + 1e-12));
  }

  const ObservabilityReport lower = estimate_observability_constant(F, mask, 1.0, 0.7, probes);
  CHECK(lower.C_est <= a.C_est);
  const ObservabilityReport bigger = estimate_observability_constant(F, make_full_mask(g), 1.0, 0.5, probes);
  CHECK(bigger.C_est <= a.C_est);

  // Step doubling once the step resolves the fastest decay, 2 max F over the probe spectra.
  std::vector<GaussianProbe> wide;
  for (const auto& p : random_probes(g, 8, 12, 2.0, 2.0)) wide.push_back({p.center, Point::Zero(), p.width});
  const MultiplierSymbol H = MultiplierSymbol::halfheat();
  const ObservabilityReport fine = estimate_observability_constant(H, mask, 1.0, 0.5, wide, 4096);
  const ObservabilityReport finer = estimate_observability_constant(H, mask, 1.0, 0.5, wide, 8192);
  for (std::size_t i = 0; i < wide.size(); ++i)
    CHECK(fine.probes[i].obs_integral == doctest::Approx(finer.probes[i].obs_integral).epsilon(1e-6));
}

TEST_CASE("shift identities for observability") {
  const Grid g = make_grid(1, 32.0, 256);
  const auto probes = random_probes(g, 8, 4, 0.5, 2.0);
  const ObservabilityReport rep = estimate_observability_constant(
      MultiplierSymbol::halfheat(), make_periodic_thick(g, 1.0, 0.5), 1.0, 0.5, probes);
  for (double mu : {-1.0, 0.0, 1.0}) {
    const ShiftIdentityCheck c = shift_observability_identity_check(rep, mu);
    CHECK(c.holds);
    CHECK(c.worst_lhs_error <= 1e-10);
    CHECK(c.worst_integrand_error <= 1e-10);
  }
  const ObservabilityReport up = estimate_observability_constant(
      MultiplierSymbol::shifted(MultiplierSymbol::halfheat(), 1.0), make_periodic_thick(g, 1.0, 0.5), 1.0, 0.5, probes);
  CHECK(up.probes[0].lhs == doctest::Approx(std::exp(2.0) * rep.probes[0].lhs).epsilon(1e-12));
}

TEST_CASE("necessity scan") {
  const Grid g = make_grid(1, 32.0, 256);
  const MultiplierSymbol F = MultiplierSymbol::fractional(1.0);
  std::vector<Point> centers;
  for (double x = 16.0; x <= 24.0; x += 1.0) centers.emplace_back(x, 0.0);

  const NecessityScan none = necessity_probe_scan(F, make_full_mask(g), 1.0, 0.1, 1e6, centers, 1.0);
  CHECK_FALSE(none.witness.has_value());

  const NecessityScan scan = necessity_probe_scan(F, make_half_box_mask(g), 1.0, 0.1, 10.0, centers, 1.0);
  CHECK(scan.witness.has_value());
  for (std::size_t i = 1; i < scan.curve.size(); ++i)
    CHECK(scan.curve[i].required_C > scan.curve[i - 1].required_C);
  CHECK(scan.curve.back().required_C >= 10.0 * scan.curve.front().required_C);

  CHECK_THROWS_AS(necessity_probe_scan(F, make_half_box_mask(g), 1.0, 1.0, 10.0, centers, 1.0), InvalidArgument);
  CHECK_THROWS_AS(necessity_probe_scan(MultiplierSymbol::constant(2.0), make_half_box_mask(g), 1.0, 0.5, 10.0, centers, 1.0),
                  InvalidArgument);
}

TEST_CASE("Kovrijkine fits") {
  const Grid g = make_grid(1, 16.0, 256);
  const KovrijkineFit full = kovrijkine_empirical(make_full_mask(g), {1.0, 2.0, 4.0});
  for (double c : full.C_emp) CHECK(c == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(full.slope) <= 1e-10);

  const KovrijkineFit sparse = kovrijkine_empirical(make_random_thick(g, 1.0, 0.3, 7), {2.0, 4.0, 8.0});
  const KovrijkineFit dense = kovrijkine_empirical(make_random_thick(g, 1.0, 0.6, 7), {2.0, 4.0, 8.0});
  CHECK(sparse.slope >= dense.slope);
  CHECK(sparse.bound_slope == doctest::Approx(10.0 * std::log(10.0 / 0.3)).epsilon(1e-12));

  CHECK_THROWS_AS(kovrijkine_empirical(make_half_box_mask(g), {1.0, 2.0}), InvalidArgument);
}

TEST_CASE("negative limit experiment") {
  const Grid g = make_grid(1, 64.0, 512);
  GaussianProbe p = centered(g, 1.0);
  const SpectralField psi = sample_probe(p, g);
  const MultiplierSymbol F = MultiplierSymbol::saturating();
  const auto curve = negative_limit_experiment(F, psi, p.center, 1.0, 1.0, {1.0, 0.5, 0.25}, 64);
  CHECK(curve.size() == 3);
  CHECK(std::isfinite(curve[0].implied_constant));

  const auto up = negative_limit_experiment(MultiplierSymbol::shifted(F, -0.5), psi, p.center, 1.0, 1.0,
                                            {1.0, 0.5, 0.25}, 64);
  for (std::size_t i = 0; i < curve.size(); ++i)
    for (std::size_t j = 0; j < curve[i].integrand.size(); ++j) {
      const double t = double(j) / 64.0;
      CHECK(up[i].integrand[j] == doctest::Approx(std::exp(-2.0 * 0.5 * t) * curve[i].integrand[j]).epsilon(1e-10));
    }

  CHECK_THROWS_AS(negative_limit_experiment(MultiplierSymbol::halfheat(), psi, p.center, 1.0, 1.0, {1.0, 0.5}),
                  InvalidArgument);
  CHECK_THROWS_AS(negative_limit_experiment(F, psi, p.center, 1.0, 1.0, {0.5, 1.0}), InvalidArgument);
}

TEST_CASE("cube classification") {
  const Grid g = make_grid(2, 16.0, 64);
  const MultiplierSymbol F = MultiplierSymbol::halfheat();

  const CubeReport smooth = classify_cubes(random_band(g, 0.5, 3), F, 1.0, 0.5, 4.0, 4);
  CHECK(smooth.cubes.size() == 16);
  CHECK(smooth.bad_mass == 0.0);
  for (const auto& c : smooth.cubes) CHECK(c.good);

  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const CubeReport rep = classify_cubes(random_band(g, 6.0, seed), F, 0.2, 0.25, 2.0, 6);
    CHECK(rep.bad_mass <= 0.25 * rep.g_norm_squared);
    double bad = 0.0;
    for (const auto& c : rep.cubes)
      if (!c.good) bad += c.local_mass;
    CHECK(bad == doctest::Approx(rep.bad_mass).epsilon(1e-12));
    CHECK(rep.tail_bound >= 0.0);
  }
  // A localized field: far cubes hold little mass and turn bad.
  const Grid wide = make_grid(2, 32.0, 64);
  ComplexArray v = random_band(wide, 4.0, 2).values();
  for (Eigen::Index i = 0; i < wide.size(); ++i)
    v(i) *= std::exp(-(wide.coordinate_at(i) - Point(16.0, 16.0)).squaredNorm() / 8.0);
  const CubeReport loc =
      classify_cubes(project_ball(SpectralField(wide, v), 6.0), MultiplierSymbol::fractional(1.0), 1.0, 0.25, 2.0, 6);
  int bad = 0;
  for (const auto& c : loc.cubes) bad += c.good ? 0 : 1;
  CHECK(bad > 0);
  CHECK(loc.bad_mass <= 0.25 * loc.g_norm_squared);

  CHECK_THROWS_AS(classify_cubes(random_band(g, 1.0, 1), MultiplierSymbol::saturating(), 1.0, 0.5, 4.0, 2),
                  NumericalFailure);
  CHECK_THROWS_AS(classify_cubes(random_band(g, 1.0, 1), F, 1.0, 0.5, 4.0, 9), InvalidArgument);
}

TEST_CASE("control synthesis") {
  const Grid g = make_grid(1, 16.0, 64);
  const SpectralField f0 = random_band(g, 3.0, 8);

  const ControlSynthesis zero =
      synthesize_control(SpectralField::zeros(g), MultiplierSymbol::halfheat(), make_full_mask(g), 1.0, 0.5);
  CHECK(zero.cost == 0.0);
  CHECK(zero.reached);

  const ControlSynthesis free =
      synthesize_control(f0, MultiplierSymbol::constant(0.0), make_full_mask(g), 1.0, 0.5);
  CHECK(free.reached);
  const double kappa = free.penalty / 0.5;
  const double per_mode = kappa * kappa / ((1 + kappa) * (1 + kappa));
  CHECK(free.cost == doctest::Approx(per_mode * l2_norm_squared(f0)).epsilon(1e-6));
  CHECK(free.achieved_ratio == doctest::Approx(1.0 / (1.0 + kappa)).epsilon(1e-6));
  CHECK(free.cost >= free.cost_lower_bound * (1 - 1e-12));

  const ControlSynthesis thick =
      synthesize_control(f0, MultiplierSymbol::fractional(1.0), make_periodic_thick(g, 1.0, 0.5), 1.0, 0.1);
  CHECK(thick.reached);
  CHECK(thick.achieved_ratio <= 0.1);
  CHECK(thick.cost >= thick.cost_lower_bound);
  CHECK(thick.controls.size() == 32);
}
