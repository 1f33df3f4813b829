#include <doctest.h>

#include "thickstab/errors.hpp"
#include "thickstab/spectral.hpp"
#include "thickstab/thick_sets.hpp"

#include <cmath>
#include <random>

using namespace thickstab;

namespace {

SpectralField random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexArray v(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) v(i) = Complex(n(rng), n(rng));
  return SpectralField(g, v);
}

SpectralField gaussian(const Grid& g, double center, double variance, double amplitude) {
  RealArray v(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double x = g.coordinate_at(i)(0) - center;
    v(i) = amplitude * std::exp(-x * x / (2.0 * variance));
  }
  return SpectralField::from_real(g, v);
}

double rel_error(const SpectralField& a, const SpectralField& b) { return l2_norm(a - b) / l2_norm(b); }

}  // namespace

TEST_CASE("grid geometry") {
  const Grid g = make_grid(1, 40.0, 256);
  CHECK(g.dx() == doctest::Approx(0.15625).epsilon(1e-15));
  CHECK(g.nyquist_radius() == doctest::Approx(M_PI * 256 / 40).epsilon(1e-12));
  CHECK(g.nyquist_radius() == doctest::Approx(20.106).epsilon(1e-4));

  const Grid g2 = make_grid(2, 2 * M_PI, 4);
  CHECK(g2.size() == 16);
  CHECK(g2.mode(0) == 0);
  CHECK(g2.mode(1) == 1);
  CHECK(g2.mode(2) == -2);
  CHECK(g2.mode(3) == -1);
  CHECK(g2.frequency_spacing() == doctest::Approx(1.0));

  CHECK_THROWS_AS(make_grid(3, 1.0, 8), InvalidArgument);
  CHECK_THROWS_AS(make_grid(1, -1.0, 8), InvalidArgument);
  CHECK_THROWS_AS(make_grid(1, 1.0, 7), InvalidArgument);
}

TEST_CASE("Plancherel and inverse transform") {
  std::mt19937_64 rng(3);
  for (int dim : {1, 2}) {
    const Grid g = make_grid(dim, 7.5, dim == 1 ? 128 : 32);
    for (int trial = 0; trial < 100; ++trial) {
      const SpectralField f = random_field(g, rng);
      const ComplexArray c = transform(f);
      CHECK(coefficient_norm_squared(g, c) == doctest::Approx(l2_norm_squared(f)).epsilon(1e-12));
      const SpectralField back = inverse_transform(g, c);
      CHECK(l2_norm(back - f) <= 1e-12 * l2_norm(f));
    }
  }
}

TEST_CASE("direct transform agrees with FFT on the lattice") {
  std::mt19937_64 rng(5);
  const Grid g = make_grid(2, 5.0, 16);
  const SpectralField f = random_field(g, rng);
  const ComplexArray c = transform(f);
  for (Eigen::Index i : {Eigen::Index(0), Eigen::Index(17), Eigen::Index(200)})
    CHECK(std::abs(transform_at(f, g.frequency_at(i)) - c(i)) <= 1e-10 * c.abs().maxCoeff());
}

TEST_CASE("heat semigroup matches the closed-form kernel") {
  const Grid g = make_grid(1, 40.0, 256);
  const SpectralField f0 = gaussian(g, 20.0, 1.0, 1.0);
  const SpectralField exact = gaussian(g, 20.0, 2.0, 1.0 / std::sqrt(2.0));
  const SpectralField out = apply_semigroup(f0, MultiplierSymbol::fractional(1.0), 0.5);
  CHECK(rel_error(out, exact) <= 1e-8);
}

TEST_CASE("semigroup identities") {
  std::mt19937_64 rng(11);
  const Grid g = make_grid(1, 10.0, 128);
  const MultiplierSymbol F = MultiplierSymbol::fractional(0.75);
  const SpectralField f = random_field(g, rng);
  const SpectralField h = random_field(g, rng);

  const SpectralField same = apply_semigroup(f, F, 0.0);
  CHECK((same.values() == f.values()).all());

  const SpectralField st = apply_semigroup(apply_semigroup(f, F, 0.3), F, 0.4);
  CHECK(rel_error(st, apply_semigroup(f, F, 0.7)) <= 1e-12);

  const SpectralField a = project_ball(apply_semigroup(f, F, 0.2), 3.0);
  const SpectralField b = apply_semigroup(project_ball(f, 3.0), F, 0.2);
  CHECK(l2_norm(a - b) <= 1e-14 * l2_norm(a));

  const Complex lhs = inner_product(apply_semigroup(f, F, 0.1), h);
  const Complex rhs = inner_product(f, apply_semigroup(h, F, 0.1));
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));

  const MultiplierSymbol Fs = MultiplierSymbol::shifted(F, 1.5);
  const double inf = lattice_inf(g, Fs);
  for (double t : {0.1, 0.5, 1.0, 2.0})
    CHECK(l2_norm(apply_semigroup(f, Fs, t)) <= std::exp(-t * inf) * l2_norm(f) * (1 + 1e-12));

  const SpectralField c = apply_semigroup(f, MultiplierSymbol::constant(2.0), 0.25);
  CHECK(rel_error(c, std::exp(-0.5) * f) <= 1e-14);

  CHECK_THROWS_AS(apply_semigroup(f, F, -1.0), InvalidArgument);
  CHECK_THROWS_AS(apply_semigroup(f, F, std::nan("")), InvalidArgument);
}

TEST_CASE("closed-ball projection") {
  const Grid g = make_grid(1, 2 * M_PI, 32);
  ComplexArray v(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) v(i) = std::polar(1.0, 3.0 * g.coordinate_at(i)(0));
  const SpectralField mode(g, v);
  CHECK(l2_norm(project_ball(mode, 3.0) - mode) <= 1e-12);
  CHECK(l2_norm(project_ball(mode, 2.5)) <= 1e-12);

  std::mt19937_64 rng(2);
  const SpectralField f = random_field(g, rng);
  const SpectralField p = project_ball(f, 5.0);
  CHECK(l2_norm(project_ball(p, 5.0) - p) <= 1e-14 * l2_norm(p));
}

TEST_CASE("restricted norm") {
  const Grid g = make_grid(1, 2 * M_PI, 64);
  const SpectralField one = SpectralField::from_real(g, RealArray::Ones(g.size()));
  CHECK(restricted_norm(one, make_full_mask(g)) == doctest::Approx(l2_norm(one)).epsilon(1e-14));
  CHECK(restricted_norm(one, make_empty_mask(g)) == 0.0);
  const SupportMask half = make_half_box_mask(g);
  CHECK(half.total_measure() == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(restricted_norm(one, half) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));
}

TEST_CASE("Gaussian probes reproduce the closed forms") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int dim : {1, 2}) {
    const Grid g = dim == 1 ? make_grid(1, 64.0, 512) : make_grid(2, 32.0, 128);
    int accepted = 0;
    while (accepted < 20) {
      GaussianProbe p;
      p.width = 0.7 + 1.3 * u(rng);
      p.center = Point(u(rng) * g.extent(), dim == 2 ? u(rng) * g.extent() : 0.0);
      p.modulation = Point(g.frequency(int(std::floor((u(rng) - 0.5) * 10))),
                           dim == 2 ? g.frequency(int(std::floor((u(rng) - 0.5) * 10))) : 0.0);
      if (!probe_admissibility(p, g).empty()) continue;
      ++accepted;
      const SpectralField s = sample_probe(p, g);
      const double norm2 = std::pow(M_PI / (p.width * p.width), dim / 2.0);
      CHECK(probe_norm_squared(p.width, dim) == doctest::Approx(norm2).epsilon(1e-15));
      CHECK(std::abs(l2_norm_squared(s) / norm2 - 1.0) <= 1e-6);
      const ComplexArray c = transform(s);
      double worst = 0.0;
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        const Complex exact = probe_transform(p, g.frequency_at(i), dim);
        if (std::abs(exact) > 1e-3) worst = std::max(worst, std::abs(c(i) - exact) / std::abs(exact));
      }
      CHECK(worst <= 1e-6);
      const Complex at0 = transform_at(s, p.modulation);
      CHECK(std::abs(std::abs(at0) / std::pow(2 * M_PI, dim / 2.0) - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("centered unmodulated probe is real and even") {
  const Grid g = make_grid(1, 32.0, 256);
  GaussianProbe p;
  p.center = Point(16.0, 0.0);
  p.width = 1.0;
  const SpectralField s = sample_probe(p, g);
  CHECK(s.values().imag().abs().maxCoeff() == 0.0);
  for (int i = 1; i < 128; ++i) CHECK(s[128 + i].real() == doctest::Approx(s[128 - i].real()).epsilon(1e-14));
}

TEST_CASE("probe admissibility rejects wide or fast probes") {
  const Grid g = make_grid(1, 16.0, 64);
  GaussianProbe p;
  p.center = Point(8.0, 0.0);
  p.width = 2.0;
  CHECK_FALSE(probe_admissibility(p, g).empty());
  p.width = 1.0;
  CHECK(probe_admissibility(p, g).empty());
  p.modulation = Point(g.nyquist_radius(), 0.0);
  CHECK_FALSE(probe_admissibility(p, g).empty());
  CHECK_THROWS_AS(sample_probe(p, g), InvalidArgument);
}
