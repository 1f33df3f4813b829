#include "thickstab/spectral.hpp"

#include "thickstab/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace thickstab {

RealArray symbol_on_lattice(const Grid& grid, const MultiplierSymbol& F) {
  const RealArray& r = grid.radii();
  RealArray out(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    out(i) = F(r(i));
    if (!std::isfinite(out(i)))
      throw NumericalFailure("symbol " + F.name() + " is not finite at |xi| = " + std::to_string(r(i)));
  }
  return out;
}

RealArray semigroup_multiplier(const Grid& grid, const MultiplierSymbol& F, double t) {
  if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("semigroup time must be finite and >= 0");
  if (t == 0.0) return RealArray::Ones(grid.size());
  return (-t * symbol_on_lattice(grid, F)).exp();
}

RealArray ball_indicator(const Grid& grid, double R) {
  if (!(R > 0.0)) throw InvalidArgument("ball radius must be positive");
  const double cut = R * (1.0 + 1e-12);
  return (grid.radii() <= cut).cast<double>();
}

SpectralField apply_multiplier(const SpectralField& f, const RealArray& multiplier) {
  if (multiplier.size() != f.size()) throw InvalidArgument("multiplier size does not match field");
  ComplexArray c = f.values();
  detail::fft_in_place(f.grid(), c, -1);
  c *= multiplier.cast<Complex>();
  detail::fft_in_place(f.grid(), c, +1);
  c /= double(f.size());
  return SpectralField(f.grid(), std::move(c));
}

SpectralField apply_semigroup(const SpectralField& f, const MultiplierSymbol& F, double t) {
  if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("semigroup time must be finite and >= 0");
  if (t == 0.0) return f;
  return apply_multiplier(f, semigroup_multiplier(f.grid(), F, t));
}

SpectralField project_ball(const SpectralField& f, double R) {
  return apply_multiplier(f, ball_indicator(f.grid(), R));
}

double restricted_norm_squared(const SpectralField& f, const SupportMask& omega) {
  require_same_grid(f.grid(), omega.grid(), "restricted_norm");
  return (omega.fraction() * f.values().abs2()).sum() * f.grid().cell_measure();
}

double restricted_norm(const SpectralField& f, const SupportMask& omega) {
  return std::sqrt(restricted_norm_squared(f, omega));
}

double lattice_inf(const Grid& grid, const MultiplierSymbol& F) {
  return symbol_on_lattice(grid, F).minCoeff();
}

namespace {

double dot(const Point& a, const Point& b, int dim) {
  return dim == 1 ? a(0) * b(0) : a.dot(b);
}

double radius(const Point& a, int dim) { return dim == 1 ? std::abs(a(0)) : a.norm(); }

}  // namespace

std::string probe_admissibility(const GaussianProbe& p, const Grid& grid) {
  std::ostringstream why;
  const int n = grid.dim();
  if (!(p.width > 0.0) || !std::isfinite(p.width)) {
    why << "probe width must be positive";
  } else if (!p.center.head(n).allFinite() || !p.modulation.head(n).allFinite()) {
    why << "probe center and modulation must be finite";
  } else if (kProbeSpatialMargin * p.width > grid.extent() / 2.0) {
    why << "probe width " << p.width << " too large for extent " << grid.extent()
        << " (need " << kProbeSpatialMargin << " l <= extent/2)";
  } else if (radius(p.modulation, n) + kProbeSpectralMargin / p.width > grid.nyquist_radius()) {
    why << "probe |xi0| + " << kProbeSpectralMargin << "/l = "
        << radius(p.modulation, n) + kProbeSpectralMargin / p.width << " exceeds Nyquist radius "
        << grid.nyquist_radius();
  }
  return why.str();
}

SpectralField sample_probe(const GaussianProbe& p, const Grid& grid) {
  if (const std::string why = probe_admissibility(p, grid); !why.empty()) throw InvalidArgument(why);
  const int n = grid.dim();
  const double ell = grid.extent();
  const double amp = std::pow(p.width, -n);
  const double inv2l2 = 1.0 / (2.0 * p.width * p.width);
  ComplexArray v(grid.size());
  const int images1 = n == 2 ? 1 : 0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Point x = grid.coordinate_at(i);
    Complex acc = 0.0;
    for (int m0 = -1; m0 <= 1; ++m0)
      for (int m1 = -images1; m1 <= images1; ++m1) {
        const Point y = x + Point(m0 * ell, m1 * ell);
        const Point d = y - p.center;
        const double phase = dot(y, p.modulation, n);
        const double env = amp * std::exp(-dot(d, d, n) * inv2l2);
        acc += env * Complex(std::cos(phase), std::sin(phase));
      }
    v(i) = acc;
  }
  return SpectralField(grid, std::move(v));
}

Complex probe_transform(const GaussianProbe& p, const Point& xi, int dim) {
  const Point d = xi - p.modulation;
  const double mag = std::pow(2.0 * std::numbers::pi, dim / 2.0) *
                     std::exp(-p.width * p.width * dot(d, d, dim) / 2.0);
  const double phase = -dot(p.center, d, dim);
  return mag * Complex(std::cos(phase), std::sin(phase));
}

double probe_norm_squared(double width, int dim) {
  return std::pow(std::numbers::pi / (width * width), dim / 2.0);
}

}  // namespace thickstab
