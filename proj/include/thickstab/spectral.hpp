#pragma once

#include "thickstab/grid.hpp"
#include "thickstab/support_mask.hpp"
#include "thickstab/symbol.hpp"

#include <string>

namespace thickstab {

// g(x) = l^{-n} exp(i x.xi0 - |x - x0|^2 / (2 l^2)).
struct GaussianProbe {
  Point center = Point::Zero();
  Point modulation = Point::Zero();
  double width = 1.0;
};

// Multiplier e^{-t F(|xi|)} on the frequency lattice.
RealArray semigroup_multiplier(const Grid& grid, const MultiplierSymbol& F, double t);
// Indicator of the closed ball |xi| <= R on the frequency lattice.
RealArray ball_indicator(const Grid& grid, double R);
// F(|xi|) on the frequency lattice.
RealArray symbol_on_lattice(const Grid& grid, const MultiplierSymbol& F);

SpectralField apply_multiplier(const SpectralField& f, const RealArray& multiplier);
SpectralField apply_semigroup(const SpectralField& f, const MultiplierSymbol& F, double t);
SpectralField project_ball(const SpectralField& f, double R);
double restricted_norm(const SpectralField& f, const SupportMask& omega);
double restricted_norm_squared(const SpectralField& f, const SupportMask& omega);
// inf F over the frequency lattice of `grid`.
double lattice_inf(const Grid& grid, const MultiplierSymbol& F);

// Empty when admissible, else the reason.
std::string probe_admissibility(const GaussianProbe& p, const Grid& grid);
SpectralField sample_probe(const GaussianProbe& p, const Grid& grid);
// Closed forms on R^n.
Complex probe_transform(const GaussianProbe& p, const Point& xi, int dim);
double probe_norm_squared(double width, int dim);

// Multiples of the width kept between probe mass and the box / Nyquist edge.
inline constexpr double kProbeSpatialMargin = 6.0;
inline constexpr double kProbeSpectralMargin = 6.0;

}  // namespace thickstab
