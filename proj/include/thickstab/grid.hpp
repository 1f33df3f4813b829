#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <memory>

namespace thickstab {

using Complex = std::complex<double>;
using ComplexArray = Eigen::ArrayXcd;
using RealArray = Eigen::ArrayXd;
using Point = Eigen::Vector2d;

// Periodic box [0, extent)^dim sampled with `points` sites per axis.
// Site (i0, i1) lives at flat index i0 * N + i1. Frequency arrays use the
// same layout with FFT ordering per axis.
class Grid {
 public:
  Grid(int dim, double extent, int points);

  int dim() const noexcept { return dim_; }
  double extent() const noexcept { return extent_; }
  int points() const noexcept { return points_; }
  Eigen::Index size() const noexcept { return size_; }

  double dx() const noexcept { return extent_ / points_; }
  double cell_measure() const noexcept;
  double volume() const noexcept;
  double frequency_spacing() const noexcept;
  double nyquist_radius() const noexcept;

  // Signed mode number k in {-N/2, ..., N/2-1} for an FFT index.
  int mode(int fft_index) const noexcept {
    return fft_index < points_ / 2 ? fft_index : fft_index - points_;
  }
  int fft_index(int mode) const noexcept {
    return mode >= 0 ? mode : mode + points_;
  }
  double frequency(int mode) const noexcept { return frequency_spacing() * mode; }
  double coordinate(int i) const noexcept { return dx() * i; }

  // |xi| at every frequency site.
  const RealArray& radii() const noexcept { return *radii_; }
  Point frequency_at(Eigen::Index flat) const noexcept;
  Point coordinate_at(Eigen::Index flat) const noexcept;
  std::array<int, 2> site(Eigen::Index flat) const noexcept;
  Eigen::Index flat_index(int i0, int i1 = 0) const noexcept;

  bool operator==(const Grid& other) const noexcept;
  bool operator!=(const Grid& other) const noexcept { return !(*this == other); }

 private:
  int dim_;
  double extent_;
  int points_;
  Eigen::Index size_;
  std::shared_ptr<const RealArray> radii_;
};

Grid make_grid(int dim, double extent, int points);

// Complex samples on a Grid, row-major. Immutable once built.
class SpectralField {
 public:
  SpectralField(Grid grid, ComplexArray values);

  static SpectralField zeros(const Grid& grid);
  static SpectralField from_real(const Grid& grid, const RealArray& values);

  const Grid& grid() const noexcept { return grid_; }
  const ComplexArray& values() const noexcept { return values_; }
  Complex operator[](Eigen::Index i) const { return values_(i); }
  Eigen::Index size() const noexcept { return values_.size(); }

 private:
  Grid grid_;
  ComplexArray values_;
};

void require_same_grid(const Grid& a, const Grid& b, const char* what);

// Discrete transform f^(xi) = dx^n sum_x f(x) e^{-i x.xi} on the frequency lattice.
ComplexArray transform(const SpectralField& f);
// Inverse of `transform`: f(x) = l^{-n} sum_xi f^(xi) e^{i x.xi}.
SpectralField inverse_transform(const Grid& grid, const ComplexArray& coefficients);
// Transform evaluated at an arbitrary frequency by direct summation.
Complex transform_at(const SpectralField& f, const Point& xi);

double l2_norm_squared(const SpectralField& f);
double l2_norm(const SpectralField& f);
Complex inner_product(const SpectralField& f, const SpectralField& g);
// (1/l^n) sum |f^|^2, the frequency-side Plancherel quadrature.
double coefficient_norm_squared(const Grid& grid, const ComplexArray& coefficients);

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(Complex s, const SpectralField& f);

namespace detail {
// Unnormalized in-place DFT over all axes; sign -1 forward, +1 backward.
void fft_in_place(const Grid& grid, ComplexArray& data, int sign);
}  // namespace detail

}  // namespace thickstab
