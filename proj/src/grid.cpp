#include "thickstab/grid.hpp"

#include "thickstab/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace thickstab {

namespace {

std::shared_ptr<const RealArray> build_radii(const Grid& g) {
  auto radii = std::make_shared<RealArray>(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) (*radii)(i) = g.frequency_at(i).norm();
  return radii;
}

}  // namespace

Grid::Grid(int dim, double extent, int points)
    : dim_(dim), extent_(extent), points_(points), size_(0) {
  if (dim != 1 && dim != 2)
    throw InvalidArgument("grid dim must be 1 or 2, got " + std::to_string(dim));
  if (!(extent > 0.0) || !std::isfinite(extent))
    throw InvalidArgument("grid extent must be positive and finite");
  if (points < 4 || points % 2 != 0)
    throw InvalidArgument("grid points must be even and >= 4, got " + std::to_string(points));
  size_ = dim == 1 ? points : Eigen::Index(points) * points;
  radii_ = build_radii(*this);
}

double Grid::cell_measure() const noexcept { return std::pow(dx(), dim_); }
double Grid::volume() const noexcept { return std::pow(extent_, dim_); }
double Grid::frequency_spacing() const noexcept { return 2.0 * std::numbers::pi / extent_; }
double Grid::nyquist_radius() const noexcept { return std::numbers::pi * points_ / extent_; }

std::array<int, 2> Grid::site(Eigen::Index flat) const noexcept {
  if (dim_ == 1) return {int(flat), 0};
  return {int(flat / points_), int(flat % points_)};
}

Eigen::Index Grid::flat_index(int i0, int i1) const noexcept {
  return dim_ == 1 ? Eigen::Index(i0) : Eigen::Index(i0) * points_ + i1;
}

Point Grid::frequency_at(Eigen::Index flat) const noexcept {
  const auto s = site(flat);
  return {frequency(mode(s[0])), dim_ == 2 ? frequency(mode(s[1])) : 0.0};
}

Point Grid::coordinate_at(Eigen::Index flat) const noexcept {
  const auto s = site(flat);
  return {coordinate(s[0]), dim_ == 2 ? coordinate(s[1]) : 0.0};
}

bool Grid::operator==(const Grid& other) const noexcept {
  return dim_ == other.dim_ && points_ == other.points_ && extent_ == other.extent_;
}

Grid make_grid(int dim, double extent, int points) { return Grid(dim, extent, points); }

SpectralField::SpectralField(Grid grid, ComplexArray values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InvalidArgument("field has " + std::to_string(values_.size()) +
                          " values, grid expects " + std::to_string(grid_.size()));
}

SpectralField SpectralField::zeros(const Grid& grid) {
  return SpectralField(grid, ComplexArray::Zero(grid.size()));
}

SpectralField SpectralField::from_real(const Grid& grid, const RealArray& values) {
  return SpectralField(grid, values.cast<Complex>());
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (a != b) throw InvalidArgument(std::string(what) + ": grid mismatch");
}

namespace detail {

void fft_in_place(const Grid& grid, ComplexArray& data, int sign) {
  thread_local Eigen::FFT<double> fft;
  thread_local std::vector<Complex> in, out;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  const int n = grid.points();
  in.resize(n);
  out.resize(n);
  auto line = [&](Eigen::Index offset, Eigen::Index stride) {
    for (int i = 0; i < n; ++i) in[i] = data(offset + i * stride);
    if (sign < 0)
      fft.fwd(out, in);
    else
      fft.inv(out, in);
    for (int i = 0; i < n; ++i) data(offset + i * stride) = out[i];
  };
  if (grid.dim() == 1) {
    line(0, 1);
    return;
  }
  for (int r = 0; r < n; ++r) line(Eigen::Index(r) * n, 1);
  for (int c = 0; c < n; ++c) line(c, n);
}

}  // namespace detail

ComplexArray transform(const SpectralField& f) {
  ComplexArray c = f.values();
  detail::fft_in_place(f.grid(), c, -1);
  c *= f.grid().cell_measure();
  return c;
}

SpectralField inverse_transform(const Grid& grid, const ComplexArray& coefficients) {
  if (coefficients.size() != grid.size())
    throw InvalidArgument("coefficient count does not match grid");
  ComplexArray v = coefficients;
  detail::fft_in_place(grid, v, +1);
  v /= grid.volume();
  return SpectralField(grid, std::move(v));
}

Complex transform_at(const SpectralField& f, const Point& xi) {
  const Grid& g = f.grid();
  Complex acc = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double phase = -g.coordinate_at(i).dot(xi);
    acc += f[i] * Complex(std::cos(phase), std::sin(phase));
  }
  return acc * g.cell_measure();
}

double l2_norm_squared(const SpectralField& f) {
  return f.values().abs2().sum() * f.grid().cell_measure();
}

double l2_norm(const SpectralField& f) { return std::sqrt(l2_norm_squared(f)); }

Complex inner_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f.grid(), g.grid(), "inner_product");
  return (f.values() * g.values().conjugate()).sum() * f.grid().cell_measure();
}

double coefficient_norm_squared(const Grid& grid, const ComplexArray& coefficients) {
  return coefficients.abs2().sum() / grid.volume();
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a.grid(), b.grid(), "field sum");
  return SpectralField(a.grid(), a.values() + b.values());
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a.grid(), b.grid(), "field difference");
  return SpectralField(a.grid(), a.values() - b.values());
}

SpectralField operator*(Complex s, const SpectralField& f) {
  return SpectralField(f.grid(), s * f.values());
}

}  // namespace thickstab
