#include "modal_propagator.hpp"

#include "band.hpp"
#include "thickstab/errors.hpp"
#include "thickstab/spectral.hpp"

#include <cmath>

namespace thickstab::detail {

MaskSpectrum::MaskSpectrum(const SupportMask& mask) : grid_(mask.grid()) {
  spectrum_ = mask.fraction().cast<Complex>();
  fft_in_place(grid_, spectrum_, -1);
  spectrum_ /= double(grid_.size());
}

Complex MaskSpectrum::entry(Eigen::Index row_site, Eigen::Index col_site) const {
  const int N = grid_.points();
  const auto a = grid_.site(row_site);
  const auto b = grid_.site(col_site);
  const int d0 = ((a[0] - b[0]) % N + N) % N;
  const int d1 = grid_.dim() == 2 ? ((a[1] - b[1]) % N + N) % N : 0;
  return spectrum_(grid_.flat_index(d0, d1));
}

Eigen::MatrixXcd mask_block(const MaskSpectrum& ms, const std::vector<Eigen::Index>& rows,
                            const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXcd W(Eigen::Index(rows.size()), Eigen::Index(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) W(Eigen::Index(i), Eigen::Index(j)) = ms.entry(rows[i], cols[j]);
  return W;
}

namespace {

// (e^{-a dt} - e^{-d dt}) / (d - a), stable as d -> a.
double duhamel_weight(double d, double a, double dt) {
  const double x = (d - a) * dt;
  if (std::abs(x) > 1e-3) return (std::exp(-a * dt) - std::exp(-d * dt)) / (d - a);
  const double base = dt * std::exp(-a * dt);
  return x == 0.0 ? base : base * (-std::expm1(-x) / x);
}

}  // namespace

ModalPropagator::ModalPropagator(const SupportMask& mask, const RealArray& symbol_values, double R, double lambda,
                                 double dt) {
  const Grid& grid = mask.grid();
  low_ = band_indices(grid, R);
  const RealArray ball = ball_indicator(grid, R);
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    if (ball(i) == 0.0) high_.push_back(i);
  const double entries = double(low_.size()) * double(high_.size());
  if (entries > 4e7)
    throw InvalidArgument("exact modal integrator needs " + std::to_string(entries) +
                          " coupling entries; lower R or use the splitting integrator");

  const MaskSpectrum ms(mask);
  w_low_ = mask_block(ms, low_, low_);
  Eigen::MatrixXcd L = lambda * w_low_;
  for (std::size_t i = 0; i < low_.size(); ++i) L(Eigen::Index(i), Eigen::Index(i)) += symbol_values(low_[i]);
  L = (0.5 * (L + L.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(L);
  if (eig.info() != Eigen::Success) throw NumericalFailure("exact modal integrator: eigensolve failed");
  V_ = eig.eigenvectors();
  const Eigen::ArrayXd Lambda = eig.eigenvalues().array();
  low_decay_ = (-dt * Lambda).exp();

  high_decay_.resize(Eigen::Index(high_.size()));
  for (std::size_t j = 0; j < high_.size(); ++j) high_decay_(Eigen::Index(j)) = std::exp(-dt * symbol_values(high_[j]));

  forcing_ = mask_block(ms, high_, low_) * V_;
  for (Eigen::Index j = 0; j < forcing_.rows(); ++j) {
    const double d = symbol_values(high_[std::size_t(j)]);
    for (Eigen::Index m = 0; m < forcing_.cols(); ++m) forcing_(j, m) *= lambda * duhamel_weight(d, Lambda(m), dt);
  }
  if (!forcing_.allFinite()) throw NumericalFailure("exact modal integrator: non-finite coupling");
}

void ModalPropagator::step(ComplexArray& c) const {
  Eigen::VectorXcd cs(Eigen::Index(low_.size()));
  for (std::size_t i = 0; i < low_.size(); ++i) cs(Eigen::Index(i)) = c(low_[i]);
  const Eigen::VectorXcd a = V_.adjoint() * cs;
  const Eigen::VectorXcd cs_next = V_ * (low_decay_.cast<Complex>() * a.array()).matrix();
  const Eigen::VectorXcd drive = forcing_ * a;
  for (std::size_t j = 0; j < high_.size(); ++j)
    c(high_[j]) = high_decay_(Eigen::Index(j)) * c(high_[j]) - drive(Eigen::Index(j));
  for (std::size_t i = 0; i < low_.size(); ++i) c(low_[i]) = cs_next(Eigen::Index(i));
}

double ModalPropagator::low_norm_squared(const ComplexArray& c) const {
  double s = 0.0;
  for (Eigen::Index i : low_) s += std::norm(c(i));
  return s;
}

double ModalPropagator::high_norm_squared(const ComplexArray& c) const {
  double s = 0.0;
  for (Eigen::Index i : high_) s += std::norm(c(i));
  return s;
}

double ModalPropagator::masked_low_energy(const ComplexArray& c) const {
  Eigen::VectorXcd cs(Eigen::Index(low_.size()));
  for (std::size_t i = 0; i < low_.size(); ++i) cs(Eigen::Index(i)) = c(low_[i]);
  return std::max(0.0, (cs.adjoint() * w_low_ * cs)(0).real());
}

}  // namespace thickstab::detail
