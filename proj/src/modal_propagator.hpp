#pragma once

#include "thickstab/stabilizer.hpp"

#include <vector>

namespace thickstab::detail {

// Exact one-step propagator of c' = -D c - lambda P_all 1_omega K_R c in
// unitary Fourier coordinates. The low block is closed, L = D_S + lambda W_SS
// is Hermitian and diagonalized once; high modes receive the exact Duhamel
// integral of the low-mode forcing.
class ModalPropagator {
 public:
  ModalPropagator(const SupportMask& mask, const RealArray& symbol_values, double R, double lambda, double dt);

  void step(ComplexArray& coefficients) const;
  double low_norm_squared(const ComplexArray& c) const;
  double high_norm_squared(const ComplexArray& c) const;
  // |K_R f|^2 on omega.
  double masked_low_energy(const ComplexArray& c) const;

 private:
  std::vector<Eigen::Index> low_, high_;
  Eigen::MatrixXcd V_;        // eigenvectors of L
  Eigen::ArrayXd low_decay_;  // e^{-Lambda dt}
  Eigen::ArrayXd high_decay_; // e^{-d_H dt}
  Eigen::MatrixXcd forcing_;  // lambda (W_HS V)_{jm} phi(d_j, Lambda_m, dt)
  Eigen::MatrixXcd w_low_;    // W_SS
};

}  // namespace thickstab::detail
