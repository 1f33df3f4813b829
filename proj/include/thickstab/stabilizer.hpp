#pragma once

#include "thickstab/grid.hpp"
#include "thickstab/support_mask.hpp"
#include "thickstab/symbol.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace thickstab {

struct FeedbackConfig {
  double R;
  double C;
  double inf_F;
  double alpha_R;
  double alpha_tilde;  // alpha_R - inf_F
  double lambda;       // C e^{CR} alpha_tilde
  double mu;           // 2 C^2 e^{2CR}
  double predicted_rate;  // (alpha_R + inf_F) / 2

  double decay_prefactor() const;  // sqrt(2) C e^{CR}
};

FeedbackConfig design_feedback(const MultiplierSymbol& F, double R, double C);
// Same config with a different gain, for zero-gain and hand-tuned runs.
FeedbackConfig with_gain(FeedbackConfig cfg, double lambda);

struct SpectralConstantOptions {
  int trials = 4;
  int iterations = 500;
  std::uint64_t seed = 1;
  double tolerance = 1e-13;
};

struct SpectralConstant {
  double constant;            // 1 / sqrt(smallest eigenvalue)
  double smallest_eigenvalue;
  int band_dimension;
  int iterations;
  double residual;
};

// Flat indices of the closed frequency ball |xi| <= R.
std::vector<Eigen::Index> band_indices(const Grid& grid, double R);
// Gram matrix of 1_omega on the band, in unitary Fourier coordinates.
Eigen::MatrixXcd band_gram_matrix(const SupportMask& mask, double R);

// Inverse iteration on K_R 1_omega K_R with an inner CG solve.
SpectralConstant estimate_spectral_constant(const SupportMask& mask, double R,
                                            const SpectralConstantOptions& options = {});
// Dense eigensolve of band_gram_matrix.
SpectralConstant spectral_constant_dense(const SupportMask& mask, double R);

double lyapunov(const SpectralField& f, const FeedbackConfig& cfg);

enum class FeedbackOrder {
  MaskAfterProjection,  // 1_omega K_R
  ProjectionAfterMask,  // K_R 1_omega
};

enum class Integrator {
  Splitting,   // exact half-steps around RK4 on the feedback term
  ExactModal,  // closed low-mode block plus exact driven high modes
};

double max_splitting_step(const FeedbackConfig& cfg, double dt_cap = std::numeric_limits<double>::infinity());

SpectralField step_closed_loop(const SpectralField& f, const MultiplierSymbol& F, const SupportMask& mask,
                               const FeedbackConfig& cfg, double dt,
                               double dt_cap = std::numeric_limits<double>::infinity(),
                               FeedbackOrder order = FeedbackOrder::MaskAfterProjection);

struct Trajectory {
  std::vector<double> times;
  std::vector<double> norms;
  std::vector<double> lyapunov;
  std::vector<double> low_norms;
  std::vector<double> high_norms;
  // lambda^2 |K_R f|^2 on omega, the instantaneous feedback control energy.
  std::vector<double> control_energy;
  std::vector<double> snapshot_times;
  std::vector<SpectralField> snapshots;
};

struct StabilizationOptions {
  Integrator integrator = Integrator::Splitting;
  FeedbackOrder order = FeedbackOrder::MaskAfterProjection;
  int snapshot_stride = 0;  // 0 keeps no snapshots
  double fit_window = 0.5;  // trailing fraction of [0, T] used for the rate fit
  double dt_cap = std::numeric_limits<double>::infinity();
  // When cfg.C is at least this measured constant the Lyapunov checks are meaningful.
  std::optional<double> certified_constant;
};

struct StabilizationRun {
  Trajectory trajectory;
  double dt;  // step actually used, T / steps
  double fitted_rate;
  bool lyapunov_checked;
  bool lyapunov_monotone;       // V_{j+1} <= V_j (1 + 1e-8) throughout
  double worst_lyapunov_ratio;  // max V_{j+1} / V_j
  double worst_contraction;     // max V_{j+1} / (e^{-alpha_tilde dt} V_j)
};

StabilizationRun run_stabilization(const SpectralField& f0, const MultiplierSymbol& F, const SupportMask& mask,
                                   const FeedbackConfig& cfg, double T, double dt,
                                   const StabilizationOptions& options = {});

// Least-squares slope of -log norm over the trailing `window` fraction of the time span.
double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& norms, double window);

// Relative gap between the final snapshot and the Duhamel right-hand side
// e^{-TA} f(0) - int_0^T e^{-(T-t)A} B f(t) dt, trapezoid over snapshot times.
double duhamel_residual(const Trajectory& trajectory, const MultiplierSymbol& F, const SupportMask& mask,
                        const FeedbackConfig& cfg, FeedbackOrder order = FeedbackOrder::MaskAfterProjection);

}  // namespace thickstab
