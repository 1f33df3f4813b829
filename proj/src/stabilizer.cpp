#include "thickstab/stabilizer.hpp"

#include "band.hpp"
#include "modal_propagator.hpp"
#include "numerics.hpp"
#include "thickstab/errors.hpp"
#include "thickstab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace thickstab {

double FeedbackConfig::decay_prefactor() const { return std::numbers::sqrt2 * C * std::exp(C * R); }

FeedbackConfig design_feedback(const MultiplierSymbol& F, double R, double C) {
  if (!(R > 0.0) || !std::isfinite(R)) throw InvalidArgument("design_feedback: R must be positive");
  if (!(C >= 1.0) || !std::isfinite(C)) throw InvalidArgument("design_feedback: C must be >= 1");
  FeedbackConfig cfg{};
  cfg.R = R;
  cfg.C = C;
  cfg.inf_F = F.inf_value();
  cfg.alpha_R = alpha_R(F, R);
  cfg.alpha_tilde = cfg.alpha_R - cfg.inf_F;
  if (!(cfg.alpha_tilde > 0.0)) {
    std::ostringstream os;
    os << "R below R_0: alpha_R - inf F = " << cfg.alpha_tilde << " <= 0 at R = " << R
       << "; the feedback needs inf_{r>=R} F(r) > inf F";
    throw InvalidArgument(os.str());
  }
  cfg.lambda = C * std::exp(C * R) * cfg.alpha_tilde;
  cfg.mu = 2.0 * C * C * std::exp(2.0 * C * R);
  cfg.predicted_rate = (cfg.alpha_R + cfg.inf_F) / 2.0;
  if (!std::isfinite(cfg.lambda) || !std::isfinite(cfg.mu))
    throw InvalidArgument("design_feedback: gains overflow for C R = " + std::to_string(C * R));
  return cfg;
}

FeedbackConfig with_gain(FeedbackConfig cfg, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("gain must be finite and >= 0");
  cfg.lambda = lambda;
  return cfg;
}

std::vector<Eigen::Index> band_indices(const Grid& grid, double R) {
  const RealArray ball = ball_indicator(grid, R);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    if (ball(i) != 0.0) idx.push_back(i);
  return idx;
}

Eigen::MatrixXcd band_gram_matrix(const SupportMask& mask, double R) {
  const auto band = band_indices(mask.grid(), R);
  return detail::mask_block(detail::MaskSpectrum(mask), band, band);
}

namespace {

void check_spectral_inputs(const SupportMask& mask, double R) {
  if (mask.is_empty()) throw InvalidArgument("spectral constant: mask is empty");
  if (!(R > 0.0) || R > mask.grid().nyquist_radius())
    throw InvalidArgument("spectral constant: R must lie in (0, Nyquist radius]");
}

// Applies the band Gram matrix through two transforms.
class BandOperator {
 public:
  BandOperator(const SupportMask& mask, double R)
      : grid_(mask.grid()), mask_(mask.fraction()), band_(band_indices(grid_, R)), work_(grid_.size()) {}

  Eigen::Index dim() const { return Eigen::Index(band_.size()); }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    work_.setZero();
    for (std::size_t i = 0; i < band_.size(); ++i) work_(band_[i]) = x(Eigen::Index(i));
    detail::fft_in_place(grid_, work_, +1);
    work_ *= mask_.cast<Complex>();
    detail::fft_in_place(grid_, work_, -1);
    Eigen::VectorXcd y(dim());
    for (std::size_t i = 0; i < band_.size(); ++i) y(Eigen::Index(i)) = work_(band_[i]) / double(grid_.size());
    return y;
  }

 private:
  Grid grid_;
  RealArray mask_;
  std::vector<Eigen::Index> band_;
  mutable ComplexArray work_;
};

Eigen::VectorXcd conjugate_gradient(const BandOperator& G, const Eigen::VectorXcd& b, double tol, int max_iter) {
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(b.size());
  Eigen::VectorXcd r = b, p = r;
  double rr = r.squaredNorm();
  const double target = tol * tol * b.squaredNorm();
  for (int it = 0; it < max_iter && rr > target; ++it) {
    const Eigen::VectorXcd Gp = G.apply(p);
    const double alpha = rr / p.dot(Gp).real();
    x += alpha * p;
    r -= alpha * Gp;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return x;
}

}  // namespace

SpectralConstant estimate_spectral_constant(const SupportMask& mask, double R, const SpectralConstantOptions& options) {
  check_spectral_inputs(mask, R);
  if (options.trials < 1 || options.iterations < 1) throw InvalidArgument("spectral constant: empty iteration budget");
  const BandOperator G(mask, R);
  const Eigen::Index n = G.dim();
  SpectralConstant best{0.0, std::numeric_limits<double>::infinity(), int(n), 0, 0.0};
  const Eigen::Index block = std::min<Eigen::Index>(n, 6);
  for (int trial = 0; trial < options.trials; ++trial) {
    std::mt19937_64 rng(options.seed + std::uint64_t(trial) * 0x9E3779B97F4A7C15ull);
    Eigen::MatrixXcd X(n, block);
    for (Eigen::Index j = 0; j < block; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        X(i, j) = Complex(detail::unit_uniform(rng()) - 0.5, detail::unit_uniform(rng()) - 0.5);
    double rho = std::numeric_limits<double>::infinity(), residual = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < options.iterations && !converged; ++it) {
      // Block inverse iteration with a Rayleigh-Ritz step on the new block.
      Eigen::MatrixXcd Y(n, block);
      for (Eigen::Index j = 0; j < block; ++j) Y.col(j) = conjugate_gradient(G, X.col(j), 1e-14, int(10 * n + 100));
      const Eigen::MatrixXcd Q = Eigen::HouseholderQR<Eigen::MatrixXcd>(Y).householderQ() *
                                 Eigen::MatrixXcd::Identity(n, block);
      Eigen::MatrixXcd GQ(n, block);
      for (Eigen::Index j = 0; j < block; ++j) GQ.col(j) = G.apply(Q.col(j));
      const Eigen::MatrixXcd H = Q.adjoint() * GQ;
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(0.5 * (H + H.adjoint()));
      X = Q * ritz.eigenvectors();
      const double next = ritz.eigenvalues()(0);
      residual = (GQ * ritz.eigenvectors().col(0) - next * X.col(0)).norm();
      converged = std::abs(next - rho) <= options.tolerance * std::abs(next) && residual <= 1e-6 * std::abs(next);
      rho = next;
    }
    if (!converged) {
      std::ostringstream os;
      os << "spectral constant: inverse iteration did not converge in " << options.iterations
         << " iterations (residual " << residual << ")";
      throw NumericalFailure(os.str());
    }
    if (!(rho > 0.0)) throw NumericalFailure("spectral constant: band operator is singular on omega");
    if (rho < best.smallest_eigenvalue) best = {1.0 / std::sqrt(rho), rho, int(n), it, residual};
  }
  return best;
}

SpectralConstant spectral_constant_dense(const SupportMask& mask, double R) {
  check_spectral_inputs(mask, R);
  const Eigen::MatrixXcd G = band_gram_matrix(mask, R);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(G, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalFailure("spectral constant: dense eigensolve failed");
  const double rho = eig.eigenvalues()(0);
  if (!(rho > 0.0)) throw NumericalFailure("spectral constant: band operator is singular on omega");
  return {1.0 / std::sqrt(rho), rho, int(G.rows()), 0, 0.0};
}

double lyapunov(const SpectralField& f, const FeedbackConfig& cfg) {
  const ComplexArray c = transform(f);
  const RealArray ball = ball_indicator(f.grid(), cfg.R);
  const double low = (ball * c.abs2()).sum() / f.grid().volume();
  const double high = ((1.0 - ball) * c.abs2()).sum() / f.grid().volume();
  return cfg.mu * low + high;
}

double max_splitting_step(const FeedbackConfig& cfg, double dt_cap) {
  const double by_gain = cfg.lambda > 0.0 ? 0.1 / cfg.lambda : std::numeric_limits<double>::infinity();
  return std::min(by_gain, dt_cap);
}

namespace {

// Strang splitting on physical samples.
class SplittingStepper {
 public:
  SplittingStepper(const Grid& grid, const RealArray& symbol_values, const SupportMask& mask,
                   const FeedbackConfig& cfg, double dt, FeedbackOrder order)
      : grid_(grid),
        mask_(mask.fraction().cast<Complex>()),
        ball_(ball_indicator(grid, cfg.R).cast<Complex>()),
        lambda_(cfg.lambda),
        dt_(dt),
        order_(order) {
    if (lambda_ == 0.0)
      full_ = (-dt * symbol_values).exp().cast<Complex>();
    else
      half_ = (-0.5 * dt * symbol_values).exp().cast<Complex>();
  }

  void step(ComplexArray& v) const {
    if (lambda_ == 0.0) {
      multiply(v, full_);
      return;
    }
    multiply(v, half_);
    apply_B(v, k1_);
    tmp_ = v - (0.5 * dt_) * k1_;
    apply_B(tmp_, k2_);
    tmp_ = v - (0.5 * dt_) * k2_;
    apply_B(tmp_, k3_);
    tmp_ = v - dt_ * k3_;
    apply_B(tmp_, k4_);
    v -= (dt_ / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    multiply(v, half_);
  }

 private:
  void multiply(ComplexArray& v, const ComplexArray& m) const {
    detail::fft_in_place(grid_, v, -1);
    v *= m;
    detail::fft_in_place(grid_, v, +1);
    v /= double(grid_.size());
  }

  void apply_B(const ComplexArray& v, ComplexArray& out) const {
    if (order_ == FeedbackOrder::MaskAfterProjection) {
      out = v;
      multiply(out, ball_);
      out *= lambda_ * mask_;
    } else {
      out = lambda_ * mask_ * v;
      multiply(out, ball_);
    }
  }

  Grid grid_;
  ComplexArray mask_, ball_, half_, full_;
  double lambda_, dt_;
  FeedbackOrder order_;
  mutable ComplexArray k1_, k2_, k3_, k4_, tmp_;
};

void check_step(double dt, const FeedbackConfig& cfg, double dt_cap) {
  const double dt_max = max_splitting_step(cfg, dt_cap);
  if (!(dt > 0.0) || !std::isfinite(dt) || dt > dt_max * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt = " << dt << " outside (0, dt_max = " << dt_max << "]";
    throw InvalidArgument(os.str());
  }
}

}  // namespace

SpectralField step_closed_loop(const SpectralField& f, const MultiplierSymbol& F, const SupportMask& mask,
                               const FeedbackConfig& cfg, double dt, double dt_cap, FeedbackOrder order) {
  require_same_grid(f.grid(), mask.grid(), "step_closed_loop");
  check_step(dt, cfg, dt_cap);
  if (cfg.lambda == 0.0) return apply_semigroup(f, F, dt);
  const SplittingStepper stepper(f.grid(), symbol_on_lattice(f.grid(), F), mask, cfg, dt, order);
  ComplexArray v = f.values();
  stepper.step(v);
  return SpectralField(f.grid(), std::move(v));
}

double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& norms, double window) {
  if (times.size() != norms.size() || times.size() < 2) throw InvalidArgument("rate fit needs matching arrays");
  if (!(window > 0.0) || window > 1.0) throw InvalidArgument("rate fit window must lie in (0, 1]");
  const double t0 = times.front(), t1 = times.back();
  const double start = t1 - window * (t1 - t0);
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < start - 1e-12 * std::abs(t1) || !(norms[i] > 0.0)) continue;
    const double y = std::log(norms[i]);
    n += 1;
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
  }
  if (n < 2) throw NumericalFailure("rate fit: fewer than two positive norms in the fit window");
  const double denom = n * stt - st * st;
  if (!(denom > 0.0)) throw NumericalFailure("rate fit: degenerate time window");
  return -(n * sty - st * sy) / denom;
}

StabilizationRun run_stabilization(const SpectralField& f0, const MultiplierSymbol& F, const SupportMask& mask,
                                   const FeedbackConfig& cfg, double T, double dt, const StabilizationOptions& options) {
  require_same_grid(f0.grid(), mask.grid(), "run_stabilization");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("run_stabilization: T must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("run_stabilization: dt must be positive");
  if (options.snapshot_stride < 0) throw InvalidArgument("run_stabilization: snapshot stride must be >= 0");
  const double steps_real = std::ceil(T / dt - 1e-9);
  if (steps_real > 2e9) throw InvalidArgument("run_stabilization: too many steps");
  const long steps = std::max(1L, long(steps_real));
  const double h = T / double(steps);

  const Grid& grid = f0.grid();
  const RealArray D = symbol_on_lattice(grid, F);
  const RealArray ball = ball_indicator(grid, cfg.R);
  const double unit = std::pow(grid.extent(), grid.dim() / 2.0);  // unitary scaling of f^

  std::optional<SplittingStepper> splitter;
  std::optional<detail::ModalPropagator> modal;
  if (options.integrator == Integrator::Splitting) {
    check_step(h, cfg, options.dt_cap);
    splitter.emplace(grid, D, mask, cfg, h, options.order);
  } else {
    if (options.order != FeedbackOrder::MaskAfterProjection)
      throw InvalidArgument("exact modal integrator supports only the 1_omega K_R feedback order");
    modal.emplace(mask, D, cfg.R, cfg.lambda, h);
  }

  StabilizationRun run{};
  run.dt = h;
  Trajectory& tr = run.trajectory;
  const auto reserve = std::size_t(steps) + 1;
  for (auto* v : {&tr.times, &tr.norms, &tr.lyapunov, &tr.low_norms, &tr.high_norms, &tr.control_energy})
    v->reserve(reserve);

  ComplexArray state = f0.values();  // physical samples (splitting) or unitary coefficients (modal)
  if (modal) state = transform(f0) / unit;
  ComplexArray work(grid.size());

  auto record = [&](long j) {
    double low2, high2, energy;
    if (modal) {
      low2 = modal->low_norm_squared(state);
      high2 = modal->high_norm_squared(state);
      energy = modal->masked_low_energy(state);
    } else {
      work = state;
      detail::fft_in_place(grid, work, -1);
      const RealArray p = work.abs2() * (grid.cell_measure() * grid.cell_measure() / (unit * unit));
      low2 = (ball * p).sum();
      high2 = ((1.0 - ball) * p).sum();
      work *= ball.cast<Complex>();
      detail::fft_in_place(grid, work, +1);
      work /= double(grid.size());
      energy = (mask.fraction() * work.abs2()).sum() * grid.cell_measure();
    }
    const double t = double(j) * h;
    tr.times.push_back(t);
    tr.low_norms.push_back(std::sqrt(low2));
    tr.high_norms.push_back(std::sqrt(high2));
    tr.norms.push_back(std::sqrt(low2 + high2));
    tr.lyapunov.push_back(cfg.mu * low2 + high2);
    tr.control_energy.push_back(cfg.lambda * cfg.lambda * energy);
    if (options.snapshot_stride > 0 && (j % options.snapshot_stride == 0 || j == steps)) {
      tr.snapshot_times.push_back(t);
      tr.snapshots.push_back(modal ? inverse_transform(grid, state * unit) : SpectralField(grid, state));
    }
  };

  record(0);
  for (long j = 1; j <= steps; ++j) {
    if (modal)
      modal->step(state);
    else
      splitter->step(state);
    if (!state.allFinite()) throw NumericalFailure("state became non-finite at step " + std::to_string(j));
    record(j);
  }

  run.fitted_rate = fit_decay_rate(tr.times, tr.norms, options.fit_window);
  run.lyapunov_checked = options.certified_constant.has_value() && cfg.C >= *options.certified_constant;
  run.lyapunov_monotone = true;
  run.worst_lyapunov_ratio = 0.0;
  run.worst_contraction = 0.0;
  const double contraction = std::exp(-cfg.alpha_tilde * h);
  for (std::size_t j = 0; j + 1 < tr.lyapunov.size(); ++j) {
    const double v0 = tr.lyapunov[j], v1 = tr.lyapunov[j + 1];
    if (v0 <= 0.0) continue;
    run.worst_lyapunov_ratio = std::max(run.worst_lyapunov_ratio, v1 / v0);
    run.worst_contraction = std::max(run.worst_contraction, v1 / (contraction * v0));
    if (v1 > v0 * (1.0 + 1e-8)) run.lyapunov_monotone = false;
  }
  return run;
}

double duhamel_residual(const Trajectory& trajectory, const MultiplierSymbol& F, const SupportMask& mask,
                        const FeedbackConfig& cfg, FeedbackOrder order) {
  const auto& snaps = trajectory.snapshots;
  const auto& times = trajectory.snapshot_times;
  if (snaps.size() < 2 || times.size() != snaps.size())
    throw InvalidArgument("duhamel_residual: needs at least two snapshots with times");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (!(times[j] > times[j - 1])) throw InvalidArgument("duhamel_residual: snapshot times must increase");
  const Grid& grid = snaps.front().grid();
  require_same_grid(grid, mask.grid(), "duhamel_residual");
  const RealArray D = symbol_on_lattice(grid, F);
  const RealArray ball = ball_indicator(grid, cfg.R);
  const double T = times.back();

  ComplexArray rhs = (-(T - times.front()) * D).exp().cast<Complex>() * transform(snaps.front());
  for (std::size_t j = 0; j < snaps.size(); ++j) {
    const double left = j > 0 ? times[j] - times[j - 1] : 0.0;
    const double right = j + 1 < snaps.size() ? times[j + 1] - times[j] : 0.0;
    const double w = 0.5 * (left + right);
    ComplexArray b;
    if (order == FeedbackOrder::MaskAfterProjection) {
      const SpectralField low = project_ball(snaps[j], cfg.R);
      b = transform(SpectralField(grid, cfg.lambda * mask.fraction().cast<Complex>() * low.values()));
    } else {
      b = ball.cast<Complex>() *
          transform(SpectralField(grid, cfg.lambda * mask.fraction().cast<Complex>() * snaps[j].values()));
    }
    rhs -= w * (-(T - times[j]) * D).exp().cast<Complex>() * b;
  }
  const ComplexArray target = transform(snaps.back());
  const double scale = std::sqrt(target.abs2().sum());
  if (!(scale > 0.0)) throw NumericalFailure("duhamel_residual: final state is zero");
  return std::sqrt((target - rhs).abs2().sum()) / scale;
}

}  // namespace thickstab
