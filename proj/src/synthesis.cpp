#include "thickstab/observability.hpp"

#include "thickstab/errors.hpp"

#include <cmath>
#include <sstream>

namespace thickstab {

namespace {

// int_0^dt e^{-u d} du, stable as d dt -> 0.
double slice_integral(double d, double dt) {
  const double x = d * dt;
  return x == 0.0 ? dt : dt * (-std::expm1(-x) / x);
}

class ControlGramian {
 public:
  ControlGramian(const Grid& grid, const RealArray& D, const SupportMask& mask, double T, int slices)
      : grid_(grid), mask_(mask.fraction().cast<Complex>()), dt_(T / slices) {
    for (int j = 0; j < slices; ++j) {
      const double tail = T - (j + 1) * dt_;
      RealArray phi(D.size());
      for (Eigen::Index i = 0; i < D.size(); ++i) phi(i) = std::exp(-tail * D(i)) * slice_integral(D(i), dt_);
      phi_.push_back(std::move(phi));
    }
  }

  double dt() const { return dt_; }
  const RealArray& phi(int j) const { return phi_[std::size_t(j)]; }
  int slices() const { return int(phi_.size()); }

  // Multiplication by the mask, in transform coordinates.
  ComplexArray apply_mask(const ComplexArray& c) const {
    ComplexArray v = c;
    detail::fft_in_place(grid_, v, +1);
    v *= mask_;
    detail::fft_in_place(grid_, v, -1);
    return v / double(grid_.size());
  }

  // (I + kappa/dt sum_j Phi_j m Phi_j) r
  ComplexArray apply(const ComplexArray& r, double kappa) const {
    ComplexArray out = r;
    for (const auto& phi : phi_) out += (kappa / dt_) * phi.cast<Complex>() * apply_mask(phi.cast<Complex>() * r);
    return out;
  }

 private:
  Grid grid_;
  ComplexArray mask_;
  double dt_;
  std::vector<RealArray> phi_;
};

ComplexArray solve(const ControlGramian& G, const ComplexArray& b, ComplexArray x, double kappa, double tol,
                   int max_iter, int& iterations) {
  ComplexArray r = b - G.apply(x, kappa);
  ComplexArray p = r;
  double rr = r.abs2().sum();
  const double target = tol * tol * b.abs2().sum();
  int it = 0;
  for (; it < max_iter && rr > target; ++it) {
    const ComplexArray Gp = G.apply(p, kappa);
    const double alpha = rr / (p.conjugate() * Gp).sum().real();
    x += alpha * p;
    r -= alpha * Gp;
    const double rr_next = r.abs2().sum();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  iterations += it;
  if (rr > target) {
    std::ostringstream os;
    os << "synthesize_control: CG did not converge in " << max_iter << " iterations (relative residual "
       << std::sqrt(rr / b.abs2().sum()) << ")";
    throw NumericalFailure(os.str());
  }
  return x;
}

}  // namespace

ControlSynthesis synthesize_control(const SpectralField& f0, const MultiplierSymbol& F, const SupportMask& mask,
                                    double T, double epsilon, const SynthesisOptions& options) {
  require_same_grid(f0.grid(), mask.grid(), "synthesize_control");
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw InvalidArgument("synthesize_control: epsilon must lie in (0, 1)");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("synthesize_control: T must be positive");
  if (options.slices < 1) throw InvalidArgument("synthesize_control: slices must be >= 1");
  if (options.penalty_ladder.empty()) throw InvalidArgument("synthesize_control: empty penalty ladder");
  const Grid& grid = f0.grid();
  const RealArray D = symbol_on_lattice(grid, F);
  const ControlGramian G(grid, D, mask, T, options.slices);

  const ComplexArray f0_hat = transform(f0);
  const ComplexArray free_hat = (-T * D).exp().cast<Complex>() * f0_hat;
  const double f0_norm = std::sqrt(coefficient_norm_squared(grid, f0_hat));
  const double free_norm = std::sqrt(coefficient_norm_squared(grid, free_hat));

  ControlSynthesis out{{}, {}, SpectralField::zeros(grid), 0.0, 0.0, 0.0, 0, false, 0.0};
  for (int j = 0; j <= options.slices; ++j) out.slice_edges.push_back(T * j / options.slices);
  double map_norm2 = 0.0;
  for (int j = 0; j < G.slices(); ++j) map_norm2 += G.phi(j).square().maxCoeff() / G.dt();
  out.cost_lower_bound = std::pow(std::max(0.0, free_norm - epsilon * f0_norm), 2) / map_norm2;

  if (f0_norm == 0.0) {
    for (int j = 0; j < options.slices; ++j) out.controls.push_back(SpectralField::zeros(grid));
    out.reached = true;
    out.penalty = options.penalty_ladder.front();
    return out;
  }

  const RealArray support = (mask.fraction() > 0.0).cast<double>();
  ComplexArray r = free_hat;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (double K : options.penalty_ladder) {
    if (!(K > 0.0)) throw InvalidArgument("synthesize_control: penalties must be positive");
    const double kappa = K / epsilon;
    r = solve(G, free_hat, r, kappa, options.solver_tolerance, options.max_cg_iterations, out.cg_iterations);

    std::vector<SpectralField> controls;
    ComplexArray final_hat = free_hat;
    double cost = 0.0;
    for (int j = 0; j < G.slices(); ++j) {
      const ComplexArray h_hat = (-kappa / G.dt()) * G.phi(j).cast<Complex>() * r;
      SpectralField h = inverse_transform(grid, h_hat);
      h = SpectralField(grid, h.values() * support.cast<Complex>());
      cost += G.dt() * restricted_norm_squared(h, mask);
      final_hat += G.phi(j).cast<Complex>() * G.apply_mask(transform(h));
      controls.push_back(std::move(h));
    }
    const double ratio = std::sqrt(coefficient_norm_squared(grid, final_hat)) / f0_norm;
    best_ratio = std::min(best_ratio, ratio);
    out.controls = std::move(controls);
    out.final_state = inverse_transform(grid, final_hat);
    out.cost = cost;
    out.achieved_ratio = ratio;
    out.penalty = K;
    if (ratio <= epsilon) {
      out.reached = true;
      break;
    }
  }
  return out;
}

}  // namespace thickstab
