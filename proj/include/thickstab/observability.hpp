#pragma once

#include "thickstab/spectral.hpp"
#include "thickstab/stabilizer.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace thickstab {

struct ProbeResult {
  int id;
  GaussianProbe probe;
  double norm_squared;   // |g|^2
  double lhs;            // |e^{-TF} g|^2
  double obs_integral;   // int_0^T |e^{-tF} g|^2_{L2(omega)} dt
  double required_C;     // max(0, (lhs - eps |g|^2) / obs_integral)
  bool infinite;         // obs_integral = 0 while lhs > eps |g|^2
  std::vector<double> integrand;  // |e^{-t_i F} g|^2_{L2(omega)} at t_i = i T / steps
};

struct ObservabilityReport {
  MultiplierSymbol symbol;
  SupportMask mask;
  double T;
  double epsilon;
  int quadrature_steps;
  std::vector<ProbeResult> probes;
  double C_est;
  bool C_infinite;
};

ObservabilityReport estimate_observability_constant(const MultiplierSymbol& F, const SupportMask& mask, double T,
                                                    double epsilon, const std::vector<GaussianProbe>& probes,
                                                    int quadrature_steps = 64);

// Seeded admissible probes: centers uniform in the box, widths in [min_width, max_width],
// modulations uniform in the admissible frequency disc.
std::vector<GaussianProbe> random_probes(const Grid& grid, int count, std::uint64_t seed, double min_width,
                                         double max_width);

struct ShiftIdentityCheck {
  bool holds;
  double worst_lhs_error;        // relative
  double worst_integrand_error;  // relative
};

// Recomputes the report for F - mu and compares against the exact scalings.
ShiftIdentityCheck shift_observability_identity_check(const ObservabilityReport& report, double mu,
                                                      double tolerance = 1e-10);

struct NecessityPoint {
  GaussianProbe probe;
  double lhs;
  double obs_integral;
  double required_C;
  bool infinite;
  bool violates;  // lhs > C obs_integral + eps |g|^2
};

struct NecessityScan {
  std::vector<NecessityPoint> curve;
  std::optional<std::size_t> witness;  // first violating point
  Point modulation;
};

NecessityScan necessity_probe_scan(const MultiplierSymbol& F, const SupportMask& mask, double T, double epsilon,
                                   double C, const std::vector<Point>& centers, double width,
                                   int quadrature_steps = 64);

struct KovrijkineFit {
  std::vector<double> R;
  std::vector<double> C_emp;
  double intercept;      // a in log C_emp = a + b R
  double slope;          // b
  double max_residual;
  double log_range;      // max log C_emp - min log C_emp
  bool nondecreasing;
  double bound_slope;    // C_n L log(C_n / gamma)
};

KovrijkineFit kovrijkine_empirical(const SupportMask& mask, const std::vector<double>& R_ladder, double C_n = 10.0,
                                   const SpectralConstantOptions& options = {});

struct NegativeLimitPoint {
  double h;
  double obs_integral;
  double implied_constant;  // |psi|^2 / obs_integral
  std::vector<double> integrand;
};

// Scaled observability integrals for omega_h = complement of B(center, r/h) and
// the symbol F(|xi|/h), over [0, T0].
std::vector<NegativeLimitPoint> negative_limit_experiment(const MultiplierSymbol& F, const SpectralField& psi,
                                                          const Point& center, double r, double T0,
                                                          const std::vector<double>& h_ladder,
                                                          int quadrature_steps = 256);

struct CubeLabel {
  std::array<int, 2> index;
  bool good;
  std::array<int, 2> worst_beta;
  double worst_ratio;  // max_beta |d^beta u|^2_Q / (threshold |u|^2_Q)
  double local_mass;   // |u|^2_Q
};

struct CubeReport {
  double L;
  double epsilon;
  double T;
  int beta_max;
  std::vector<CubeLabel> cubes;
  std::vector<double> thresholds;  // per |beta|
  double g_norm_squared;
  double bad_mass;
  double bad_fraction;  // measure fraction of bad cubes
  double tail_bound;    // sum_{k > beta_max} C(k+n-1, k) / 2^{2k+n}
};

CubeReport classify_cubes(const SpectralField& g, const MultiplierSymbol& F, double T, double epsilon, double L,
                          int beta_max);

struct SynthesisOptions {
  int slices = 32;
  double solver_tolerance = 1e-12;
  int max_cg_iterations = 20000;
  std::vector<double> penalty_ladder = {1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
};

struct ControlSynthesis {
  std::vector<double> slice_edges;      // M + 1 times
  std::vector<SpectralField> controls;  // h_j on omega, zero elsewhere
  SpectralField final_state;
  double cost;             // int_0^T |h|^2_{L2(omega)} dt
  double achieved_ratio;   // |f(T)| / |f0|
  double penalty;          // K of the accepted rung
  int cg_iterations;
  bool reached;
  double cost_lower_bound; // (|e^{-TF} f0| - eps |f0|)_+^2 / |control-to-state map|^2
};

ControlSynthesis synthesize_control(const SpectralField& f0, const MultiplierSymbol& F, const SupportMask& mask,
                                    double T, double epsilon, const SynthesisOptions& options = {});

}  // namespace thickstab
