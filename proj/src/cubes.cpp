#include "thickstab/observability.hpp"

#include "thickstab/errors.hpp"
#include "thickstab/qa_sequences.hpp"
#include "thickstab/thick_sets.hpp"

#include <cmath>
#include <limits>

namespace thickstab {

namespace {

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

}  // namespace

CubeReport classify_cubes(const SpectralField& g, const MultiplierSymbol& F, double T, double epsilon, double L,
                          int beta_max) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw InvalidArgument("cubes: epsilon must lie in (0, 1)");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("cubes: T must be positive");
  if (beta_max < 0 || beta_max > 8) throw InvalidArgument("cubes: beta_max must lie in [0, 8]");
  const Grid& grid = g.grid();
  const int n = grid.dim();
  const int w = cells_for_length(grid, L, "cube side L");
  if (grid.points() % w != 0) throw InvalidArgument("cubes: L must divide the extent");

  // Bernstein moments of T'G with G = F - inf F and T' = T/2.
  const MultiplierSymbol G = MultiplierSymbol::shifted(F, F.inf_value());
  const MultiplierSymbol half = MultiplierSymbol::scaled(G, T / 2.0);
  CubeReport rep{L, epsilon, T, beta_max, {}, {}, l2_norm_squared(g), 0.0, 0.0, 0.0};
  for (int k = 0; k <= beta_max; ++k) {
    double lm;
    try {
      lm = log_moment(half, k).log_moment;
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(std::string("cubes: moment divergence, symbol outside the quasi-analytic regime: ") +
                             e.what());
    }
    rep.thresholds.push_back(std::pow(2.0, 2 * k + n) / epsilon * std::exp(2.0 * lm));
  }
  double covered = 0.0;
  for (int k = 0; k <= beta_max; ++k) covered += binomial(k + n - 1, k) / std::pow(2.0, 2 * k + n);
  rep.tail_bound = std::max(0.0, std::pow(2.0 / 3.0, n) - covered);

  const ComplexArray u_hat =
      (-T * (symbol_on_lattice(grid, F) - F.inf_value())).exp().cast<Complex>() * transform(g);

  const int cubes_per_axis = grid.points() / w;
  const int cubes1 = n == 2 ? cubes_per_axis : 1;
  const std::size_t cube_count = std::size_t(cubes_per_axis) * std::size_t(cubes1);
  auto cube_of = [&](Eigen::Index i) {
    const auto s = grid.site(i);
    return std::size_t(s[0] / w) * std::size_t(cubes1) + std::size_t(n == 2 ? s[1] / w : 0);
  };
  auto cube_masses = [&](const ComplexArray& coeffs) {
    const SpectralField field = inverse_transform(grid, coeffs);
    std::vector<double> mass(cube_count, 0.0);
    for (Eigen::Index i = 0; i < grid.size(); ++i) mass[cube_of(i)] += std::norm(field[i]);
    for (double& m : mass) m *= grid.cell_measure();
    return mass;
  };

  const std::vector<double> base = cube_masses(u_hat);
  rep.cubes.resize(cube_count);
  for (std::size_t c = 0; c < cube_count; ++c) {
    const int i0 = int(c / std::size_t(cubes1)), i1 = int(c % std::size_t(cubes1));
    rep.cubes[c] = {{i0, i1}, true, {0, 0}, 0.0, base[c]};
  }
  for (int b0 = 0; b0 <= beta_max; ++b0)
    for (int b1 = 0; b1 <= (n == 2 ? beta_max - b0 : 0); ++b1) {
      const int order = b0 + b1;
      if (order == 0) continue;
      ComplexArray d(grid.size());
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Point xi = grid.frequency_at(i);
        d(i) = std::pow(Complex(0.0, xi(0)), b0) * std::pow(Complex(0.0, xi(1)), b1) * u_hat(i);
      }
      const std::vector<double> mass = cube_masses(d);
      for (std::size_t c = 0; c < cube_count; ++c) {
        const double denom = rep.thresholds[std::size_t(order)] * base[c];
        const double ratio = denom > 0.0 ? mass[c] / denom
                                         : (mass[c] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        CubeLabel& lab = rep.cubes[c];
        if (ratio > lab.worst_ratio) {
          lab.worst_ratio = ratio;
          lab.worst_beta = {b0, b1};
        }
        if (ratio > 1.0) lab.good = false;
      }
    }
  double bad_cells = 0.0;
  for (const auto& c : rep.cubes)
    if (!c.good) {
      rep.bad_mass += c.local_mass;
      bad_cells += 1.0;
    }
  rep.bad_fraction = bad_cells / double(cube_count);
  return rep;
}

}  // namespace thickstab
