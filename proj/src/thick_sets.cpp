#include "thickstab/thick_sets.hpp"

#include "numerics.hpp"
#include "thickstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace thickstab {

SupportMask::SupportMask(Grid grid, RealArray fraction, std::optional<ThicknessCertificate> certificate)
    : grid_(std::move(grid)), fraction_(std::move(fraction)), certificate_(certificate) {
  if (fraction_.size() != grid_.size()) throw InvalidArgument("mask size does not match grid");
  if (!fraction_.allFinite() || (fraction_ < 0.0).any() || (fraction_ > 1.0).any())
    throw InvalidArgument("mask fractions must lie in [0, 1]");
  if (certificate_ && (!(certificate_->gamma > 0.0) || certificate_->gamma > 1.0 || !(certificate_->scale > 0.0)))
    throw InvalidArgument("mask certificate needs gamma in (0, 1] and L > 0");
  total_measure_ = fraction_.sum() * grid_.cell_measure();
}

SupportMask make_full_mask(const Grid& grid) {
  return SupportMask(grid, RealArray::Ones(grid.size()), ThicknessCertificate{1.0, grid.extent()});
}

SupportMask make_empty_mask(const Grid& grid) { return SupportMask(grid, RealArray::Zero(grid.size())); }

SupportMask make_half_box_mask(const Grid& grid) {
  RealArray m(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) m(i) = grid.site(i)[0] < grid.points() / 2 ? 1.0 : 0.0;
  return SupportMask(grid, std::move(m));
}

int cells_for_length(const Grid& grid, double length, const char* what) {
  const double cells = length / grid.dx();
  const long rounded = std::lround(cells);
  if (!(length > 0.0) || std::abs(cells - double(rounded)) > 1e-9 * std::max(1.0, cells) || rounded < 1 ||
      rounded > grid.points())
    throw InvalidArgument(std::string(what) + " = " + std::to_string(length) +
                          " is not a whole number of cells (dx = " + std::to_string(grid.dx()) + ")");
  return int(rounded);
}

SupportMask make_periodic_thick(const Grid& grid, double period, double fill) {
  if (!(fill > 0.0) || fill > 1.0) throw InvalidArgument("periodic mask: fill must lie in (0, 1]");
  const int p = cells_for_length(grid, period, "period");
  if (grid.points() % p != 0) throw InvalidArgument("periodic mask: period must divide the extent");
  const double covered = fill * p;  // in cells
  if (covered < 1.0 - 1e-12) throw InvalidArgument("periodic mask: fill * period must span at least one cell");
  std::vector<double> line(grid.points());
  for (int i = 0; i < grid.points(); ++i) line[i] = std::clamp(covered - double(i % p), 0.0, 1.0);
  RealArray m(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto s = grid.site(i);
    m(i) = grid.dim() == 1 ? line[s[0]] : line[s[0]] * line[s[1]];
  }
  return SupportMask(grid, std::move(m), ThicknessCertificate{std::pow(fill, grid.dim()), period});
}

SupportMask make_ball_complement(const Grid& grid, const Point& center, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("ball complement: radius must be >= 0");
  const int n = grid.dim();
  for (int a = 0; a < n; ++a)
    if (center(a) - radius < 0.0 || center(a) + radius > grid.extent())
      throw InvalidArgument("ball complement: ball must fit inside the box");
  const double dx = grid.dx();
  const double half_diag = 0.5 * dx * std::sqrt(double(n));
  constexpr int sub = 16;
  RealArray m(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Point lo = grid.coordinate_at(i);
    Point mid = lo + Point::Constant(0.5 * dx);
    if (n == 1) mid(1) = 0.0;
    const double dist = n == 1 ? std::abs(mid(0) - center(0)) : (mid - center).norm();
    if (dist >= radius + half_diag) {
      m(i) = 1.0;
    } else if (dist <= radius - half_diag) {
      m(i) = 0.0;
    } else {
      int outside = 0;
      const int sub1 = n == 2 ? sub : 1;
      for (int a = 0; a < sub; ++a)
        for (int b = 0; b < sub1; ++b) {
          const double y0 = lo(0) + (a + 0.5) * dx / sub - center(0);
          const double y1 = n == 2 ? lo(1) + (b + 0.5) * dx / sub - center(1) : 0.0;
          if (y0 * y0 + y1 * y1 > radius * radius) ++outside;
        }
      m(i) = double(outside) / double(sub * sub1);
    }
  }
  return SupportMask(grid, std::move(m));
}

namespace {

// Sums of `v` over all cyclic windows of w cells (w x w in 2-D), indexed by lower corner.
RealArray window_sums(const Grid& grid, const RealArray& v, int w) {
  const int N = grid.points();
  auto slide = [&](const RealArray& in, bool along_rows) {
    RealArray out(in.size());
    const int lines = grid.dim() == 1 ? 1 : N;
    for (int l = 0; l < lines; ++l) {
      auto at = [&](int k) -> Eigen::Index {
        k %= N;
        if (grid.dim() == 1) return k;
        return along_rows ? Eigen::Index(l) * N + k : Eigen::Index(k) * N + l;
      };
      double s = 0.0;
      for (int k = 0; k < w; ++k) s += in(at(k));
      for (int start = 0; start < N; ++start) {
        out(at(start)) = s;
        s += in(at(start + w)) - in(at(start));
      }
    }
    return out;
  };
  RealArray sums = slide(v, true);
  if (grid.dim() == 2) sums = slide(sums, false);
  return sums;
}

}  // namespace

ThicknessScan thickness_scan(const SupportMask& mask, double L, int stride) {
  if (stride < 1) throw InvalidArgument("thickness: stride must be >= 1");
  const Grid& grid = mask.grid();
  if (L > grid.extent() * (1.0 + 1e-12)) throw InvalidArgument("thickness: L exceeds the extent");
  const int w = cells_for_length(grid, L, "thickness scale L");
  const RealArray sums = window_sums(grid, mask.fraction(), w);
  const double window_cells = std::pow(double(w), grid.dim());
  ThicknessScan best{std::numeric_limits<double>::infinity(), {0, 0}};
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto s = grid.site(i);
    if (s[0] % stride != 0 || s[1] % stride != 0) continue;
    const double g = sums(i) / window_cells;
    if (g < best.gamma_min) best = {g, s};
  }
  return best;
}

double thickness_certificate(const SupportMask& mask, double L, int stride) {
  return thickness_scan(mask, L, stride).gamma_min;
}

SupportMask make_random_thick(const Grid& grid, double L, double gamma, std::uint64_t seed) {
  if (!(gamma > 0.0) || gamma > 1.0) throw InvalidArgument("random thick mask: gamma must lie in (0, 1]");
  const int w = cells_for_length(grid, L, "L");
  if (grid.points() % w != 0) throw InvalidArgument("random thick mask: L must divide the extent");
  const int n = grid.dim();
  const int block_cells = n == 1 ? w : w * w;
  if (gamma * block_cells < 1.0 - 1e-9) throw InvalidArgument("random thick mask: gamma L^dim is below one cell measure");
  const int need = int(std::ceil(gamma * block_cells - 1e-9));
  std::mt19937_64 rng(seed);
  auto draw = [&](int bound) { return int(detail::unit_uniform(rng()) * bound); };

  RealArray m = RealArray::Zero(grid.size());
  const int blocks = grid.points() / w;
  const int blocks1 = n == 2 ? blocks : 1;
  std::vector<int> order(block_cells);
  for (int b0 = 0; b0 < blocks; ++b0)
    for (int b1 = 0; b1 < blocks1; ++b1) {
      std::iota(order.begin(), order.end(), 0);
      for (int k = 0; k < need; ++k) {
        std::swap(order[k], order[k + draw(block_cells - k)]);
        const int c = order[k];
        const int i0 = b0 * w + (n == 2 ? c / w : c);
        const int i1 = n == 2 ? b1 * w + c % w : 0;
        m(grid.flat_index(i0, i1)) = 1.0;
      }
    }

  // Block-wise selection leaves sliding windows that straddle blocks short.
  const int max_repairs = int(grid.size());
  for (int repair = 0; repair <= max_repairs; ++repair) {
    const ThicknessScan scan = thickness_scan(SupportMask(grid, m), L, 1);
    if (scan.gamma_min >= gamma - 1e-12) return SupportMask(grid, std::move(m), ThicknessCertificate{gamma, L});
    std::vector<Eigen::Index> empty;
    for (int a = 0; a < w; ++a)
      for (int b = 0; b < (n == 2 ? w : 1); ++b) {
        const int i0 = (scan.worst_window[0] + a) % grid.points();
        const int i1 = n == 2 ? (scan.worst_window[1] + b) % grid.points() : 0;
        const Eigen::Index idx = grid.flat_index(i0, i1);
        if (m(idx) == 0.0) empty.push_back(idx);
      }
    if (empty.empty()) break;
    m(empty[std::size_t(draw(int(empty.size())))]) = 1.0;
  }
  throw NumericalFailure("random thick mask: window repair did not converge");
}

SupportMask cyclic_shift(const SupportMask& mask, int shift0, int shift1) {
  const Grid& grid = mask.grid();
  const int N = grid.points();
  RealArray m(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto s = grid.site(i);
    const int t0 = ((s[0] + shift0) % N + N) % N;
    const int t1 = grid.dim() == 2 ? ((s[1] + shift1) % N + N) % N : 0;
    m(grid.flat_index(t0, t1)) = mask.fraction()(i);
  }
  return SupportMask(grid, std::move(m), mask.certificate());
}

bool dominates(const SupportMask& a, const SupportMask& b) {
  require_same_grid(a.grid(), b.grid(), "dominates");
  return (a.fraction() >= b.fraction()).all();
}

}  // namespace thickstab
