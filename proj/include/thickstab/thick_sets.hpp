#pragma once

#include "thickstab/support_mask.hpp"

#include <cstdint>

namespace thickstab {

SupportMask make_full_mask(const Grid& grid);
SupportMask make_empty_mask(const Grid& grid);
// omega = {x : x_0 < extent/2}; empty on the upper half along axis 0.
SupportMask make_half_box_mask(const Grid& grid);
// Union of boxes [j p, j p + fill p)^dim.
SupportMask make_periodic_thick(const Grid& grid, double period, double fill);
// Complement of the closed ball B(center, radius); boundary cells sub-sampled 16^dim times.
SupportMask make_ball_complement(const Grid& grid, const Point& center, double radius);
// Random sub-cells in every L-block until each block holds gamma L^dim, then
// extra cells wherever a sliding window still falls short.
SupportMask make_random_thick(const Grid& grid, double L, double gamma, std::uint64_t seed);

struct ThicknessScan {
  double gamma_min;
  std::array<int, 2> worst_window;  // lower corner, in cells
};

ThicknessScan thickness_scan(const SupportMask& mask, double L, int stride = 1);
double thickness_certificate(const SupportMask& mask, double L, int stride = 1);

// Number of cells spanned by a length, or throws if it is not a whole number of cells.
int cells_for_length(const Grid& grid, double length, const char* what);

SupportMask cyclic_shift(const SupportMask& mask, int shift0, int shift1 = 0);
// Pointwise a >= b.
bool dominates(const SupportMask& a, const SupportMask& b);

}  // namespace thickstab
