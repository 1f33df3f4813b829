#pragma once

#include "thickstab/support_mask.hpp"

#include <vector>

namespace thickstab::detail {

// Normalized mask spectrum (1/N^n) sum_x m(x) e^{-i xi.x}; the unitary matrix
// of multiplication by m has entry (a, b) = spectrum[k_a - k_b].
class MaskSpectrum {
 public:
  explicit MaskSpectrum(const SupportMask& mask);
  Complex entry(Eigen::Index row_site, Eigen::Index col_site) const;

 private:
  Grid grid_;
  ComplexArray spectrum_;
};

// Dense block of the multiplication operator for the given row/column sites.
Eigen::MatrixXcd mask_block(const MaskSpectrum& ms, const std::vector<Eigen::Index>& rows,
                            const std::vector<Eigen::Index>& cols);

}  // namespace thickstab::detail
