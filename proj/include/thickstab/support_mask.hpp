#pragma once

#include "thickstab/grid.hpp"

#include <optional>

namespace thickstab {

struct ThicknessCertificate {
  double gamma;
  double scale;  // L
};

// Control set as a per-cell fraction of each cell's measure in [0, 1].
class SupportMask {
 public:
  SupportMask(Grid grid, RealArray fraction, std::optional<ThicknessCertificate> certificate = {});

  const Grid& grid() const noexcept { return grid_; }
  const RealArray& fraction() const noexcept { return fraction_; }
  double total_measure() const noexcept { return total_measure_; }
  const std::optional<ThicknessCertificate>& certificate() const noexcept { return certificate_; }

  bool is_full() const noexcept { return (fraction_ == 1.0).all(); }
  bool is_empty() const noexcept { return (fraction_ == 0.0).all(); }

 private:
  Grid grid_;
  RealArray fraction_;
  double total_measure_;
  std::optional<ThicknessCertificate> certificate_;
};

}  // namespace thickstab
