#pragma once

#include <cmath>
#include <numbers>

#include "cleradii/errors.hpp"

namespace cleradii {

// Validated diffusion / loop-ensemble parameter, 8/3 < kappa < 8, together
// with the constants derived from it.
class Kappa {
 public:
  explicit Kappa(double kappa) : kappa_(kappa) {
    require(kappa > 8.0 / 3.0 && kappa < 8.0,
            "kappa must lie in the open interval (8/3, 8)");
  }

  double value() const { return kappa_; }

  // O(n)-model loop weight, n = -2 cos(4 pi / kappa) in (-2, 2].
  double loop_weight() const {
    return -2.0 * std::cos(4.0 * std::numbers::pi / kappa_);
  }

  // Dimension of the Bessel process matching the radial diffusion near a
  // singular level: d = (3 kappa - 8) / kappa, in (0, 2) on the valid range.
  double bessel_dimension() const { return (3.0 * kappa_ - 8.0) / kappa_; }

 private:
  double kappa_;
};

}  // namespace cleradii
