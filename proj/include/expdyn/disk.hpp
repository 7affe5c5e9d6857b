#pragma once

#include <cmath>
#include <complex>

#include "expdyn/core.hpp"

namespace expdyn {

// Closed disk B(center, radius), the enclosure carrier for trap balls and
// cycle neighbourhoods.
template <class Real = double>
struct disk_t {
  std::complex<Real> center;
  Real radius = 0;

  bool contains(std::complex<Real> z) const {
    return std::abs(z - center) <= radius;
  }

  friend bool operator==(const disk_t&, const disk_t&) = default;
};

using disk = disk_t<double>;

// Factor applied to every propagated radius to absorb round-off. Far above
// double-precision error for <= 1e6 steps, but not a directed-rounding
// scheme: enclosures are sound up to this margin, not formally rigorous.
inline constexpr double disk_inflation = 1.0 + 0x1.0p-40;

// Exact image enclosure of a disk under f: for w in B(c, rho),
//   |f(w) - f(c)| = |f(c)||e^(w-c) - 1| <= |f(c)|(e^rho - 1),
// so B(f(c), |f(c)|(e^rho - 1)) contains the image; the returned radius is
// inflated by disk_inflation.
template <class Real>
disk_t<Real> propagate_disk(const exp_param<Real>& p, const disk_t<Real>& d,
                            Real x_escape = Real(default_x_escape)) {
  if (d.center.real() + d.radius > x_escape)
    throw escape_error(static_cast<double>(d.center.real() + d.radius));
  const std::complex<Real> c = p.lambda * std::exp(d.center);
  const Real r = std::abs(c) * std::expm1(d.radius) * Real(disk_inflation);
  return {c, r};
}

// Strict containment of the propagated disk in the original one:
// |c' - c| + r' < r.
template <class Real>
bool strictly_inside(const disk_t<Real>& inner, const disk_t<Real>& outer) {
  return std::abs(inner.center - outer.center) + inner.radius < outer.radius;
}

}  // namespace expdyn
