#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "expdyn/core.hpp"

// Half-planes and the 2*pi lattice of squares that organize the plane for
// the measure experiments, plus their dyadic refinements.

namespace expdyn {

enum class plane_side { right, left };

// right means {Re(z) > level}; left is the complement {Re(z) <= level}.
struct half_plane {
  plane_side side;
  double level;

  bool contains(cplx z) const {
    return side == plane_side::right ? z.real() > level : z.real() <= level;
  }

  static half_plane right(double x) { return {plane_side::right, x}; }
  static half_plane left(double x) { return {plane_side::left, x}; }

  friend bool operator==(const half_plane&, const half_plane&) = default;
};

// The square [2k*pi, 2(k+1)*pi) x [2j*pi, 2(j+1)*pi). k indexes the real
// direction, j the imaginary one. These tile the plane with diameter
// 2*sqrt(2)*pi.
struct grid_square {
  std::int64_t j = 0;
  std::int64_t k = 0;

  cplx lo() const {
    return {two_pi * static_cast<double>(k), two_pi * static_cast<double>(j)};
  }
  cplx center() const { return lo() + cplx(two_pi / 2, two_pi / 2); }
  double side() const { return two_pi; }

  bool contains(cplx z) const {
    const cplx c = lo();
    return z.real() >= c.real() && z.real() < c.real() + two_pi &&
           z.imag() >= c.imag() && z.imag() < c.imag() + two_pi;
  }

  friend bool operator==(const grid_square&, const grid_square&) = default;
};

inline grid_square square_of(cplx z) {
  return {static_cast<std::int64_t>(std::floor(z.imag() / two_pi)),
          static_cast<std::int64_t>(std::floor(z.real() / two_pi))};
}

// A square of side 2^-k aligned to the 2^-k lattice, k >= 1: scaling it by
// 2*pi*2^k gives a grid_square.
struct dyadic_square {
  int scale_exp = 1;     // side is 2^-scale_exp
  std::int64_t a = 0;    // real lattice index
  std::int64_t b = 0;    // imaginary lattice index

  double side() const { return std::ldexp(1.0, -scale_exp); }
  double area() const { return std::ldexp(1.0, -2 * scale_exp); }
  cplx lo() const {
    return {static_cast<double>(a) * side(), static_cast<double>(b) * side()};
  }
  cplx center() const {
    const double h = side() / 2;
    return lo() + cplx(h, h);
  }
  bool contains(cplx z) const {
    const cplx c = lo();
    const double s = side();
    return z.real() >= c.real() && z.real() < c.real() + s &&
           z.imag() >= c.imag() && z.imag() < c.imag() + s;
  }

  // The four children at scale 2^-(k+1); they partition this square exactly.
  std::array<dyadic_square, 4> children() const {
    return {dyadic_square{scale_exp + 1, 2 * a, 2 * b},
            dyadic_square{scale_exp + 1, 2 * a + 1, 2 * b},
            dyadic_square{scale_exp + 1, 2 * a, 2 * b + 1},
            dyadic_square{scale_exp + 1, 2 * a + 1, 2 * b + 1}};
  }

  friend bool operator==(const dyadic_square&, const dyadic_square&) = default;
};

}  // namespace expdyn
