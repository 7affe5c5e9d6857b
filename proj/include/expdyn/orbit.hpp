#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "expdyn/core.hpp"
#include "expdyn/grid.hpp"

// Overflow-safe iteration of f_lambda(z) = lambda * e^z.
//
// The derivative cocycle Df^n(z) = prod_{k=1..n} f^k(z) overflows doubles
// after a handful of steps, so it is carried in log scale: log_mod
// accumulates log|lambda| + Re(z_{k-1}) per step and arg accumulates
// arg(lambda) + Im(z_{k-1}), reduced mod 2*pi each step.
//
// Templated on the real type so an extended-precision backend can be
// slotted in later; everything downstream uses the double instantiation.

namespace expdyn {

template <class Real = double>
struct derivative_cocycle {
  Real log_mod = 0;  // natural log of |Df^n|
  Real arg = 0;      // in [0, 2*pi)

  void accumulate(const exp_param<Real>& p, std::complex<Real> z_prev) {
    log_mod += p.log_mod() + z_prev.real();
    arg = reduce_angle(arg + p.arg() + z_prev.imag());
  }

  // Df^n as a plain complex number; only meaningful while log_mod is
  // within double range, so reconstruction is gated at |log_mod| <= 600.
  std::optional<std::complex<Real>> value() const {
    if (std::abs(log_mod) > Real(600)) return std::nullopt;
    const Real m = std::exp(log_mod);
    return std::complex<Real>(m * std::cos(arg), m * std::sin(arg));
  }
};

enum class orbit_end {
  budget_exhausted,
  escaped_right,
  predicate_hit,
  underflowed,
};

inline const char* to_string(orbit_end e) {
  switch (e) {
    case orbit_end::budget_exhausted: return "budget_exhausted";
    case orbit_end::escaped_right: return "escaped_right";
    case orbit_end::predicate_hit: return "predicate_hit";
    case orbit_end::underflowed: return "underflowed";
  }
  return "?";
}

template <class Real = double>
struct orbit_trace {
  exp_param<Real> lambda;
  std::vector<std::complex<Real>> points;              // z_0 ... z_n
  std::vector<derivative_cocycle<Real>> cocycles;      // Df^0 ... Df^n
  Real min_mod = std::numeric_limits<Real>::infinity();  // inf_{j>=1} |z_j|
  orbit_end termination = orbit_end::budget_exhausted;

  std::int64_t steps() const {
    return static_cast<std::int64_t>(points.size()) - 1;
  }
};

// One application of f. Preconditions: Re(z) <= x_escape, else the result
// would be numerically meaningless downstream.
template <class Real>
std::complex<Real> step(const exp_param<Real>& p, std::complex<Real> z,
                        Real x_escape = Real(default_x_escape)) {
  if (z.real() > x_escape) throw escape_error(static_cast<double>(z.real()));
  return p.lambda * std::exp(z);
}

namespace detail {

// Incremental orbit state shared by iterate_orbit and the classifiers.
// Points far to the left map extremely close to 0; we keep iterating
// through gradual underflow and only flag when a point becomes exactly 0
// (the imaginary part is then lost).
template <class Real>
class orbit_runner {
public:
  orbit_runner(exp_param<Real> p, std::complex<Real> z0, bool store_cocycles,
               Real x_escape)
      : p_(p), store_cocycles_(store_cocycles), x_escape_(x_escape) {
    points_.push_back(z0);
    if (store_cocycles_) cocycles_.push_back({});
  }

  // Advances one step unless finished; returns false once terminated.
  bool advance() {
    if (done_) return false;
    const std::complex<Real> z = points_.back();
    if (z.real() > x_escape_) {
      finish(orbit_end::escaped_right);
      return false;
    }
    cocycle_.accumulate(p_, z);
    const std::complex<Real> w = p_.lambda * std::exp(z);
    points_.push_back(w);
    if (store_cocycles_) cocycles_.push_back(cocycle_);
    min_mod_ = std::min(min_mod_, std::abs(w));
    if (w == std::complex<Real>{}) {
      finish(orbit_end::underflowed);
      return false;
    }
    return true;
  }

  const std::vector<std::complex<Real>>& points() const { return points_; }
  std::complex<Real> current() const { return points_.back(); }
  const derivative_cocycle<Real>& cocycle() const { return cocycle_; }
  Real min_mod() const { return min_mod_; }
  bool done() const { return done_; }
  std::int64_t steps() const {
    return static_cast<std::int64_t>(points_.size()) - 1;
  }

  void finish(orbit_end why) {
    done_ = true;
    why_ = why;
  }

  orbit_trace<Real> take_trace() {
    orbit_trace<Real> t{p_, std::move(points_), std::move(cocycles_),
                        min_mod_, why_};
    return t;
  }

private:
  exp_param<Real> p_;
  bool store_cocycles_;
  Real x_escape_;
  std::vector<std::complex<Real>> points_;
  std::vector<derivative_cocycle<Real>> cocycles_;
  derivative_cocycle<Real> cocycle_;
  Real min_mod_ = std::numeric_limits<Real>::infinity();
  bool done_ = false;
  orbit_end why_ = orbit_end::budget_exhausted;
};

}  // namespace detail

// Iterates up to n_max steps, stopping early at the stop half-plane (if
// any), at the escape threshold, or on exact underflow to 0.
template <class Real>
orbit_trace<Real> iterate_orbit(const exp_param<Real>& p,
                                std::complex<Real> z0, std::int64_t n_max,
                                std::optional<half_plane> stop = std::nullopt,
                                Real x_escape = Real(default_x_escape)) {
  if (n_max < 0) throw std::invalid_argument("iterate_orbit: n_max < 0");
  detail::orbit_runner<Real> run(p, z0, /*store_cocycles=*/true, x_escape);
  for (std::int64_t k = 0; k < n_max; ++k) {
    if (!run.advance()) break;
    if (stop) {
      const Real re = run.current().real();
      const bool in = stop->side == plane_side::right ? re > Real(stop->level)
                                                      : re <= Real(stop->level);
      if (in) {
        run.finish(orbit_end::predicate_hit);
        break;
      }
    }
  }
  return run.take_trace();
}

struct first_entry_record {
  std::int64_t n = 0;  // first entry time
  cplx landing;
  derivative_cocycle<double> cocycle;  // Df^n at the start point
};

// First entry of the orbit of z0 into the target half-plane, up to t_max
// steps. Returns nothing if the orbit escapes right, underflows to 0, or
// exhausts the budget before entering. n = 0 when z0 already lies inside.
// Keeps no per-point storage; only the running cocycle is carried.
inline std::optional<first_entry_record> first_entry(
    const param& p, cplx z0, half_plane target, std::int64_t t_max,
    double x_escape = default_x_escape) {
  if (t_max < 1) throw std::invalid_argument("first_entry: t_max < 1");
  if (target.contains(z0)) return first_entry_record{0, z0, {}};
  derivative_cocycle<double> cocycle;
  cplx z = z0;
  for (std::int64_t n = 1; n <= t_max; ++n) {
    if (z.real() > x_escape) return std::nullopt;
    cocycle.accumulate(p, z);
    z = p.lambda * std::exp(z);
    if (target.contains(z)) return first_entry_record{n, z, cocycle};
    if (z == cplx{}) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace expdyn
