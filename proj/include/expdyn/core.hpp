#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

// Core vocabulary for the exponential family f_lambda(z) = lambda * e^z.
// Everything is a value type; functions are pure unless noted.

namespace expdyn {

using cplx = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Once Re(z) exceeds this, |Df| factors exceed e^50 and double precision
// cannot track the dependence on lambda or z; orbits are flagged instead
// of continued.
inline constexpr double default_x_escape = 50.0;

// Thrown when an operation would evaluate f past the escape threshold.
class escape_error : public std::domain_error {
public:
  explicit escape_error(double re)
      : std::domain_error("real part " + std::to_string(re) +
                          " beyond escape threshold") {}
};

// The parameter lambda of f_lambda(z) = lambda * e^z. Must be finite and
// nonzero; enforce at construction so downstream code can divide by it.
template <class Real = double>
struct exp_param {
  std::complex<Real> lambda;

  exp_param() = delete;
  explicit exp_param(std::complex<Real> l) : lambda(l) {
    if (!std::isfinite(l.real()) || !std::isfinite(l.imag()))
      throw std::invalid_argument("exp_param: lambda must be finite");
    if (l == std::complex<Real>{})
      throw std::invalid_argument("exp_param: lambda must be nonzero");
  }
  exp_param(Real re, Real im) : exp_param(std::complex<Real>(re, im)) {}

  Real log_mod() const { return std::log(std::abs(lambda)); }
  Real arg() const { return std::arg(lambda); }

  friend bool operator==(const exp_param&, const exp_param&) = default;
};

using param = exp_param<double>;

// Minimal value-or-error carrier; E is a cheap enum (or small struct).
template <class T, class E>
class result {
public:
  result(T v) : state_(std::in_place_index<0>, std::move(v)) {}
  result(E e) : state_(std::in_place_index<1>, e) {}

  bool ok() const { return state_.index() == 0; }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::logic_error("result: no value");
    return std::get<0>(state_);
  }
  T&& value() && {
    if (!ok()) throw std::logic_error("result: no value");
    return std::get<0>(std::move(state_));
  }
  E error() const {
    if (ok()) throw std::logic_error("result: no error");
    return std::get<1>(state_);
  }

private:
  std::variant<T, E> state_;
};

inline bool is_finite(cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Reduce an angle to [0, 2*pi).
template <class Real = double>
Real reduce_angle(Real a) {
  Real r = std::fmod(a, Real(two_pi));
  return r < 0 ? r + Real(two_pi) : r;
}

// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

}  // namespace expdyn
