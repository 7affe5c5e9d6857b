#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "expdyn/core.hpp"
#include "expdyn/disk.hpp"
#include "expdyn/orbit.hpp"

// Detection, Newton refinement and rigorous-style certification of
// attracting cycles, the trap-ball-at-0 mechanism, and the parameter
// classifier built from both.
//
// A certificate is machine-checkable evidence: propagating its disk
// through the stated number of steps must land strictly inside the
// original disk. Hyperbolic verdicts are only ever emitted with a
// certificate that has just passed this check.

namespace expdyn {

struct certify_options {
  double x_escape = default_x_escape;
  double eps_cycle_rel = 1e-9;    // cycle detection tolerance
  double newton_tol = 1e-12;      // refinement residual tolerance
  std::int64_t transient = 10'000;
  std::int64_t p_max = 512;
  double trap_rho_factor = 0.25;  // margin in rho = factor / |Df^n(0)|
  double trap_deep_left = -2.0;   // Re(xi_n) must be below this to count
                                  // as a deep-left entry
};

// Evidence that lambda has an attracting cycle of the given period:
// propagating `start` through `period` steps yields `final_state` strictly
// inside `start`, and the multiplier over one period contracts.
struct cycle_certificate {
  param lambda;
  std::int64_t period = 1;
  disk start;
  disk final_state;
  double multiplier_log_mod = 0;
};

// Evidence via the trap ball at 0: propagating B(0, rho) through n+1 steps
// of f_lambda lands strictly inside B(0, rho). P = Re(f^n(0)) < 0 is the
// deep-left level that kills the derivative on the return step.
struct trap_ball_certificate {
  param lambda;
  std::int64_t n = 0;
  double P = 0;
  double rho = 0;
  disk final_state;
  double mult_log_mod = 0;  // log|Df^{n+1}(0)| = log|lambda| + P + log|Df^n(0)|
};

enum class refine_error { no_convergence, derivative_overflow };
enum class certify_error { not_contractive };
enum class trap_error { no_deep_left_entry, containment_failed };

// Re-run the containment check a certificate claims. Deterministic, so a
// deserialized certificate reproduces final_state bit-identically.
inline bool reverify(const cycle_certificate& c,
                     double x_escape = default_x_escape) {
  disk d = c.start;
  try {
    for (std::int64_t i = 0; i < c.period; ++i)
      d = propagate_disk(c.lambda, d, x_escape);
  } catch (const escape_error&) {
    return false;
  }
  return d == c.final_state && strictly_inside(d, c.start) &&
         c.multiplier_log_mod < 0;
}

inline bool reverify(const trap_ball_certificate& c,
                     double x_escape = default_x_escape) {
  disk start{cplx{0, 0}, c.rho};
  disk d = start;
  try {
    for (std::int64_t i = 0; i <= c.n; ++i)
      d = propagate_disk(c.lambda, d, x_escape);
  } catch (const escape_error&) {
    return false;
  }
  return d == c.final_state && strictly_inside(d, start) && c.P < 0;
}

namespace detail {

inline std::optional<std::pair<std::int64_t, cplx>> detect_cycle_tail(
    const std::vector<cplx>& z, double eps_rel) {
  const auto n = static_cast<std::int64_t>(z.size()) - 1;
  if (n < 1) return std::nullopt;
  for (std::int64_t p = 1; p < n; ++p) {
    const cplx base = z[static_cast<std::size_t>(n - p)];
    if (std::abs(z[static_cast<std::size_t>(n)] - base) <=
        eps_rel * std::max(1.0, std::abs(base)))
      return std::make_pair(p, base);
  }
  return std::nullopt;
}

}  // namespace detail

// Scans the converged tail of a trace for a period: smallest p with
// |z_end - z_{end-p}| <= eps_rel * max(1, |z_{end-p}|). Returns the period
// and the matching tail point.
inline std::optional<std::pair<std::int64_t, cplx>> detect_cycle(
    const orbit_trace<double>& trace, double eps_rel) {
  return detail::detect_cycle_tail(trace.points, eps_rel);
}

// Newton on F(z) = f^period(z) - z with DF = Df^period - 1, the latter
// reconstructed from the cocycle. Stops once |F| <= tol * max(1, |z|).
inline result<cplx, refine_error> refine_cycle(
    const param& p, cplx z_guess, std::int64_t period, double tol,
    double x_escape = default_x_escape) {
  if (period < 1) throw std::invalid_argument("refine_cycle: period < 1");
  cplx z = z_guess;
  for (int it = 0; it < 64; ++it) {
    derivative_cocycle<double> cocycle;
    cplx w = z;
    bool escaped = false;
    for (std::int64_t k = 0; k < period; ++k) {
      if (w.real() > x_escape) {
        escaped = true;
        break;
      }
      cocycle.accumulate(p, w);
      w = p.lambda * std::exp(w);
    }
    if (escaped || !is_finite(w)) return refine_error::no_convergence;
    const cplx F = w - z;
    if (std::abs(F) <= tol * std::max(1.0, std::abs(z))) return z;
    if (cocycle.log_mod > 600) return refine_error::derivative_overflow;
    // below reconstruction range Df^p is indistinguishable from 0
    const cplx dfp = cocycle.value().value_or(cplx{0, 0});
    const cplx DF = dfp - 1.0;
    if (std::abs(DF) < 1e-300) return refine_error::no_convergence;
    z -= F / DF;
    if (!is_finite(z)) return refine_error::no_convergence;
  }
  return refine_error::no_convergence;
}

// Tries disks of radius 0.5, 0.25, ..., 2^-20 around the refined point and
// returns the first that propagates strictly into itself. Multipliers with
// log-modulus in (-1e-12, 0] are rejected outright: containment at that
// margin would be round-off noise (this also rejects parabolic points).
inline result<cycle_certificate, certify_error> certify_attracting(
    const param& p, cplx z_star, std::int64_t period,
    double x_escape = default_x_escape) {
  derivative_cocycle<double> cocycle;
  cplx w = z_star;
  for (std::int64_t k = 0; k < period; ++k) {
    if (w.real() > x_escape) return certify_error::not_contractive;
    cocycle.accumulate(p, w);
    w = p.lambda * std::exp(w);
  }
  const double mult = cocycle.log_mod;
  if (mult > -1e-12) return certify_error::not_contractive;
  for (int e = 1; e <= 20; ++e) {
    const disk start{z_star, std::ldexp(1.0, -e)};
    disk d = start;
    bool escaped = false;
    try {
      for (std::int64_t k = 0; k < period; ++k)
        d = propagate_disk(p, d, x_escape);
    } catch (const escape_error&) {
      escaped = true;
    }
    if (escaped) continue;
    if (strictly_inside(d, start))
      return cycle_certificate{p, period, start, d, mult};
  }
  return certify_error::not_contractive;
}

namespace detail {

// Containment attempt for a trap-ball candidate found at singular-orbit
// index n with log|Df^n(0)| = log_mod_n.
inline std::optional<trap_ball_certificate> attempt_trap(
    const param& p, std::int64_t n, double P, double log_mod_n,
    const certify_options& opt) {
  const double rho =
      std::min(1.0, opt.trap_rho_factor * std::exp(-log_mod_n));
  if (!(rho > 0)) return std::nullopt;
  const disk start{cplx{0, 0}, rho};
  disk d = start;
  try {
    for (std::int64_t i = 0; i <= n; ++i)
      d = propagate_disk(p, d, opt.x_escape);
  } catch (const escape_error&) {
    return std::nullopt;
  }
  if (!strictly_inside(d, start)) return std::nullopt;
  const double mult = p.log_mod() + P + log_mod_n;
  return trap_ball_certificate{p, n, P, rho, d, mult};
}

// Screening test for a trap candidate at singular-orbit point xi_n: the
// entry must be genuinely deep-left (shallow negative excursions, e.g. an
// orbit settling on an attracting fixed point left of 0, do not qualify)
// and the return derivative |lambda| e^P |Df^n(0)| must already be well
// below 1.
inline bool trap_screen(const param& p, double P, double log_mod_n,
                        double deep_left) {
  return P < deep_left && P + log_mod_n + p.log_mod() < -2;
}

}  // namespace detail

// Scans the singular orbit for an index where the orbit has dived far
// enough left that a ball around 0 maps into itself after n+1 steps.
inline result<trap_ball_certificate, trap_error> certify_trap_ball(
    const param& p, std::int64_t budget, certify_options opt = {}) {
  if (budget < 1) throw std::invalid_argument("certify_trap_ball: budget < 1");
  derivative_cocycle<double> cocycle;
  cplx z = 0;
  bool screened = false;
  double last_attempt_screen = std::numeric_limits<double>::infinity();
  for (std::int64_t n = 1; n <= budget; ++n) {
    if (z.real() > opt.x_escape) break;
    cocycle.accumulate(p, z);
    z = p.lambda * std::exp(z);
    const double P = z.real();
    if (detail::trap_screen(p, P, cocycle.log_mod, opt.trap_deep_left)) {
      screened = true;
      const double screen_val = P + cocycle.log_mod + p.log_mod();
      // retry only on substantially deeper entries
      if (screen_val < last_attempt_screen - 2) {
        last_attempt_screen = screen_val;
        if (auto cert = detail::attempt_trap(p, n, P, cocycle.log_mod, opt))
          return *cert;
      }
    }
    if (z == cplx{}) break;
  }
  return screened ? trap_error::containment_failed
                  : trap_error::no_deep_left_entry;
}

enum class verdict { hyperbolic, escape_suspect, undecided };

inline const char* to_string(verdict v) {
  switch (v) {
    case verdict::hyperbolic: return "hyperbolic";
    case verdict::escape_suspect: return "escape_suspect";
    case verdict::undecided: return "undecided";
  }
  return "?";
}

struct classification {
  verdict result = verdict::undecided;
  std::int64_t period_or_n = 0;  // cycle period, or trap return time n+1
  std::variant<std::monostate, cycle_certificate, trap_ball_certificate>
      certificate;
  std::int64_t iterations_used = 0;

  bool hyperbolic() const { return result == verdict::hyperbolic; }
};

namespace detail {

inline std::vector<std::int64_t> divisors_ascending(std::int64_t p) {
  std::vector<std::int64_t> d;
  for (std::int64_t i = 1; i <= p; ++i)
    if (p % i == 0) d.push_back(i);
  return d;
}

// Detection returns multiples; try all divisors and keep the smallest
// that certifies.
inline std::optional<classification> try_cycle_path(
    const param& p, const std::vector<cplx>& points, std::int64_t iters,
    const certify_options& opt) {
  auto cand = detect_cycle_tail(points, opt.eps_cycle_rel);
  if (!cand) return std::nullopt;
  const auto [p_det, z_near] = *cand;
  if (p_det > opt.p_max) return std::nullopt;
  for (std::int64_t d : divisors_ascending(p_det)) {
    auto refined = refine_cycle(p, z_near, d, opt.newton_tol, opt.x_escape);
    if (!refined) continue;
    auto cert = certify_attracting(p, refined.value(), d, opt.x_escape);
    if (!cert) continue;
    classification c;
    c.result = verdict::hyperbolic;
    c.period_or_n = d;
    c.certificate = cert.value();
    c.iterations_used = iters;
    return c;
  }
  return std::nullopt;
}

}  // namespace detail

// Classifier pipeline: iterate the singular orbit from 0; escape past the
// threshold means EscapeSuspect; trap-ball screening runs opportunistically
// during iteration; from `transient` onward, cycle detection plus
// refinement plus certification runs at doubling checkpoints. Hyperbolic
// is only returned with a certificate; anything else within budget is
// Undecided.
inline classification classify(const param& p, std::int64_t budget,
                               std::int64_t p_max, certify_options opt = {}) {
  if (budget < 1 || p_max < 1)
    throw std::invalid_argument("classify: budget and p_max must be >= 1");
  opt.p_max = p_max;
  std::vector<cplx> points;
  points.reserve(static_cast<std::size_t>(std::min<std::int64_t>(budget, 1 << 20)) + 1);
  points.push_back(0);
  derivative_cocycle<double> cocycle;
  double last_attempt_screen = std::numeric_limits<double>::infinity();
  std::int64_t checkpoint = std::max<std::int64_t>(opt.transient, 2);

  for (std::int64_t k = 0; k < budget; ++k) {
    cplx z = points.back();
    if (z.real() > opt.x_escape)
      return {verdict::escape_suspect, 0, {}, k};
    cocycle.accumulate(p, z);
    z = p.lambda * std::exp(z);
    points.push_back(z);

    const double P = z.real();
    if (detail::trap_screen(p, P, cocycle.log_mod, opt.trap_deep_left)) {
      const double screen_val = P + cocycle.log_mod + p.log_mod();
      if (screen_val < last_attempt_screen - 2) {
        last_attempt_screen = screen_val;
        if (auto cert =
                detail::attempt_trap(p, k + 1, P, cocycle.log_mod, opt)) {
          classification c;
          c.result = verdict::hyperbolic;
          c.period_or_n = cert->n + 1;
          c.certificate = *cert;
          c.iterations_used = k + 1;
          return c;
        }
      }
    }

    if (k + 1 == checkpoint || k + 1 == budget) {
      if (auto c = detail::try_cycle_path(p, points, k + 1, opt)) return *c;
      checkpoint *= 2;
    }
  }
  return {verdict::undecided, 0, {}, budget};
}

}  // namespace expdyn
