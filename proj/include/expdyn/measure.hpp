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
#include "expdyn/grid.hpp"
#include "expdyn/orbit.hpp"

// Desk-scale measurements of the rightward square cascade, first-entry
// proportions, and deep-left landing statistics. The literal asymptotic
// thresholds (e^{2x} iterations, e^{x^9} derivative caps, levels
// -e^{x+sqrt(x)}) are unreachable in double precision except for small x,
// so every threshold is configuration-exposed; the reports state what the
// accessible regime shows and extrapolate nothing.

namespace expdyn {

// One greedy climb through grid squares: from a square at level y_k, pick
// a sample point whose image lands inside a full grid square at a level
// y_{k+1} obeying the growth chain e^{y_k/2} < y_{k+1} < e^7 |l0| e^{y_k}.
struct cascade_trace {
  param lambda0;
  std::vector<grid_square> squares;
  std::vector<double> y_levels;  // strictly increasing
  cplx witness;                  // probe point realizing the last hop
  std::int64_t final_entry = 0;  // index of the square at level >= x
};

struct cascade_stuck {
  grid_square square;  // square in which no admissible probe was found
};

inline result<cascade_trace, cascade_stuck> cascade_to_right(
    const param& p, grid_square q, double x, std::int64_t k_max,
    double m_work = 10.0) {
  if (!(q.lo().real() > m_work))
    throw std::invalid_argument(
        "cascade_to_right: square must lie right of the working level");
  if (k_max < 0) throw std::invalid_argument("cascade_to_right: k_max < 0");

  cascade_trace trace{p, {q}, {q.lo().real()}, q.center(), 0};
  while (trace.y_levels.back() < x &&
         static_cast<std::int64_t>(trace.y_levels.size()) - 1 < k_max) {
    const grid_square cur = trace.squares.back();
    const double y = trace.y_levels.back();
    const double lo_chain = std::exp(y / 2);
    const double hi_chain = std::exp(7.0) * std::abs(p.lambda) * std::exp(y);

    // probes: center first, then a 5x5 interior grid
    std::vector<cplx> probes{cur.center()};
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        probes.push_back(cur.lo() + cplx((i + 0.5) * two_pi / 5,
                                         (j + 0.5) * two_pi / 5));

    std::optional<std::pair<double, std::pair<grid_square, cplx>>> best;
    for (const cplx& z : probes) {
      const cplx w = p.lambda * std::exp(z);
      if (!is_finite(w)) continue;
      if (std::abs(w.real()) >= std::ldexp(1.0, 62) * two_pi ||
          std::abs(w.imag()) >= std::ldexp(1.0, 62) * two_pi)
        continue;  // lattice index would overflow
      const grid_square target = square_of(w);
      const double y_next = target.lo().real();
      if (!(y_next > lo_chain && y_next < hi_chain)) continue;
      if (!best || y_next > best->first)
        best = std::make_pair(y_next, std::make_pair(target, z));
    }
    if (!best) return cascade_stuck{cur};
    trace.squares.push_back(best->second.first);
    trace.y_levels.push_back(best->first);
    trace.witness = best->second.second;
    trace.final_entry = static_cast<std::int64_t>(trace.y_levels.size()) - 1;
  }
  return trace;
}

struct entry_stats_config {
  double x = 3;                 // half-plane level
  std::int64_t grid = 100;      // samples per side
  std::int64_t t_max = 100'000;
  double deriv_cap_log = 600;   // cap on log|Df^{n(z)}| (x^9 scaled)
  double delta0 = 0.9;          // ball radius for below-M sampling
  double x_escape = default_x_escape;

  void validate() const {
    if (!(x > 0) || grid < 2 || t_max < 1)
      throw std::invalid_argument("entry_stats_config: need x > 0, grid >= 2, t_max >= 1");
  }
};

using sample_domain = std::variant<dyadic_square, disk>;

namespace detail {

// Deterministic uniform grid over the domain (no randomness, so measure
// fractions are reproducible; the bias vs the true Lebesgue fraction is an
// O(1/grid) boundary effect).
inline std::vector<cplx> domain_grid(const sample_domain& dom,
                                     std::int64_t grid) {
  std::vector<cplx> pts;
  pts.reserve(static_cast<std::size_t>(grid * grid));
  if (const auto* sq = std::get_if<dyadic_square>(&dom)) {
    const cplx lo = sq->lo();
    const double h = sq->side() / static_cast<double>(grid);
    for (std::int64_t i = 0; i < grid; ++i)
      for (std::int64_t j = 0; j < grid; ++j)
        pts.emplace_back(lo.real() + (i + 0.5) * h, lo.imag() + (j + 0.5) * h);
  } else {
    const disk d = std::get<disk>(dom);
    const double h = 2 * d.radius / static_cast<double>(grid);
    for (std::int64_t i = 0; i < grid; ++i)
      for (std::int64_t j = 0; j < grid; ++j) {
        const cplx z(d.center.real() - d.radius + (i + 0.5) * h,
                     d.center.imag() - d.radius + (j + 0.5) * h);
        if (std::abs(z - d.center) <= d.radius) pts.push_back(z);
      }
  }
  return pts;
}

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto ix = static_cast<std::size_t>(std::min<double>(
      static_cast<double>(v.size()) - 1,
      std::max(0.0, std::ceil(q * static_cast<double>(v.size())) - 1)));
  return v[ix];
}

}  // namespace detail

struct entry_stats_report {
  std::int64_t total = 0;
  std::int64_t entered = 0;
  double fraction = 0;
  double n_p50 = 0, n_p90 = 0, n_p99 = 0;          // quantiles of n(z)
  double deriv_p50 = 0, deriv_p90 = 0, deriv_p99 = 0;  // of log|Df^{n(z)}|
  std::int64_t within_theory_bounds = 0;
};

struct entry_sample_record {
  cplx z;
  std::optional<std::int64_t> n;
  double log_deriv = 0;
  double landing_re = 0;
};

// First-entry statistics to the right half-plane R(cfg.x) over a uniform
// grid on the domain.
inline entry_stats_report entry_stats(
    const param& p, const sample_domain& dom, const entry_stats_config& cfg,
    std::vector<entry_sample_record>* records = nullptr) {
  cfg.validate();
  const auto pts = detail::domain_grid(dom, cfg.grid);
  entry_stats_report rep;
  rep.total = static_cast<std::int64_t>(pts.size());
  std::vector<double> ns, derivs;
  const double n_cap = std::min<double>(std::exp(2 * cfg.x),
                                        static_cast<double>(cfg.t_max));
  for (const cplx& z : pts) {
    auto hit = first_entry(p, z, half_plane::right(cfg.x), cfg.t_max,
                           cfg.x_escape);
    if (records) {
      entry_sample_record r{z, std::nullopt, 0, 0};
      if (hit) {
        r.n = hit->n;
        r.log_deriv = hit->cocycle.log_mod;
        r.landing_re = hit->landing.real();
      }
      records->push_back(r);
    }
    if (!hit) continue;
    ++rep.entered;
    ns.push_back(static_cast<double>(hit->n));
    derivs.push_back(hit->cocycle.log_mod);
    if (static_cast<double>(hit->n) <= n_cap &&
        hit->cocycle.log_mod <= cfg.deriv_cap_log)
      ++rep.within_theory_bounds;
  }
  rep.fraction = rep.total == 0
                     ? 0
                     : static_cast<double>(rep.entered) /
                           static_cast<double>(rep.total);
  rep.n_p50 = detail::quantile(ns, 0.50);
  rep.n_p90 = detail::quantile(ns, 0.90);
  rep.n_p99 = detail::quantile(ns, 0.99);
  rep.deriv_p50 = detail::quantile(derivs, 0.50);
  rep.deriv_p90 = detail::quantile(derivs, 0.90);
  rep.deriv_p99 = detail::quantile(derivs, 0.99);
  return rep;
}

struct deep_left_report {
  std::int64_t total = 0;
  std::int64_t entered_left = 0;
  std::int64_t overshoot = 0;      // landings with Re <= L2
  std::int64_t deriv_window = 0;   // log|Df^{n(z)}| in (x, cap)
  double fraction_S0 = 0;          // all conditions at once
};

// First entries into the left half-plane L(L1), with overshoot counting
// into L(L2), the derivative window, and the running minimum of
// |Df^j(f^k(z))| over j + k <= n(z) checked against the floor
// exp(-e^{x+1}) (clamped to the representable range).
inline deep_left_report deep_left_stats(const param& p, const disk& domain,
                                        double x,
                                        std::pair<double, double> thresholds,
                                        const entry_stats_config& cfg) {
  cfg.validate();
  const auto [L1, L2] = thresholds;
  if (!(L2 <= L1 && L1 < 0))
    throw std::invalid_argument("deep_left_stats: need L2 <= L1 < 0");
  const auto pts = detail::domain_grid(sample_domain{domain}, cfg.grid);
  deep_left_report rep;
  rep.total = static_cast<std::int64_t>(pts.size());
  const double floor_log = -std::min(std::exp(x + 1), 600.0);
  const double n_cap = std::min<double>(std::exp(3 * x),
                                        static_cast<double>(cfg.t_max));
  for (const cplx& z0 : pts) {
    cplx z = z0;
    derivative_cocycle<double> cocycle;
    double max_prefix = 0;  // max of log|Df^b(z0)| over b < current step
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::int64_t n = 1; n <= cfg.t_max; ++n) {
      if (z.real() > cfg.x_escape) break;
      cocycle.accumulate(p, z);
      z = p.lambda * std::exp(z);
      min_gap = std::min(min_gap, cocycle.log_mod - max_prefix);
      max_prefix = std::max(max_prefix, cocycle.log_mod);
      if (z.real() <= L1) {
        ++rep.entered_left;
        const bool over = z.real() <= L2;
        const bool window = cocycle.log_mod > x &&
                            cocycle.log_mod < cfg.deriv_cap_log;
        const bool floor_ok = min_gap > floor_log;
        const bool time_ok = static_cast<double>(n) <= n_cap;
        if (over) ++rep.overshoot;
        if (window) ++rep.deriv_window;
        if (over && window && floor_ok && time_ok) rep.fraction_S0 += 1;
        break;
      }
      if (z == cplx{}) break;
    }
  }
  if (rep.total > 0) rep.fraction_S0 /= static_cast<double>(rep.total);
  return rep;
}

}  // namespace expdyn
