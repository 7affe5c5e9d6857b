#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "expdyn/certify.hpp"
#include "expdyn/core.hpp"
#include "expdyn/misiurewicz.hpp"
#include "expdyn/parallel.hpp"
#include "expdyn/rng.hpp"

// Monte Carlo estimation of the certified-hyperbolic fraction in shrinking
// balls and annuli around a base parameter, plus the annulus-image
// diagnostics for the singular-orbit sweep and the certification pipeline
// that finds hyperbolic parameters the way the density mechanism predicts.
//
// Reported fractions are lower bounds on the true hyperbolic density:
// budgets are finite and only certificate-backed verdicts count. Undecided
// counts are carried explicitly so the one-sidedness stays visible.

namespace expdyn {

// A(center; gamma*r, r) cut into `sectors` congruent pieces by the rays at
// angles 2*pi*j/sectors.
struct annulus_spec {
  param center;
  double gamma = 0.5;      // inner radius fraction, in (0, 1)
  double r = 1;            // outer radius
  std::int64_t sectors = 8;

  void validate() const {
    if (!(gamma >= 0 && gamma < 1) || !(r > 0) || sectors < 1)
      throw std::invalid_argument("annulus_spec: need 0 <= gamma < 1, r > 0, sectors >= 1");
  }
};

// Area-uniform samples from the annulus (gamma = 0 degenerates to the
// disk). rho = sqrt(u (r^2 - g^2 r^2) + g^2 r^2) inverts the radial CDF.
// Deterministic per (seed, index); `sector` restricts to one piece.
inline std::vector<param> sample_annulus(
    const annulus_spec& spec, std::int64_t count, std::uint64_t seed,
    std::optional<std::int64_t> sector = std::nullopt) {
  spec.validate();
  if (count < 1) throw std::invalid_argument("sample_annulus: count < 1");
  std::vector<param> out;
  out.reserve(static_cast<std::size_t>(count));
  const double r2 = spec.r * spec.r;
  const double g2r2 = spec.gamma * spec.gamma * r2;
  for (std::int64_t i = 0; i < count; ++i) {
    auto rng = substream(seed, static_cast<std::uint64_t>(i));
    const double rho = std::sqrt(rng.uniform() * (r2 - g2r2) + g2r2);
    double theta;
    if (sector) {
      const double span = two_pi / static_cast<double>(spec.sectors);
      theta = (static_cast<double>(*sector) + rng.uniform()) * span;
    } else {
      theta = rng.uniform() * two_pi;
    }
    out.push_back(param(spec.center.lambda +
                        std::polar(rho, theta)));
  }
  return out;
}

// 95% Wilson score interval for a binomial proportion; well-behaved at
// fractions of 0 and 1.
inline std::pair<double, double> wilson_interval(std::int64_t successes,
                                                 std::int64_t n) {
  if (n <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1 + z2 / nn;
  const double center = (ph + z2 / (2 * nn)) / denom;
  const double half =
      z * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn)) / denom;
  // the bound is exactly sharp at the extremes; don't let cancellation
  // leave a stray ulp there
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == n ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

struct annulus_shape {
  double gamma = 0.5;
  std::int64_t sectors = 8;
};

struct density_sweep_config {
  std::vector<double> radii;  // strictly decreasing, positive
  std::int64_t samples = 1000;
  std::uint64_t seed = 1;
  std::int64_t budget = 100'000;
  std::int64_t p_max = 512;
  std::optional<annulus_shape> annulus;  // absent: sample the full ball
  certify_options certify;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (radii.empty()) throw std::invalid_argument("density: no radii");
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (!(radii[i] > 0))
        throw std::invalid_argument("density: radii must be positive");
      if (i > 0 && !(radii[i] < radii[i - 1]))
        throw std::invalid_argument("density: radii must be strictly decreasing");
    }
    if (samples < 1) throw std::invalid_argument("density: samples < 1");
    if (budget < 1 || p_max < 1)
      throw std::invalid_argument("density: budget and p_max must be >= 1");
  }
};

struct density_row {
  double r = 0;
  std::int64_t hyperbolic = 0;
  std::int64_t escape_suspect = 0;
  std::int64_t undecided = 0;
  double fraction = 0;
  double wilson_lo = 0;
  double wilson_hi = 0;
};

struct density_sample_record {
  param lambda;
  verdict result;
  std::int64_t period_or_n = 0;
  std::int64_t iterations = 0;
};

struct density_report {
  param center;
  std::uint64_t seed = 0;
  std::int64_t budget = 0;
  std::int64_t samples = 0;
  std::optional<annulus_shape> annulus;
  std::vector<density_row> rows;
};

// Classifies `samples` parameters per radius and tallies the verdicts.
// Sample i of radius index j uses the substream (seed, j * samples + i),
// so any parallel chunking gives identical output.
inline density_report density_sweep(
    const param& center, const density_sweep_config& cfg,
    std::vector<density_sample_record>* records = nullptr) {
  cfg.validate();
  density_report rep{center, cfg.seed, cfg.budget, cfg.samples, cfg.annulus, {}};
  for (std::size_t j = 0; j < cfg.radii.size(); ++j) {
    const double r = cfg.radii[j];
    annulus_spec spec{center,
                      cfg.annulus ? cfg.annulus->gamma : 0.0,
                      r,
                      cfg.annulus ? cfg.annulus->sectors : 1};
    const auto lambdas = sample_annulus(
        spec, cfg.samples,
        cfg.seed + static_cast<std::uint64_t>(j) * 0x9E3779B97F4A7C15ULL);
    std::vector<classification> results(lambdas.size());
    parallel_for(
        static_cast<std::int64_t>(lambdas.size()),
        [&](std::int64_t i) {
          results[static_cast<std::size_t>(i)] =
              classify(lambdas[static_cast<std::size_t>(i)], cfg.budget,
                       cfg.p_max, cfg.certify);
        },
        cfg.threads);

    density_row row;
    row.r = r;
    for (std::size_t i = 0; i < results.size(); ++i) {
      switch (results[i].result) {
        case verdict::hyperbolic: ++row.hyperbolic; break;
        case verdict::escape_suspect: ++row.escape_suspect; break;
        case verdict::undecided: ++row.undecided; break;
      }
      if (records)
        records->push_back({lambdas[i], results[i].result,
                            results[i].period_or_n,
                            results[i].iterations_used});
    }
    row.fraction = static_cast<double>(row.hyperbolic) /
                   static_cast<double>(cfg.samples);
    std::tie(row.wilson_lo, row.wilson_hi) =
        wilson_interval(row.hyperbolic, cfg.samples);
    rep.rows.push_back(row);
  }
  return rep;
}

struct annulus_image_stats {
  std::int64_t n = 0;
  double distortion = 1;        // max/min |dxi_n| over the sector grid
  double min_dxi_times_r = 0;
  double image_diam = 0;
  bool contains_in_ps_ball = false;
};

enum class image_stats_error { no_such_n };

// Follows one 2K-sector of A(lambda0; gamma*r, r) under xi_n for growing n
// until the image of a radial-by-angular grid reaches diameter
// delta_target, then reports the empirical distortion of xi_n, the
// derivative floor times r, and whether the image lies within delta0 of
// the postsingular set.
inline result<annulus_image_stats, image_stats_error> annulus_image_stats_for(
    const misiurewicz_certificate& base, double r, double delta_target,
    std::int64_t grid, double gamma = 0.5, std::int64_t sectors = 8,
    double delta0 = 1.0, std::int64_t n_budget = 512,
    double x_escape = default_x_escape) {
  if (grid < 1 || !(r > 0) || !(delta_target > 0))
    throw std::invalid_argument("annulus_image_stats: bad arguments");
  const param& l0 = base.lambda;
  std::vector<cplx> lam;
  for (std::int64_t i = 0; i < grid; ++i)
    for (std::int64_t j = 0; j < grid; ++j) {
      const double rho =
          gamma * r + (r - gamma * r) *
                          (grid == 1 ? 0.5 : static_cast<double>(i) /
                                                 static_cast<double>(grid - 1));
      const double theta =
          (two_pi / static_cast<double>(sectors)) *
          (grid == 1 ? 0.5 : static_cast<double>(j) /
                                 static_cast<double>(grid - 1));
      lam.push_back(l0.lambda + std::polar(rho, theta));
    }
  const auto ps = postsingular_points(base);

  for (std::int64_t n = 1; n <= n_budget; ++n) {
    std::vector<cplx> img, dxi;
    bool usable = true;
    for (const cplx& l : lam) {
      auto orb = xi_orbit(param(l), n, x_escape);
      if (orb.truncated_at || !is_finite(orb.xi.back()) ||
          !is_finite(orb.dxi.back())) {
        usable = false;
        break;
      }
      img.push_back(orb.xi.back());
      dxi.push_back(orb.dxi.back());
    }
    if (!usable) return image_stats_error::no_such_n;
    double diam = 0;
    for (std::size_t a = 0; a < img.size(); ++a)
      for (std::size_t b = a + 1; b < img.size(); ++b)
        diam = std::max(diam, std::abs(img[a] - img[b]));
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0;
    for (const cplx& d : dxi) {
      dmin = std::min(dmin, std::abs(d));
      dmax = std::max(dmax, std::abs(d));
    }
    const bool reached = grid == 1 ? dmin * r * (1 - gamma) >= delta_target
                                   : diam >= delta_target;
    if (!reached) continue;

    annulus_image_stats st;
    st.n = n;
    st.distortion = dmin > 0 ? dmax / dmin : 1;
    if (grid == 1) st.distortion = 1;
    st.min_dxi_times_r = dmin * r;
    st.image_diam = diam;
    st.contains_in_ps_ball = true;
    for (const cplx& w : img) {
      double dist = std::numeric_limits<double>::infinity();
      for (const cplx& q : ps) dist = std::min(dist, std::abs(w - q));
      if (dist > delta0) {
        st.contains_in_ps_ball = false;
        break;
      }
    }
    return st;
  }
  return image_stats_error::no_such_n;
}

// Samples the annulus, screens singular orbits for deep-left entries
// (Re(xi_n) < -x_work with the accumulated derivative still moderate), and
// returns the parameters whose trap ball certifies. Possibly empty; every
// returned certificate has just passed its containment check.
inline std::vector<std::pair<param, trap_ball_certificate>>
find_hyperbolic_via_proof(const misiurewicz_certificate& base,
                          const annulus_spec& spec, double x_work,
                          std::int64_t count, std::uint64_t seed,
                          std::int64_t budget = 100'000,
                          certify_options opt = {}) {
  (void)base;  // the base certificate fixes the regime; sampling only
               // needs the annulus
  if (count < 1)
    throw std::invalid_argument("find_hyperbolic_via_proof: count < 1");
  const auto lambdas = sample_annulus(spec, count, seed);
  std::vector<std::optional<trap_ball_certificate>> certs(lambdas.size());
  parallel_for(static_cast<std::int64_t>(lambdas.size()), [&](std::int64_t ii) {
    const auto i = static_cast<std::size_t>(ii);
    const param& p = lambdas[i];
    // cheap screen: scan the singular orbit without any disk work
    derivative_cocycle<double> cocycle;
    cplx z = 0;
    bool candidate = false;
    for (std::int64_t n = 1; n <= budget; ++n) {
      if (z.real() > opt.x_escape) break;
      cocycle.accumulate(p, z);
      z = p.lambda * std::exp(z);
      if (z.real() < -x_work &&
          z.real() + cocycle.log_mod + p.log_mod() < -2) {
        candidate = true;
        break;
      }
      if (z == cplx{}) break;
    }
    if (!candidate) return;
    auto cert = certify_trap_ball(p, budget, opt);
    if (cert) certs[i] = cert.value();
  });
  std::vector<std::pair<param, trap_ball_certificate>> out;
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    if (certs[i]) out.emplace_back(lambdas[i], *certs[i]);
  return out;
}

}  // namespace expdyn
