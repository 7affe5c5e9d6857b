#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "expdyn/certify.hpp"
#include "expdyn/core.hpp"
#include "expdyn/orbit.hpp"
#include "expdyn/rng.hpp"

// Location and verification of Misiurewicz parameters: lambda whose
// singular orbit xi_n(lambda) = f_lambda^n(0) lands, after a preperiod,
// on a repelling cycle. Also houses the empirical estimation of the
// derivative-growth constants used by the measure experiments.

namespace expdyn {

// The singular orbit xi_k and its parameter derivative:
//   xi_{k+1} = lambda e^{xi_k},  dxi_{k+1} = e^{xi_k} (1 + lambda dxi_k),
// with xi_0 = 0, dxi_0 = 0.
struct parameter_orbit {
  param lambda;
  std::vector<cplx> xi;
  std::vector<cplx> dxi;
  std::optional<std::int64_t> truncated_at;  // set if escaped right early
};

inline parameter_orbit xi_orbit(const param& p, std::int64_t n,
                                double x_escape = default_x_escape) {
  if (n < 0) throw std::invalid_argument("xi_orbit: n < 0");
  parameter_orbit out{p, {cplx{0, 0}}, {cplx{0, 0}}, std::nullopt};
  out.xi.reserve(static_cast<std::size_t>(n) + 1);
  out.dxi.reserve(static_cast<std::size_t>(n) + 1);
  for (std::int64_t k = 0; k < n; ++k) {
    const cplx z = out.xi.back();
    if (z.real() > x_escape) {
      out.truncated_at = k;
      break;
    }
    const cplx e = std::exp(z);
    out.xi.push_back(p.lambda * e);
    out.dxi.push_back(e * (1.0 + p.lambda * out.dxi.back()));
  }
  return out;
}

struct misiurewicz_certificate {
  param lambda{1.0, 0.0};  // placeholder until certified
  std::int64_t preperiod = 1;       // k >= 1
  std::int64_t period = 1;          // p >= 1
  double residual = 0;              // |xi_{k+p} - xi_k|
  double cycle_mult_log_mod = 0;    // > 0 (repelling)
  double postsingular_bound = 0;    // max |xi_j| over the postsingular set
};

enum class misiurewicz_error {
  no_convergence,
  not_repelling,
  below_modulus_bound,
};

inline const char* to_string(misiurewicz_error e) {
  switch (e) {
    case misiurewicz_error::no_convergence: return "no_convergence";
    case misiurewicz_error::not_repelling: return "not_repelling";
    case misiurewicz_error::below_modulus_bound: return "below_modulus_bound";
  }
  return "?";
}

namespace detail {

// log|Df^p| along the cycle starting at xi[k].
inline double cycle_log_mod(const param& p, const std::vector<cplx>& xi,
                            std::int64_t k, std::int64_t per) {
  double m = 0;
  for (std::int64_t j = k; j < k + per; ++j)
    m += p.log_mod() + xi[static_cast<std::size_t>(j)].real();
  return m;
}

}  // namespace detail

// Damped Newton on G(lambda) = xi_{k+p}(lambda) - xi_k(lambda), using the
// dxi recursion for G'. The solution is relabeled with the minimal (k, p)
// pair that already satisfies the preperiodic relation, since any multiple
// satisfies it too. residual_history records |G| per accepted step.
inline result<misiurewicz_certificate, misiurewicz_error> solve_misiurewicz(
    const param& seed, std::int64_t k, std::int64_t p, double tol,
    double x_escape = default_x_escape,
    std::vector<double>* residual_history = nullptr) {
  if (k < 1 || p < 1)
    throw std::invalid_argument("solve_misiurewicz: need k, p >= 1");
  cplx lam = seed.lambda;
  const auto eval = [&](cplx l) -> std::optional<std::pair<cplx, cplx>> {
    if (!is_finite(l) || l == cplx{}) return std::nullopt;
    auto orb = xi_orbit(param(l), k + p, x_escape);
    if (orb.truncated_at) return std::nullopt;
    const auto uk = static_cast<std::size_t>(k);
    const auto ukp = static_cast<std::size_t>(k + p);
    return std::make_pair(orb.xi[ukp] - orb.xi[uk],
                          orb.dxi[ukp] - orb.dxi[uk]);
  };

  auto cur = eval(lam);
  if (!cur) return misiurewicz_error::no_convergence;
  double res = std::abs(cur->first);
  if (residual_history) residual_history->push_back(res);
  bool converged = res < tol;

  for (int it = 0; it < 64 && !converged; ++it) {
    const cplx G = cur->first;
    const cplx dG = cur->second;
    if (std::abs(dG) < 1e-300) return misiurewicz_error::no_convergence;
    cplx step = -G / dG;
    // step halving when |G| does not decrease: xi_n oscillates violently
    // in lambda and full steps overshoot
    bool accepted = false;
    for (int h = 0; h < 8; ++h) {
      const cplx trial = lam + step;
      auto next = eval(trial);
      if (next && std::abs(next->first) < res) {
        lam = trial;
        cur = next;
        res = std::abs(cur->first);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return misiurewicz_error::no_convergence;
    if (residual_history) residual_history->push_back(res);
    if (res < tol) converged = true;
  }
  if (!converged) return misiurewicz_error::no_convergence;

  const param lambda{lam};
  auto orb = xi_orbit(lambda, k + p, x_escape);
  if (orb.truncated_at) return misiurewicz_error::no_convergence;

  // minimal-pair relabeling: smallest period divisor first, then the
  // smallest preperiod that satisfies the relation at matching tolerance
  std::int64_t k_min = k, p_min = p;
  for (std::int64_t pd = 1; pd <= p; ++pd) {
    if (p % pd != 0) continue;
    bool found = false;
    for (std::int64_t kd = 1; kd <= k; ++kd) {
      const auto a = static_cast<std::size_t>(kd + pd);
      const auto b = static_cast<std::size_t>(kd);
      const double r = std::abs(orb.xi[a] - orb.xi[b]);
      if (r <= 10 * tol * std::max(1.0, std::abs(orb.xi[b]))) {
        k_min = kd;
        p_min = pd;
        found = true;
        break;
      }
    }
    if (found) break;
  }

  misiurewicz_certificate cert;
  cert.lambda = lambda;
  cert.preperiod = k_min;
  cert.period = p_min;
  cert.residual = std::abs(orb.xi[static_cast<std::size_t>(k_min + p_min)] -
                           orb.xi[static_cast<std::size_t>(k_min)]);
  cert.cycle_mult_log_mod = detail::cycle_log_mod(lambda, orb.xi, k_min, p_min);
  if (cert.cycle_mult_log_mod <= 0) return misiurewicz_error::not_repelling;
  if (std::abs(lam) <= 1.0 / std::exp(1.0))
    return misiurewicz_error::below_modulus_bound;
  double bound = 0;
  for (std::int64_t j = 0; j < k_min + p_min; ++j)
    bound = std::max(bound, std::abs(orb.xi[static_cast<std::size_t>(j)]));
  cert.postsingular_bound = bound;
  return cert;
}

// Postsingular points {0, xi_1, ..., xi_{k+p-1}} of a certified parameter.
inline std::vector<cplx> postsingular_points(
    const misiurewicz_certificate& cert) {
  auto orb = xi_orbit(cert.lambda, cert.preperiod + cert.period);
  orb.xi.pop_back();
  return orb.xi;
}

struct verify_report {
  bool verified = false;
  double landing_error = 0;   // |xi_k - w*| against the refined cycle point
  double drift_per_period = 0;  // max |f^p(w) - w*| while shadowing w*
  std::int64_t periods_checked = 0;
  std::optional<std::int64_t> first_failing_index;
};

// Re-derives everything from scratch: iterates xi afresh, Newton-refines
// the cycle point near xi_k, and checks that the singular orbit lands on
// that exact cycle within the certified residual. Long raw re-iteration
// would diverge (the cycle is repelling), so each period is re-seeded on
// the refined point and only the per-period drift is accumulated.
inline verify_report verify_misiurewicz(const misiurewicz_certificate& cert,
                                        std::int64_t horizon,
                                        double x_escape = default_x_escape) {
  const std::int64_t k = cert.preperiod, p = cert.period;
  if (horizon < k + p)
    throw std::invalid_argument("verify_misiurewicz: horizon < k + p");
  verify_report rep;
  auto orb = xi_orbit(cert.lambda, k + p, x_escape);
  if (orb.truncated_at) {
    rep.first_failing_index = *orb.truncated_at;
    return rep;
  }
  const cplx xi_k = orb.xi[static_cast<std::size_t>(k)];

  auto refined = refine_cycle(cert.lambda, xi_k, p, 1e-13, x_escape);
  if (!refined) {
    rep.first_failing_index = k;
    return rep;
  }
  const cplx w_star = refined.value();

  const double growth = std::exp(cert.cycle_mult_log_mod);
  const double scale = std::max(1.0, std::abs(xi_k));
  const double allowed =
      10 * std::max(cert.residual, 1e-15 * scale) * std::max(1.0, growth);
  rep.landing_error = std::abs(xi_k - w_star);
  if (rep.landing_error > allowed) {
    rep.first_failing_index = k;
    return rep;
  }

  // shadow the refined cycle point out to the horizon
  cplx w = w_star;
  for (std::int64_t start = k; start + p <= horizon; start += p) {
    for (std::int64_t j = 0; j < p; ++j) {
      if (w.real() > x_escape) {
        rep.first_failing_index = start + j;
        return rep;
      }
      w = cert.lambda.lambda * std::exp(w);
    }
    const double drift = std::abs(w - w_star);
    rep.drift_per_period = std::max(rep.drift_per_period, drift);
    ++rep.periods_checked;
    if (drift > allowed) {
      rep.first_failing_index = start + p;
      return rep;
    }
    w = w_star;  // re-synchronize
  }
  rep.verified = true;
  return rep;
}

struct constant_violation {
  cplx z;
  std::int64_t k = 0;
  double value = 0;  // the offending quantity
};

// Empirically fitted versions of the derivative-growth constants: M such
// that |f^k(z)| >= M forces |Df^k(z)| > 3; beta1 with |Df^k(z)| >=
// beta1 * inf_j |f^j(z)|; (N, c) such that some j <= N + c|log|f(z)||
// has |Df^j(z)| > 3; and (n0, alpha) with |Df^{n0}| > e^alpha on the
// postsingular set.
struct estimated_constants {
  double M_hat = 3;
  double beta1_hat = std::numeric_limits<double>::infinity();
  std::int64_t N_hat = 0;
  double c_hat = 0;
  double alpha_hat = 0;
  std::int64_t n0_hat = 0;
  std::vector<constant_violation> violations;  // samples no fit can cover
  bool degenerate = false;                     // no usable samples
};

// Samples `samples` points uniformly in B(0, region_radius) around the
// certified parameter's plane, iterates each up to k_max, and fits the
// constants above. Identical seeds give identical reports; violations
// list samples where no j <= k_max reaches derivative 3 (the (N, c) fit
// cannot cover them).
inline estimated_constants estimate_constants(
    const misiurewicz_certificate& base, std::int64_t samples,
    double region_radius, std::int64_t k_max, std::uint64_t seed,
    double x_escape = default_x_escape) {
  if (samples < 1)
    throw std::invalid_argument("estimate_constants: samples < 1");
  const param& p = base.lambda;
  estimated_constants out;

  struct fit_case {
    double log_f = 0;   // |log|f(z)||
    std::int64_t j3 = -1;  // first j with |Df^j(z)| > 3
  };
  std::vector<fit_case> cases;
  cases.reserve(static_cast<std::size_t>(samples));
  bool any = false;

  for (std::int64_t i = 0; i < samples; ++i) {
    auto rng = substream(seed, static_cast<std::uint64_t>(i));
    // rejection-sample the disk
    cplx z;
    do {
      z = cplx(rng.uniform(-region_radius, region_radius),
               rng.uniform(-region_radius, region_radius));
    } while (std::abs(z) > region_radius);

    derivative_cocycle<double> cocycle;
    cplx w = z;
    double min_mod = std::numeric_limits<double>::infinity();
    fit_case fc;
    for (std::int64_t ks = 1; ks <= k_max; ++ks) {
      if (w.real() > x_escape) break;
      cocycle.accumulate(p, w);
      w = p.lambda * std::exp(w);
      if (w == cplx{}) break;
      any = true;
      const double mod = std::abs(w);
      min_mod = std::min(min_mod, mod);
      const double log_df = cocycle.log_mod;
      if (ks == 1) fc.log_f = std::abs(std::log(mod));
      // Mdev fit: track moduli reached while |Df^k| <= 3
      if (log_df <= std::log(3.0))
        out.M_hat = std::max(out.M_hat, mod * (1 + 1e-12));
      // mindev fit: largest beta1 consistent with every sample, computed
      // in log scale since |Df^k| spans far beyond double range
      out.beta1_hat =
          std::min(out.beta1_hat, std::exp(log_df - std::log(min_mod)));
      if (fc.j3 < 0 && log_df > std::log(3.0)) fc.j3 = ks;
    }
    if (fc.j3 < 0)
      out.violations.push_back({z, k_max, 0.0});
    else
      cases.push_back(fc);
  }

  if (!any) {
    out.degenerate = true;
    out.beta1_hat = 0;
    return out;
  }
  if (out.beta1_hat == std::numeric_limits<double>::infinity())
    out.beta1_hat = 0;

  // two-step (N, c) fit: N covers the samples with |log|f|| <= 1; c is the
  // smallest slope covering the rest
  std::int64_t n_hat = 0;
  bool have_small = false;
  for (const auto& fc : cases)
    if (fc.log_f <= 1.0) {
      n_hat = std::max(n_hat, fc.j3);
      have_small = true;
    }
  if (!have_small && !cases.empty()) {
    auto it = std::min_element(
        cases.begin(), cases.end(),
        [](const fit_case& a, const fit_case& b) { return a.j3 < b.j3; });
    n_hat = it->j3;
  }
  double c_hat = 0;
  for (const auto& fc : cases)
    if (fc.log_f > 1.0 && fc.j3 > n_hat)
      c_hat = std::max(c_hat, static_cast<double>(fc.j3 - n_hat) / fc.log_f);
  out.N_hat = n_hat;
  out.c_hat = c_hat;

  // (n0, alpha) on the stored postsingular points: first n0 whose minimal
  // log|Df^{n0}| over the set is positive
  const auto ps = postsingular_points(base);
  for (std::int64_t n0 = 1; n0 <= base.preperiod + base.period; ++n0) {
    double alpha = std::numeric_limits<double>::infinity();
    bool valid = true;
    for (const cplx& z : ps) {
      derivative_cocycle<double> cocycle;
      cplx w = z;
      for (std::int64_t j = 0; j < n0; ++j) {
        if (w.real() > x_escape) {
          valid = false;
          break;
        }
        cocycle.accumulate(p, w);
        w = p.lambda * std::exp(w);
      }
      if (!valid) break;
      alpha = std::min(alpha, cocycle.log_mod);
    }
    if (valid && alpha > 0) {
      out.n0_hat = n0;
      out.alpha_hat = alpha;
      break;
    }
  }
  return out;
}

}  // namespace expdyn
