#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "expdyn/core.hpp"
#include "expdyn/misiurewicz.hpp"
#include "expdyn/orbit.hpp"

// Orbit transfer between nearby parameters: given a backward orbit of
// g1 = f_{lambda1}, produce the conjugate backward orbit of g2 =
// f_{lambda2} with the same endpoint, tracking the deviation and the
// derivative ratio. Backward orbits are obtained by reversing forward
// traces, which sidesteps logarithm branch selection entirely; the
// transfer itself uses the principal branch with hard preconditions, since
// in the intended regime y_j/z_j stays near 1 and any branch excursion
// signals hypothesis failure.

namespace expdyn {

// z_0 ... z_n with g1(z_{j+1}) = z_j; z_n is the deep preimage.
struct backward_orbit {
  param lambda1;
  std::vector<cplx> z;
};

enum class backward_error { zero_point };

inline result<backward_orbit, backward_error> build_backward_orbit(
    const param& p, const orbit_trace<double>& trace) {
  for (const cplx& pt : trace.points)
    if (pt == cplx{}) return backward_error::zero_point;
  backward_orbit b{p, {trace.points.rbegin(), trace.points.rend()}};
  return b;
}

struct transfer_result {
  std::vector<cplx> y;     // y_0 ... y_n, y_0 = z_0
  double beta = 0;         // |Log(lambda1/lambda2)|
  double max_dev = 0;      // max_k |y_k - z_k|
  cplx log_deriv_ratio;    // sum_{j<n} Log(y_j / z_j)
};

enum class transfer_error { branch_violation, deviation_blowup };

inline const char* to_string(transfer_error e) {
  return e == transfer_error::branch_violation ? "branch_violation"
                                               : "deviation_blowup";
}

// Closed-form recursion y_0 = z_0, y_k = z_k + Log(l1/l2) + Log(y_{k-1} /
// z_{k-1}). This gives g2(y_k) = y_{k-1} exactly:
//   l2 e^{y_k} = l2 e^{z_k} (l1/l2)(y_{k-1}/z_{k-1}) = z_{k-1} y_{k-1}/z_{k-1},
// so residuals are pure round-off.
inline result<transfer_result, transfer_error> transfer_backward_orbit(
    const backward_orbit& b, const param& lambda2) {
  // bit-equal operands must give a ratio of exactly 1: complex division
  // leaves a round-off residue in the imaginary part otherwise, and the
  // identity case is contractually exact
  const auto exact_ratio = [](cplx a, cplx bb) {
    return a == bb ? cplx{1, 0} : a / bb;
  };
  const cplx log_ratio =
      std::log(exact_ratio(b.lambda1.lambda, lambda2.lambda));
  const double beta = std::abs(log_ratio);
  if (!(beta < 0.1))
    throw std::invalid_argument(
        "transfer_backward_orbit: |Log(lambda1/lambda2)| must be < 0.1");
  transfer_result out;
  out.beta = beta;
  out.y.reserve(b.z.size());
  out.y.push_back(b.z[0]);
  out.log_deriv_ratio = 0;
  for (std::size_t k = 1; k < b.z.size(); ++k) {
    const cplx q = exact_ratio(out.y[k - 1], b.z[k - 1]);
    if (std::abs(q - 1.0) >= 0.5) return transfer_error::deviation_blowup;
    const cplx corr = std::log(q);
    if (std::abs(corr) >= two_pi / 4) return transfer_error::branch_violation;
    out.log_deriv_ratio += corr;
    const cplx yk = b.z[k] + log_ratio + corr;
    const double dev = std::abs(yk - b.z[k]);
    if (dev >= 0.5 * std::abs(b.z[k])) return transfer_error::deviation_blowup;
    out.max_dev = std::max(out.max_dev, dev);
    out.y.push_back(yk);
  }
  return out;
}

enum class xi_inverse_error { no_convergence, singular_derivative };

// Newton inversion of xi_n: finds lambda with xi_n(lambda) = target. This
// is the primitive behind mapping phase-space targets back to parameters.
inline result<param, xi_inverse_error> solve_xi_inverse(
    const param& seed, std::int64_t n, cplx target, double tol,
    double x_escape = default_x_escape) {
  if (n < 1) throw std::invalid_argument("solve_xi_inverse: n < 1");
  cplx lam = seed.lambda;
  const auto eval = [&](cplx l) -> std::optional<std::pair<cplx, cplx>> {
    if (!is_finite(l) || l == cplx{}) return std::nullopt;
    auto orb = xi_orbit(param(l), n, x_escape);
    if (orb.truncated_at) return std::nullopt;
    return std::make_pair(orb.xi[static_cast<std::size_t>(n)] - target,
                          orb.dxi[static_cast<std::size_t>(n)]);
  };
  auto cur = eval(lam);
  if (!cur) return xi_inverse_error::no_convergence;
  double res = std::abs(cur->first);
  const double goal = tol * std::max(1.0, std::abs(target));
  for (int it = 0; it < 64 && res > goal; ++it) {
    if (!is_finite(cur->second) || std::abs(cur->second) < 1e-300)
      return xi_inverse_error::singular_derivative;
    cplx step = -cur->first / cur->second;
    bool accepted = false;
    for (int h = 0; h < 8; ++h) {
      auto next = eval(lam + step);
      if (next && std::abs(next->first) < res) {
        lam += step;
        cur = next;
        res = std::abs(cur->first);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return xi_inverse_error::no_convergence;
  }
  if (res > goal) return xi_inverse_error::no_convergence;
  return param(lam);
}

}  // namespace expdyn
