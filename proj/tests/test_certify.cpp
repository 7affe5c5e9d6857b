#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "expdyn/certify.hpp"
#include "expdyn/rng.hpp"

using namespace expdyn;
using Catch::Approx;

namespace {

const param lam_2pii{0.0, two_pi};

// independent 1-D root oracles for the real fixed points lambda*e^x = x
double bisect_fixed_point(double lambda, double lo, double hi) {
  auto g = [&](double x) { return lambda * std::exp(x) - x; };
  REQUIRE(g(lo) * g(hi) < 0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(lo) * g(mid) <= 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// frozen from the oracle above
constexpr double omega_fixed_point = -0.5671432904097838;
constexpr double fixed_point_03 = 0.4894022271802150;

}  // namespace

TEST_CASE("root oracles reproduce the frozen constants") {
  REQUIRE(bisect_fixed_point(-1.0, -1.0, 0.0) ==
          Approx(omega_fixed_point).margin(1e-14));
  REQUIRE(bisect_fixed_point(0.3, 0.0, 1.0) ==
          Approx(fixed_point_03).margin(1e-14));
}

TEST_CASE("propagate_disk: points map to points") {
  const auto d = propagate_disk(param{1.0, 0.0}, disk{cplx{0, 0}, 0.0});
  REQUIRE(d.center == cplx(1, 0));
  REQUIRE(d.radius == 0.0);
}

TEST_CASE("propagate_disk: radius follows |f(c)| (e^rho - 1)") {
  const auto d = propagate_disk(param{1.0, 0.0}, disk{cplx{0, 0}, 1.0});
  REQUIRE(d.center == cplx(1, 0));
  REQUIRE(d.radius ==
          Approx((std::exp(1.0) - 1) * disk_inflation).epsilon(1e-15));
}

TEST_CASE("propagate_disk: contraction at the Omega fixed point") {
  const disk in{cplx{omega_fixed_point, 0}, 0.1};
  const auto out = propagate_disk(param{-1.0, 0.0}, in);
  REQUIRE(std::abs(out.center - in.center) < 1e-15);
  REQUIRE(out.radius == Approx(0.059646).margin(1e-5));
  REQUIRE(strictly_inside(out, in));
}

TEST_CASE("propagate_disk: escape precondition") {
  REQUIRE_THROWS_AS(propagate_disk(param{1.0, 0.0}, disk{cplx{49, 0}, 2.0}),
                    escape_error);
}

TEST_CASE("propagate_disk: soundness on random disks and points") {
  xoshiro256pp rng(0xD1u);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const param p{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    if (std::abs(p.lambda) < 1e-3) continue;
    const disk d{cplx(rng.uniform(-10, 10), rng.uniform(-10, 10)),
                 rng.uniform(0, 1)};
    const auto img = propagate_disk(p, d);
    for (int k = 0; k < 50; ++k) {
      const double rho = d.radius * std::sqrt(rng.uniform());
      const double th = rng.uniform(0, two_pi);
      const cplx w = d.center + std::polar(rho, th);
      if (!img.contains(step(p, w))) ++violations;
    }
  }
  REQUIRE(violations == 0);
}

TEST_CASE("detect_cycle: converged real orbit") {
  const auto t = iterate_orbit(param{-1.0, 0.0}, cplx{0, 0}, 200);
  const auto c = detect_cycle(t, 1e-9);
  REQUIRE(c);
  REQUIRE(c->first == 1);
  REQUIRE(std::abs(c->second - cplx(omega_fixed_point, 0)) < 1e-6);
}

TEST_CASE("detect_cycle: exact fixed-point hit, later rejected as repelling") {
  const auto t = iterate_orbit(lam_2pii, cplx{0, 0}, 8);
  const auto c = detect_cycle(t, 1e-9);
  REQUIRE(c);
  REQUIRE(c->first == 1);
  REQUIRE(std::abs(c->second - cplx(0, two_pi)) < 1e-8);
  const auto cert = certify_attracting(lam_2pii, c->second, 1);
  REQUIRE(!cert);
  REQUIRE(cert.error() == certify_error::not_contractive);
}

TEST_CASE("detect_cycle: escaping orbit yields nothing") {
  const auto t = iterate_orbit(param{1.0, 0.0}, cplx{0, 0}, 200);
  REQUIRE(t.termination == orbit_end::escaped_right);
  REQUIRE(!detect_cycle(t, 1e-9));
}

TEST_CASE("refine_cycle: Omega fixed point") {
  const auto r = refine_cycle(param{-1.0, 0.0}, cplx{-0.56, 0}, 1, 1e-12);
  REQUIRE(r);
  REQUIRE(std::abs(r.value() - cplx(omega_fixed_point, 0)) < 1e-12);
}

TEST_CASE("refine_cycle: exact fixed point of 2*pi*i") {
  const auto r = refine_cycle(lam_2pii, cplx{0, 6.2}, 1, 1e-12);
  REQUIRE(r);
  REQUIRE(std::abs(r.value() - cplx(0, two_pi)) < 1e-11);
}

TEST_CASE("refine_cycle: lambda = 0.3 fixed point vs bisection oracle") {
  const auto r = refine_cycle(param{0.3, 0.0}, cplx{0.5, 0}, 1, 1e-12);
  REQUIRE(r);
  REQUIRE(std::abs(r.value() - cplx(fixed_point_03, 0)) < 1e-12);
}

TEST_CASE("certify_attracting: Omega fixed point certificate") {
  const auto cert =
      certify_attracting(param{-1.0, 0.0}, cplx{omega_fixed_point, 0}, 1);
  REQUIRE(cert);
  const auto& c = cert.value();
  REQUIRE(c.start.radius <= 0.5);
  // ln(Omega) = -Omega
  REQUIRE(c.multiplier_log_mod == Approx(omega_fixed_point).margin(1e-9));
  REQUIRE(reverify(c));
}

TEST_CASE("certify_attracting: lambda = 0.3 multiplier equals the fixed point") {
  const auto cert =
      certify_attracting(param{0.3, 0.0}, cplx{fixed_point_03, 0}, 1);
  REQUIRE(cert);
  REQUIRE(std::exp(cert.value().multiplier_log_mod) ==
          Approx(fixed_point_03).margin(1e-9));
  REQUIRE(reverify(cert.value()));
}

TEST_CASE("certificate soundness: points in the disk contract together") {
  const auto cert =
      certify_attracting(param{-1.0, 0.0}, cplx{omega_fixed_point, 0}, 1);
  REQUIRE(cert);
  const auto& c = cert.value();
  xoshiro256pp rng(0xD2u);
  std::vector<cplx> pts;
  for (int i = 0; i < 100; ++i) {
    const double rho = c.start.radius * std::sqrt(rng.uniform());
    pts.push_back(c.start.center + std::polar(rho, rng.uniform(0, two_pi)));
  }
  double before = 0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      before = std::max(before, std::abs(pts[a] - pts[b]));
  for (auto& w : pts)
    for (std::int64_t k = 0; k < c.period * 50; ++k)
      w = step(param{-1.0, 0.0}, w);
  double after = 0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      after = std::max(after, std::abs(pts[a] - pts[b]));
  REQUIRE(after * 2 <= before);
}

TEST_CASE("certify_trap_ball: no deep-left entry for the test parameters") {
  // idealized singular orbit of 2*pi*i has Re == 0 throughout; at short
  // budgets the computed orbit matches it
  auto r = certify_trap_ball(lam_2pii, 20);
  REQUIRE(!r);
  REQUIRE(r.error() == trap_error::no_deep_left_entry);
  // the -Omega orbit is only shallow-left: the cycle path must be used
  auto s = certify_trap_ball(param{-1.0, 0.0}, 100'000);
  REQUIRE(!s);
  REQUIRE(s.error() == trap_error::no_deep_left_entry);
}

TEST_CASE("certify_trap_ball: never certifies the Misiurewicz parameter") {
  auto r = certify_trap_ball(lam_2pii, 100'000);
  REQUIRE(!r);
}

TEST_CASE("classify: contraction parameter is hyperbolic of period 1") {
  const auto c = classify(param{0.3, 0.0}, 100'000, 512);
  REQUIRE(c.result == verdict::hyperbolic);
  REQUIRE(c.period_or_n == 1);
  const auto* cert = std::get_if<cycle_certificate>(&c.certificate);
  REQUIRE(cert);
  REQUIRE(std::abs(cert->start.center - cplx(fixed_point_03, 0)) < 1e-9);
  REQUIRE(reverify(*cert));
}

TEST_CASE("classify: lambda = -1 is hyperbolic with the Omega cycle") {
  const auto c = classify(param{-1.0, 0.0}, 100'000, 512);
  REQUIRE(c.result == verdict::hyperbolic);
  REQUIRE(c.period_or_n == 1);
  const auto* cert = std::get_if<cycle_certificate>(&c.certificate);
  REQUIRE(cert);
  REQUIRE(std::abs(cert->start.center - cplx(omega_fixed_point, 0)) < 1e-9);
}

TEST_CASE("classify: real escape") {
  const auto c = classify(param{1.0, 0.0}, 100'000, 512);
  REQUIRE(c.result == verdict::escape_suspect);
}

TEST_CASE("classify: parabolic guard at lambda = 1/e") {
  const auto c = classify(param{1.0 / std::exp(1.0), 0.0}, 100'000, 512);
  REQUIRE(c.result == verdict::undecided);
}

TEST_CASE("classify: Misiurewicz parameter never certifies") {
  const auto c = classify(lam_2pii, 100'000, 512);
  REQUIRE(c.result != verdict::hyperbolic);
}

TEST_CASE("classification soundness: every hyperbolic verdict re-verifies") {
  xoshiro256pp rng(0xD3u);
  int hyperbolic_seen = 0;
  for (int i = 0; i < 40; ++i) {
    const param p{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    if (std::abs(p.lambda) < 1e-3) continue;
    const auto c = classify(p, 20'000, 64);
    if (c.result != verdict::hyperbolic) continue;
    ++hyperbolic_seen;
    if (const auto* cc = std::get_if<cycle_certificate>(&c.certificate))
      REQUIRE(reverify(*cc));
    else if (const auto* tc =
                 std::get_if<trap_ball_certificate>(&c.certificate))
      REQUIRE(reverify(*tc));
    else
      FAIL("hyperbolic verdict without certificate");
  }
  REQUIRE(hyperbolic_seen > 0);
}
