#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "expdyn/measure.hpp"
#include "expdyn/orbit.hpp"

using namespace expdyn;
using Catch::Approx;

namespace {
const param lam_2pii{0.0, two_pi};
}

TEST_CASE("cascade_to_right: one exponential hop past the target level") {
  const grid_square q = square_of(cplx{20, 0});
  const auto r = cascade_to_right(lam_2pii, q, 100.0, 10);
  REQUIRE(r);
  const auto& t = r.value();
  REQUIRE(t.y_levels.front() == q.lo().real());
  REQUIRE(t.y_levels.back() >= 100.0);
  REQUIRE(t.y_levels.size() - 1 <= 3);
  for (std::size_t k = 0; k + 1 < t.y_levels.size(); ++k) {
    REQUIRE(t.y_levels[k] < t.y_levels[k + 1]);
    REQUIRE(std::exp(t.y_levels[k] / 2) < t.y_levels[k + 1]);
    REQUIRE(t.y_levels[k + 1] <
            std::exp(7.0) * std::abs(lam_2pii.lambda) *
                std::exp(t.y_levels[k]));
  }
  // the witness point's image lands in the recorded final square
  const cplx w = lam_2pii.lambda * std::exp(t.witness);
  REQUIRE(t.squares.back().contains(w));
}

TEST_CASE("cascade_to_right: already past the level gives a trivial trace") {
  const grid_square q = square_of(cplx{20, 0});
  const auto r = cascade_to_right(lam_2pii, q, 15.0, 10);
  REQUIRE(r);
  REQUIRE(r.value().y_levels.size() == 1);
  REQUIRE(r.value().squares.size() == 1);
  REQUIRE(r.value().final_entry == 0);
}

TEST_CASE("cascade_to_right: squares straddling the working level are rejected") {
  const grid_square q = square_of(cplx{7, 0});  // [2pi, 4pi) straddles 10
  REQUIRE_THROWS_AS(cascade_to_right(lam_2pii, q, 100.0, 10),
                    std::invalid_argument);
}

TEST_CASE("entry_stats: a positive fraction reaches R(3) from the unit disk") {
  entry_stats_config cfg;
  cfg.x = 3;
  cfg.grid = 30;
  cfg.t_max = 10'000;
  const auto rep =
      entry_stats(lam_2pii, sample_domain{disk{cplx{0, 0}, 1.0}}, cfg);
  REQUIRE(rep.total > 0);
  REQUIRE(rep.entered > 0);
  REQUIRE(rep.fraction > 0);
  REQUIRE(rep.fraction <= 1.0);
  REQUIRE(rep.n_p50 <= rep.n_p90);
  REQUIRE(rep.n_p90 <= rep.n_p99);
}

TEST_CASE("entry_stats: fraction is non-increasing in the level x") {
  entry_stats_config a, b;
  a.x = 3;
  b.x = 4;
  a.grid = b.grid = 25;
  a.t_max = b.t_max = 5'000;
  const sample_domain dom{disk{cplx{0, 0}, 1.0}};
  const auto ra = entry_stats(lam_2pii, dom, a);
  const auto rb = entry_stats(lam_2pii, dom, b);
  REQUIRE(rb.entered <= ra.entered);
  REQUIRE(rb.fraction <= ra.fraction);
}

TEST_CASE("entry_stats: entered is non-decreasing in the budget") {
  entry_stats_config a, b;
  a.x = b.x = 4;
  a.grid = b.grid = 25;
  a.t_max = 500;
  b.t_max = 5'000;
  const sample_domain dom{disk{cplx{0, 0}, 1.0}};
  REQUIRE(entry_stats(lam_2pii, dom, a).entered <=
          entry_stats(lam_2pii, dom, b).entered);
}

TEST_CASE("entry_stats: deterministic grid sampling") {
  entry_stats_config cfg;
  cfg.x = 3;
  cfg.grid = 20;
  cfg.t_max = 2'000;
  const sample_domain dom{disk{cplx{0, 0}, 1.0}};
  const auto a = entry_stats(lam_2pii, dom, cfg);
  const auto b = entry_stats(lam_2pii, dom, cfg);
  REQUIRE(a.entered == b.entered);
  REQUIRE(a.fraction == b.fraction);
  REQUIRE(a.n_p99 == b.n_p99);
  REQUIRE(a.deriv_p99 == b.deriv_p99);
  REQUIRE(a.within_theory_bounds == b.within_theory_bounds);
}

TEST_CASE("entry_stats: dyadic-square domains sample the square") {
  entry_stats_config cfg;
  cfg.x = 2;
  cfg.grid = 10;
  cfg.t_max = 1'000;
  const dyadic_square d{1, 0, 0};  // [0, 1/2) x [0, 1/2)
  const auto rep = entry_stats(lam_2pii, sample_domain{d}, cfg);
  REQUIRE(rep.total == 100);
}

TEST_CASE("deep_left_stats: deep entries exist and bullets are counted") {
  entry_stats_config cfg;
  cfg.x = 3;
  cfg.grid = 40;
  cfg.t_max = 10'000;
  cfg.deriv_cap_log = std::min(std::pow(3.0, 9), 600.0);
  const disk domain{cplx{0, two_pi}, 0.9};
  const double L1 = -std::exp(3.0);
  const double L2 = -std::exp(3.0 + std::sqrt(3.0));
  const auto rep = deep_left_stats(lam_2pii, domain, 3.0, {L1, L2}, cfg);
  REQUIRE(rep.total > 0);
  REQUIRE(rep.entered_left > 0);
  REQUIRE(rep.overshoot <= rep.entered_left);
  REQUIRE(rep.fraction_S0 > 0);
  REQUIRE(rep.fraction_S0 <= 1.0);
}

TEST_CASE("deep_left_stats: degenerate thresholds make overshoot total") {
  entry_stats_config cfg;
  cfg.x = 3;
  cfg.grid = 20;
  cfg.t_max = 5'000;
  const disk domain{cplx{0, two_pi}, 0.9};
  const double L1 = -std::exp(3.0);
  const auto rep = deep_left_stats(lam_2pii, domain, 3.0, {L1, L1}, cfg);
  REQUIRE(rep.overshoot == rep.entered_left);
}

TEST_CASE("deep_left_stats: threshold ordering is validated") {
  entry_stats_config cfg;
  const disk domain{cplx{0, two_pi}, 0.9};
  REQUIRE_THROWS_AS(
      deep_left_stats(lam_2pii, domain, 3.0, {-5.0, -1.0}, cfg),
      std::invalid_argument);
}

TEST_CASE("dyadic refinement: uncaptured area is the product of round misses") {
  // capture rule: the square's center reaches R(2) within 300 steps
  const auto captured = [&](const dyadic_square& d) {
    return first_entry(lam_2pii, d.center(), half_plane::right(2.0), 300)
        .has_value();
  };
  std::vector<dyadic_square> frontier{dyadic_square{1, 0, 0}};
  const double total = frontier[0].area();
  double uncaptured = total;
  double worst_q = 1.0;
  for (int round = 0; round < 4; ++round) {
    std::vector<dyadic_square> next;
    double captured_area = 0;
    for (const auto& d : frontier)
      for (const auto& c : d.children()) {
        if (captured(c))
          captured_area += c.area();
        else
          next.push_back(c);
      }
    const double q = captured_area / uncaptured;
    worst_q = std::min(worst_q, q);
    double next_area = 0;
    for (const auto& d : next) next_area += d.area();
    // direct counting matches the area recursion exactly
    REQUIRE(next_area == Approx(uncaptured - captured_area).margin(1e-15));
    uncaptured = next_area;
    frontier = std::move(next);
    REQUIRE(uncaptured <=
            total * std::pow(1 - worst_q, round + 1) + 1e-12);
  }
  REQUIRE(worst_q > 0);
}
