#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "expdyn/certify.hpp"
#include "expdyn/config.hpp"
#include "expdyn/core.hpp"
#include "expdyn/parallel.hpp"

// Parameter-plane rendering: classify the parameter at each pixel center
// and emit a binary PPM (P6, maxval 255). Hyperbolic pixels cycle a small
// palette by period; the other verdicts get fixed colors.

namespace expdyn {

struct rgb {
  unsigned char r = 0, g = 0, b = 0;
};

struct render_spec {
  double x0 = -2, y0 = -2, x1 = 2, y1 = 2;
  std::int64_t width = 100, height = 100;
  rgb escape_color{20, 20, 40};
  rgb undecided_color{0, 0, 0};
  std::vector<rgb> period_palette{
      {230, 60, 50},  {60, 160, 230}, {90, 200, 90},  {240, 200, 60},
      {180, 90, 220}, {60, 210, 200}, {240, 130, 50}, {150, 150, 150},
  };

  void validate() const {
    if (!(x0 < x1) || !(y0 < y1) || width < 1 || height < 1 ||
        period_palette.empty())
      throw std::invalid_argument("render_spec: degenerate rectangle or size");
  }

  cplx pixel_center(std::int64_t i, std::int64_t j) const {
    // row 0 is the top of the image (y1 side)
    const double re =
        x0 + (static_cast<double>(i) + 0.5) * (x1 - x0) /
                 static_cast<double>(width);
    const double im =
        y1 - (static_cast<double>(j) + 0.5) * (y1 - y0) /
                 static_cast<double>(height);
    return {re, im};
  }

  rgb color_of(const classification& c) const {
    switch (c.result) {
      case verdict::escape_suspect: return escape_color;
      case verdict::undecided: return undecided_color;
      case verdict::hyperbolic:
        return period_palette[static_cast<std::size_t>(
            (c.period_or_n - 1) % static_cast<std::int64_t>(
                                      period_palette.size()))];
    }
    return undecided_color;
  }
};

inline std::string render_parameter_plane(const config& cfg,
                                          const render_spec& spec,
                                          unsigned threads = 0) {
  spec.validate();
  cfg.validate();
  certify_options opt;
  opt.x_escape = cfg.x_escape_re;
  opt.eps_cycle_rel = cfg.eps_cycle_rel;
  opt.newton_tol = cfg.newton_tol;
  opt.transient = cfg.transient;
  opt.trap_rho_factor = cfg.trap_rho_factor;

  const std::int64_t npx = spec.width * spec.height;
  std::vector<rgb> pixels(static_cast<std::size_t>(npx));
  parallel_for(
      npx,
      [&](std::int64_t ix) {
        const std::int64_t i = ix % spec.width;
        const std::int64_t j = ix / spec.width;
        const cplx lambda = spec.pixel_center(i, j);
        classification c;
        if (lambda == cplx{})  // 0 is outside the family
          c.result = verdict::undecided;
        else
          c = classify(param(lambda), cfg.n_max, cfg.p_max, opt);
        pixels[static_cast<std::size_t>(ix)] = spec.color_of(c);
      },
      threads);

  std::string out = "P6\n" + std::to_string(spec.width) + " " +
                    std::to_string(spec.height) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(npx) * 3);
  for (const rgb& p : pixels) {
    out.push_back(static_cast<char>(p.r));
    out.push_back(static_cast<char>(p.g));
    out.push_back(static_cast<char>(p.b));
  }
  return out;
}

}  // namespace expdyn
