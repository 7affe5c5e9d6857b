#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "expdyn/certify.hpp"
#include "expdyn/config.hpp"
#include "expdyn/core.hpp"
#include "expdyn/density.hpp"
#include "expdyn/measure.hpp"
#include "expdyn/misiurewicz.hpp"
#include "expdyn/render.hpp"
#include "expdyn/report.hpp"
#include "expdyn/transfer.hpp"

// Command-line surface. Exit codes: 0 success, 1 invalid input (usage on
// stderr), 2 numeric failure or exhausted budget on a command whose purpose
// is certification, and failed writes.

namespace expdyn::cli {

namespace detail {

inline std::vector<double> parse_doubles(const std::string& s,
                                         std::size_t expect = 0) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse number: " + item);
    }
    if (pos != item.size())
      throw std::invalid_argument("cannot parse number: " + item);
    out.push_back(v);
  }
  if (expect != 0 && out.size() != expect)
    throw std::invalid_argument("expected " + std::to_string(expect) +
                                " comma-separated values in: " + s);
  return out;
}

inline cplx parse_complex(const std::string& s) {
  const auto v = parse_doubles(s, 2);
  return {v[0], v[1]};
}

inline certify_options options_from(const config& cfg) {
  certify_options opt;
  opt.x_escape = cfg.x_escape_re;
  opt.eps_cycle_rel = cfg.eps_cycle_rel;
  opt.newton_tol = cfg.newton_tol;
  opt.transient = cfg.transient;
  opt.p_max = cfg.p_max;
  opt.trap_rho_factor = cfg.trap_rho_factor;
  return opt;
}

// Scans small (preperiod, period) pairs from the given seed parameter and
// returns the first certificate whose solution stays near the seed.
inline std::optional<misiurewicz_certificate> identify_misiurewicz(
    const param& seed, double tol, double x_escape) {
  for (std::int64_t p = 1; p <= 8; ++p)
    for (std::int64_t k = 1; k <= 8; ++k) {
      auto got = solve_misiurewicz(seed, k, p, tol, x_escape);
      if (!got) continue;
      const double dist = std::abs(got.value().lambda.lambda - seed.lambda);
      if (dist <= 0.1 * std::max(1.0, std::abs(seed.lambda)))
        return got.value();
    }
  return std::nullopt;
}

}  // namespace detail

inline int run_command(int argc, const char* const* argv,
                       std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  CLI::App app{"numerical laboratory for the exponential family lambda*e^z"};
  app.require_subcommand(1);

  config cfg;
  std::string config_path;
  if (const char* env = std::getenv("EXPDYN_CONFIG")) config_path = env;
  app.add_option("--config", config_path, "config file (key = value)");

  // classify
  auto* c_classify = app.add_subcommand("classify", "classify one parameter");
  std::string cl_lambda;
  std::string cl_json;
  c_classify->add_option("--lambda", cl_lambda, "parameter as RE,IM")
      ->required();
  c_classify->add_option("--json", cl_json, "write JSON report to PATH or -");

  // misiurewicz
  auto* c_mis = app.add_subcommand("misiurewicz",
                                   "solve for a Misiurewicz parameter");
  std::string mi_seed;
  std::int64_t mi_k = 1, mi_p = 1;
  std::string mi_out = "-";
  c_mis->add_option("--seed", mi_seed, "Newton seed as RE,IM")->required();
  c_mis->add_option("--preperiod", mi_k, "preperiod k >= 1")->required();
  c_mis->add_option("--period", mi_p, "period p >= 1")->required();
  c_mis->add_option("--out", mi_out, "output path (default stdout)");

  // density
  auto* c_den = app.add_subcommand("density", "hyperbolic density sweep");
  std::string de_center, de_radii, de_out = "-", de_csv;
  std::int64_t de_sectors = 8;
  double de_gamma = 0.5;
  bool de_annulus = false;
  std::optional<std::int64_t> de_samples;
  std::optional<std::uint64_t> de_seed;
  std::optional<unsigned> de_threads;
  c_den->add_option("--center", de_center, "center as RE,IM")->required();
  c_den->add_option("--radii", de_radii, "decreasing radii R1,R2,...")
      ->required();
  c_den->add_option("--samples", de_samples,
                    "samples per radius (default: config)");
  c_den->add_flag("--annulus", de_annulus, "sample an annulus, not a ball");
  c_den->add_option("--gamma", de_gamma, "inner radius fraction");
  c_den->add_option("--sectors", de_sectors, "number of sectors");
  c_den->add_option("--seed", de_seed, "override config seed");
  c_den->add_option("--threads", de_threads, "worker threads");
  c_den->add_option("--out", de_out, "JSON output path (default stdout)");
  c_den->add_option("--csv", de_csv, "per-sample CSV path");

  // entry-stats
  auto* c_ent = app.add_subcommand("entry-stats",
                                   "first-entry statistics to R(x)");
  std::string en_lambda, en_out = "-", en_csv;
  double en_x = 3;
  std::int64_t en_grid = 100, en_tmax = 100'000;
  c_ent->add_option("--lambda0", en_lambda, "parameter as RE,IM")->required();
  c_ent->add_option("--x", en_x, "half-plane level")->required();
  c_ent->add_option("--grid", en_grid, "samples per side")->required();
  c_ent->add_option("--tmax", en_tmax, "iteration budget")->required();
  c_ent->add_option("--out", en_out, "JSON output path (default stdout)");
  c_ent->add_option("--csv", en_csv, "per-sample CSV path");

  // deep-left
  auto* c_dl = app.add_subcommand("deep-left",
                                  "first-entry statistics to L(L1)");
  std::string dl_lambda, dl_out = "-";
  double dl_x = 3, dl_l1 = 0, dl_l2 = 0, dl_delta0 = 0.9;
  std::int64_t dl_grid = 100;
  std::optional<std::int64_t> dl_tmax;
  c_dl->add_option("--lambda0", dl_lambda, "parameter as RE,IM")->required();
  c_dl->add_option("--x", dl_x, "scale parameter")->required();
  c_dl->add_option("--L1", dl_l1, "entry level (negative)")->required();
  c_dl->add_option("--L2", dl_l2, "overshoot level (L2 <= L1)")->required();
  c_dl->add_option("--grid", dl_grid, "samples per side");
  c_dl->add_option("--tmax", dl_tmax, "iteration budget");
  c_dl->add_option("--delta0", dl_delta0, "sampling ball radius");
  c_dl->add_option("--out", dl_out, "JSON output path (default stdout)");

  // transfer
  auto* c_tr = app.add_subcommand("transfer",
                                  "transfer a backward orbit to lambda2");
  std::string tr_l1, tr_l2, tr_start, tr_out = "-", tr_csv;
  std::int64_t tr_n = 0;
  c_tr->add_option("--lambda1", tr_l1, "source parameter RE,IM")->required();
  c_tr->add_option("--lambda2", tr_l2, "target parameter RE,IM")->required();
  c_tr->add_option("--start", tr_start, "forward-orbit start RE,IM")
      ->required();
  c_tr->add_option("--n", tr_n, "orbit length")->required();
  c_tr->add_option("--out", tr_out, "JSON output path (default stdout)");
  c_tr->add_option("--csv", tr_csv, "per-step deviation CSV path");

  // constants
  auto* c_con = app.add_subcommand("constants",
                                   "estimate derivative-growth constants");
  std::string co_lambda, co_out = "-";
  std::int64_t co_kmax = 50;
  std::optional<std::int64_t> co_samples;
  double co_region = 10;
  c_con->add_option("--lambda0", co_lambda, "Misiurewicz parameter RE,IM")
      ->required();
  c_con->add_option("--samples", co_samples, "sample count (default: config)");
  c_con->add_option("--kmax", co_kmax, "iterations per sample");
  c_con->add_option("--region", co_region, "sampling ball radius");
  c_con->add_option("--out", co_out, "JSON output path (default stdout)");

  // cascade
  auto* c_cas = app.add_subcommand("cascade", "rightward square cascade");
  std::string ca_lambda, ca_square, ca_out = "-";
  double ca_x = 0, ca_mwork = 10;
  std::int64_t ca_kmax = 16;
  c_cas->add_option("--lambda0", ca_lambda, "parameter RE,IM")->required();
  c_cas->add_option("--square", ca_square, "grid square as J,K")->required();
  c_cas->add_option("--x", ca_x, "target level")->required();
  c_cas->add_option("--mwork", ca_mwork, "working level");
  c_cas->add_option("--kmax", ca_kmax, "maximum cascade length");
  c_cas->add_option("--out", ca_out, "JSON output path (default stdout)");

  // render
  auto* c_ren = app.add_subcommand("render", "render the parameter plane");
  std::string re_rect, re_px, re_out;
  std::optional<unsigned> re_threads;
  c_ren->add_option("--rect", re_rect, "rectangle X0,Y0,X1,Y1")->required();
  c_ren->add_option("--px", re_px, "pixels W,H")->required();
  c_ren->add_option("--out", re_out, "output PPM path")->required();
  c_ren->add_option("--threads", re_threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (!config_path.empty()) cfg = load_config_file(config_path);
    cfg.validate();
    const certify_options opt = detail::options_from(cfg);

    if (*c_classify) {
      const param lambda{detail::parse_complex(cl_lambda)};
      const classification c = classify(lambda, cfg.n_max, cfg.p_max, opt);
      if (cl_json.empty()) {
        out << "verdict=" << to_string(c.result);
        if (c.hyperbolic()) out << " period_or_n=" << c.period_or_n;
        out << " iterations=" << c.iterations_used << "\n";
      } else {
        write_report(to_json(c, lambda), cl_json, out);
      }
      return 0;
    }

    if (*c_mis) {
      const param seed{detail::parse_complex(mi_seed)};
      auto got = solve_misiurewicz(seed, mi_k, mi_p, cfg.newton_tol,
                                   cfg.x_escape_re);
      if (!got) {
        err << "misiurewicz: " << to_string(got.error()) << "\n";
        return 2;
      }
      write_report(to_json(got.value()), mi_out, out);
      return 0;
    }

    if (*c_den) {
      density_sweep_config dcfg;
      dcfg.radii = detail::parse_doubles(de_radii);
      dcfg.samples = de_samples.value_or(cfg.samples);
      dcfg.seed = de_seed.value_or(cfg.seed);
      dcfg.budget = cfg.n_max;
      dcfg.p_max = cfg.p_max;
      dcfg.certify = opt;
      if (de_threads) dcfg.threads = *de_threads;
      if (de_annulus) dcfg.annulus = annulus_shape{de_gamma, de_sectors};
      const param center{detail::parse_complex(de_center)};
      std::vector<density_sample_record> records;
      const auto rep =
          density_sweep(center, dcfg, de_csv.empty() ? nullptr : &records);
      write_report(to_json(rep), de_out, out);
      if (!de_csv.empty()) write_text(density_samples_csv(records), de_csv, out);
      return 0;
    }

    if (*c_ent) {
      const param lambda{detail::parse_complex(en_lambda)};
      entry_stats_config ecfg;
      ecfg.x = en_x;
      ecfg.grid = en_grid;
      ecfg.t_max = en_tmax;
      ecfg.deriv_cap_log = std::min(std::pow(en_x, 9), 600.0);
      ecfg.x_escape = cfg.x_escape_re;
      std::vector<entry_sample_record> records;
      const auto rep = entry_stats(lambda, sample_domain{disk{cplx{0, 0}, 1.0}},
                                   ecfg, en_csv.empty() ? nullptr : &records);
      write_report(to_json(rep, lambda, ecfg), en_out, out);
      if (!en_csv.empty()) write_text(entry_samples_csv(records), en_csv, out);
      return 0;
    }

    if (*c_dl) {
      const param lambda{detail::parse_complex(dl_lambda)};
      entry_stats_config ecfg;
      ecfg.x = dl_x;
      ecfg.grid = dl_grid;
      ecfg.t_max = dl_tmax.value_or(cfg.n_max);
      ecfg.deriv_cap_log = std::min(std::pow(dl_x, 9), 600.0);
      ecfg.delta0 = dl_delta0;
      ecfg.x_escape = cfg.x_escape_re;
      const disk domain{lambda.lambda, dl_delta0};
      const auto rep =
          deep_left_stats(lambda, domain, dl_x, {dl_l1, dl_l2}, ecfg);
      write_report(to_json(rep, lambda, dl_x, {dl_l1, dl_l2}), dl_out, out);
      return 0;
    }

    if (*c_tr) {
      const param l1{detail::parse_complex(tr_l1)};
      const param l2{detail::parse_complex(tr_l2)};
      const cplx start = detail::parse_complex(tr_start);
      auto trace = iterate_orbit(l1, start, tr_n, std::nullopt,
                                 cfg.x_escape_re);
      if (trace.termination != orbit_end::budget_exhausted) {
        err << "transfer: forward orbit ended early ("
            << to_string(trace.termination) << ")\n";
        return 2;
      }
      auto back = build_backward_orbit(l1, trace);
      if (!back) {
        err << "transfer: orbit contains zero point\n";
        return 2;
      }
      auto res = transfer_backward_orbit(back.value(), l2);
      if (!res) {
        err << "transfer: " << to_string(res.error()) << "\n";
        return 2;
      }
      write_report(to_json(res.value(), l1, l2), tr_out, out);
      if (!tr_csv.empty())
        write_text(transfer_deviation_csv(res.value(), back.value()), tr_csv,
                   out);
      return 0;
    }

    if (*c_con) {
      const param lambda{detail::parse_complex(co_lambda)};
      auto base =
          detail::identify_misiurewicz(lambda, cfg.newton_tol, cfg.x_escape_re);
      if (!base) {
        err << "constants: could not certify a Misiurewicz parameter near "
            << co_lambda << "\n";
        return 2;
      }
      const auto est =
          estimate_constants(*base, co_samples.value_or(cfg.samples),
                             co_region, co_kmax, cfg.seed, cfg.x_escape_re);
      json j;
      j["base"] = to_json(*base);
      j["constants"] = to_json(est);
      write_report(j, co_out, out);
      return 0;
    }

    if (*c_cas) {
      const param lambda{detail::parse_complex(ca_lambda)};
      const auto jk = detail::parse_doubles(ca_square, 2);
      grid_square q{static_cast<std::int64_t>(jk[0]),
                    static_cast<std::int64_t>(jk[1])};
      auto res = cascade_to_right(lambda, q, ca_x, ca_kmax, ca_mwork);
      if (!res) {
        err << "cascade: stuck in square (" << res.error().square.j << ","
            << res.error().square.k << ")\n";
        return 2;
      }
      write_report(to_json(res.value()), ca_out, out);
      return 0;
    }

    if (*c_ren) {
      const auto rect = detail::parse_doubles(re_rect, 4);
      const auto px = detail::parse_doubles(re_px, 2);
      render_spec spec;
      spec.x0 = rect[0];
      spec.y0 = rect[1];
      spec.x1 = rect[2];
      spec.y1 = rect[3];
      spec.width = static_cast<std::int64_t>(px[0]);
      spec.height = static_cast<std::int64_t>(px[1]);
      const std::string image =
          render_parameter_plane(cfg, spec, re_threads.value_or(0));
      std::ofstream f(re_out, std::ios::binary);
      if (!f) {
        err << "render: cannot open " << re_out << "\n";
        return 2;
      }
      f.write(image.data(), static_cast<std::streamsize>(image.size()));
      if (!f) {
        err << "render: write failed\n";
        return 2;
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace expdyn::cli
