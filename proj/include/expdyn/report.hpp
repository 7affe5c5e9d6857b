#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "expdyn/certify.hpp"
#include "expdyn/core.hpp"
#include "expdyn/density.hpp"
#include "expdyn/measure.hpp"
#include "expdyn/misiurewicz.hpp"
#include "expdyn/transfer.hpp"

// Deterministic serialization: key order is fixed by the schema (insertion
// order), floats print as shortest round-trip decimals, and reports must be
// NaN-free. Identical inputs give identical bytes.

namespace expdyn {

using json = nlohmann::ordered_json;

namespace detail {

inline void check_finite(const json& j, const std::string& where) {
  if (j.is_number_float()) {
    if (!std::isfinite(j.get<double>()))
      throw std::invalid_argument("report: non-finite value at " + where);
    return;
  }
  if (j.is_object())
    for (const auto& [k, v] : j.items()) check_finite(v, where + "/" + k);
  else if (j.is_array())
    for (std::size_t i = 0; i < j.size(); ++i)
      check_finite(j[i], where + "/" + std::to_string(i));
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace detail

inline std::string dump_report(const json& j) {
  detail::check_finite(j, "");
  return j.dump(2) + "\n";
}

// Writes to the path, or to the stream when path is "-".
inline void write_report(const json& j, const std::string& path,
                         std::ostream& stdout_stream) {
  const std::string body = dump_report(j);
  if (path == "-") {
    stdout_stream << body;
    if (!stdout_stream) throw std::runtime_error("report: write failed");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("report: cannot open " + path);
  out << body;
  if (!out) throw std::runtime_error("report: write failed: " + path);
}

inline void write_text(const std::string& body, const std::string& path,
                       std::ostream& stdout_stream) {
  if (path == "-") {
    stdout_stream << body;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("report: cannot open " + path);
  out << body;
  if (!out) throw std::runtime_error("report: write failed: " + path);
}

// --- certificates ---------------------------------------------------------

inline json to_json(const cycle_certificate& c) {
  json j;
  j["lambda"] = detail::complex_json(c.lambda.lambda);
  j["kind"] = "cycle";
  j["period"] = c.period;
  j["center"] = detail::complex_json(c.start.center);
  j["rho"] = c.start.radius;
  j["final_center"] = detail::complex_json(c.final_state.center);
  j["final_rho"] = c.final_state.radius;
  j["mult_log_mod"] = c.multiplier_log_mod;
  return j;
}

inline json to_json(const trap_ball_certificate& c) {
  json j;
  j["lambda"] = detail::complex_json(c.lambda.lambda);
  j["kind"] = "trap";
  j["n"] = c.n;
  j["center"] = detail::complex_json(cplx{0, 0});
  j["rho"] = c.rho;
  j["final_center"] = detail::complex_json(c.final_state.center);
  j["final_rho"] = c.final_state.radius;
  j["mult_log_mod"] = c.mult_log_mod;
  return j;
}

inline cplx complex_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

// Parses either certificate kind back from its JSON form.
inline std::variant<cycle_certificate, trap_ball_certificate>
certificate_from_json(const json& j) {
  const param lambda{complex_from_json(j.at("lambda"))};
  const disk final_state{complex_from_json(j.at("final_center")),
                         j.at("final_rho").get<double>()};
  if (j.at("kind") == "cycle") {
    cycle_certificate c{lambda,
                        j.at("period").get<std::int64_t>(),
                        disk{complex_from_json(j.at("center")),
                             j.at("rho").get<double>()},
                        final_state,
                        j.at("mult_log_mod").get<double>()};
    return c;
  }
  if (j.at("kind") == "trap") {
    trap_ball_certificate c{lambda,
                            j.at("n").get<std::int64_t>(),
                            final_state.center.real(),  // P re-derived below
                            j.at("rho").get<double>(),
                            final_state,
                            j.at("mult_log_mod").get<double>()};
    // P = Re(xi_n); recompute so the parsed certificate is self-contained
    auto orb = xi_orbit(lambda, c.n);
    c.P = orb.truncated_at ? 0.0
                           : orb.xi[static_cast<std::size_t>(c.n)].real();
    return c;
  }
  throw std::invalid_argument("certificate: unknown kind");
}

inline json to_json(const misiurewicz_certificate& c) {
  json j;
  j["lambda"] = detail::complex_json(c.lambda.lambda);
  j["preperiod"] = c.preperiod;
  j["period"] = c.period;
  j["residual"] = c.residual;
  j["mult_log_mod"] = c.cycle_mult_log_mod;
  j["ps_bound"] = c.postsingular_bound;
  return j;
}

inline misiurewicz_certificate misiurewicz_from_json(const json& j) {
  misiurewicz_certificate c;
  c.lambda = param{complex_from_json(j.at("lambda"))};
  c.preperiod = j.at("preperiod").get<std::int64_t>();
  c.period = j.at("period").get<std::int64_t>();
  c.residual = j.at("residual").get<double>();
  c.cycle_mult_log_mod = j.at("mult_log_mod").get<double>();
  c.postsingular_bound = j.at("ps_bound").get<double>();
  return c;
}

// --- reports --------------------------------------------------------------

inline json to_json(const classification& c, const param& lambda) {
  json j;
  j["lambda"] = detail::complex_json(lambda.lambda);
  j["verdict"] = to_string(c.result);
  if (c.result == verdict::hyperbolic) {
    j["period_or_n"] = c.period_or_n;
    if (const auto* cc = std::get_if<cycle_certificate>(&c.certificate))
      j["certificate"] = to_json(*cc);
    else if (const auto* tc =
                 std::get_if<trap_ball_certificate>(&c.certificate))
      j["certificate"] = to_json(*tc);
  } else {
    j["period_or_n"] = nullptr;
    j["certificate"] = nullptr;
  }
  j["iterations"] = c.iterations_used;
  return j;
}

inline json to_json(const density_report& r) {
  json j;
  j["center"] = detail::complex_json(r.center.lambda);
  j["seed"] = r.seed;
  j["budget"] = r.budget;
  j["samples"] = r.samples;
  if (r.annulus) {
    json a;
    a["gamma"] = r.annulus->gamma;
    a["sectors"] = r.annulus->sectors;
    j["annulus"] = a;
  } else {
    j["annulus"] = nullptr;
  }
  j["radii"] = json::array();
  for (const auto& row : r.rows) {
    json e;
    e["r"] = row.r;
    e["hyperbolic"] = row.hyperbolic;
    e["escape_suspect"] = row.escape_suspect;
    e["undecided"] = row.undecided;
    e["fraction"] = row.fraction;
    e["wilson_lo"] = row.wilson_lo;
    e["wilson_hi"] = row.wilson_hi;
    j["radii"].push_back(e);
  }
  return j;
}

inline json to_json(const entry_stats_report& r, const param& lambda,
                    const entry_stats_config& cfg) {
  json j;
  j["lambda0"] = detail::complex_json(lambda.lambda);
  j["x"] = cfg.x;
  j["grid"] = cfg.grid;
  j["t_max"] = cfg.t_max;
  j["deriv_cap_log"] = cfg.deriv_cap_log;
  j["total"] = r.total;
  j["entered"] = r.entered;
  j["fraction"] = r.fraction;
  j["n_quantiles"] = json::array({r.n_p50, r.n_p90, r.n_p99});
  j["deriv_quantiles"] =
      json::array({r.deriv_p50, r.deriv_p90, r.deriv_p99});
  j["within_theory_bounds"] = r.within_theory_bounds;
  return j;
}

inline json to_json(const deep_left_report& r, const param& lambda, double x,
                    std::pair<double, double> thresholds) {
  json j;
  j["lambda0"] = detail::complex_json(lambda.lambda);
  j["x"] = x;
  j["L1"] = thresholds.first;
  j["L2"] = thresholds.second;
  j["total"] = r.total;
  j["entered_left"] = r.entered_left;
  j["overshoot"] = r.overshoot;
  j["deriv_window"] = r.deriv_window;
  j["fraction_S0"] = r.fraction_S0;
  return j;
}

inline json to_json(const estimated_constants& c) {
  json j;
  j["M_hat"] = c.M_hat;
  j["beta1_hat"] = c.beta1_hat;
  j["N_hat"] = c.N_hat;
  j["c_hat"] = c.c_hat;
  j["alpha_hat"] = c.alpha_hat;
  j["n0_hat"] = c.n0_hat;
  j["degenerate"] = c.degenerate;
  j["violations"] = json::array();
  for (const auto& v : c.violations) {
    json e;
    e["z"] = detail::complex_json(v.z);
    e["k"] = v.k;
    e["value"] = v.value;
    j["violations"].push_back(e);
  }
  return j;
}

inline json to_json(const cascade_trace& t) {
  json j;
  j["lambda0"] = detail::complex_json(t.lambda0.lambda);
  j["y_levels"] = t.y_levels;
  j["squares"] = json::array();
  for (const auto& s : t.squares)
    j["squares"].push_back(json::array({s.j, s.k}));
  j["witness"] = detail::complex_json(t.witness);
  j["final_entry"] = t.final_entry;
  return j;
}

inline json to_json(const transfer_result& t, const param& l1,
                    const param& l2) {
  json j;
  j["lambda1"] = detail::complex_json(l1.lambda);
  j["lambda2"] = detail::complex_json(l2.lambda);
  j["n"] = t.y.size() - 1;
  j["beta"] = t.beta;
  j["max_dev"] = t.max_dev;
  j["log_deriv_ratio"] = detail::complex_json(t.log_deriv_ratio);
  return j;
}

// --- CSV ------------------------------------------------------------------

inline std::string density_samples_csv(
    const std::vector<density_sample_record>& rows) {
  std::ostringstream out;
  out << "lambda_re,lambda_im,verdict,period_or_n,iterations\n";
  for (const auto& r : rows)
    out << format_double(r.lambda.lambda.real()) << ','
        << format_double(r.lambda.lambda.imag()) << ','
        << to_string(r.result) << ',' << r.period_or_n << ',' << r.iterations
        << '\n';
  return out.str();
}

inline std::string entry_samples_csv(
    const std::vector<entry_sample_record>& rows) {
  std::ostringstream out;
  out << "z_re,z_im,n,log_deriv,landing_re\n";
  for (const auto& r : rows) {
    out << format_double(r.z.real()) << ',' << format_double(r.z.imag())
        << ',';
    if (r.n)
      out << *r.n << ',' << format_double(r.log_deriv) << ','
          << format_double(r.landing_re);
    else
      out << ",,";
    out << '\n';
  }
  return out.str();
}

inline std::string transfer_deviation_csv(const transfer_result& t,
                                          const backward_orbit& b) {
  std::ostringstream out;
  out << "k,abs_dev,abs_z\n";
  for (std::size_t k = 0; k < t.y.size(); ++k)
    out << k << ',' << format_double(std::abs(t.y[k] - b.z[k])) << ','
        << format_double(std::abs(b.z[k])) << '\n';
  return out.str();
}

}  // namespace expdyn
