#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "expdyn/core.hpp"

// Plain-text `key = value` configuration, UTF-8, `#` comments. Unknown
// keys are a parse error; command-line flags override file values.

namespace expdyn {

struct config {
  double x_escape_re = 50;
  std::int64_t n_max = 100'000;
  std::int64_t p_max = 512;
  std::int64_t transient = 10'000;
  double eps_cycle_rel = 1e-9;
  double newton_tol = 1e-12;
  double trap_rho_factor = 0.25;
  std::uint64_t seed = 1;
  std::int64_t samples = 1000;

  void validate() const {
    if (!(x_escape_re > 0) || n_max < 1 || p_max < 1 || transient < 1 ||
        !(eps_cycle_rel > 0) || !(newton_tol > 0) || !(trap_rho_factor > 0) ||
        samples < 1)
      throw std::invalid_argument("config: all values must be positive");
  }

  friend bool operator==(const config&, const config&) = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& v, const std::string& key) {
  std::istringstream in(v);
  T out;
  in >> out;
  if (in.fail() || !(in >> std::ws).eof())
    throw std::invalid_argument("config: bad value for " + key + ": " + v);
  return out;
}

}  // namespace detail

inline config parse_config(std::istream& in) {
  config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: missing '=' on line " +
                                  std::to_string(lineno));
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key == "x_escape_re")
      cfg.x_escape_re = detail::parse_number<double>(val, key);
    else if (key == "n_max")
      cfg.n_max = detail::parse_number<std::int64_t>(val, key);
    else if (key == "p_max")
      cfg.p_max = detail::parse_number<std::int64_t>(val, key);
    else if (key == "transient")
      cfg.transient = detail::parse_number<std::int64_t>(val, key);
    else if (key == "eps_cycle_rel")
      cfg.eps_cycle_rel = detail::parse_number<double>(val, key);
    else if (key == "newton_tol")
      cfg.newton_tol = detail::parse_number<double>(val, key);
    else if (key == "trap_rho_factor")
      cfg.trap_rho_factor = detail::parse_number<double>(val, key);
    else if (key == "seed")
      cfg.seed = detail::parse_number<std::uint64_t>(val, key);
    else if (key == "samples")
      cfg.samples = detail::parse_number<std::int64_t>(val, key);
    else
      throw std::invalid_argument("config: unknown key: " + key);
  }
  cfg.validate();
  return cfg;
}

inline config parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  return parse_config(in);
}

inline std::string serialize_config(const config& cfg) {
  std::ostringstream out;
  out << "x_escape_re = " << format_double(cfg.x_escape_re) << "\n"
      << "n_max = " << cfg.n_max << "\n"
      << "p_max = " << cfg.p_max << "\n"
      << "transient = " << cfg.transient << "\n"
      << "eps_cycle_rel = " << format_double(cfg.eps_cycle_rel) << "\n"
      << "newton_tol = " << format_double(cfg.newton_tol) << "\n"
      << "trap_rho_factor = " << format_double(cfg.trap_rho_factor) << "\n"
      << "seed = " << cfg.seed << "\n"
      << "samples = " << cfg.samples << "\n";
  return out.str();
}

}  // namespace expdyn
