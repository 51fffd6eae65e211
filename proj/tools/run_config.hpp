#pragma once

// JSON run configuration for the qmhd command-line front end.

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qmhd/qmhd.hpp"

namespace qmhd::cli {

using json = nlohmann::json;

struct RunConfig {
  Vec3 origin{0.0, 0.0, 0.0};
  Vec3 extent{1.0, 1.0, 1.0};
  Index3 n{8, 8, 8};

  double Re = 1.0, Rm = 1.0, mu0 = 1.0;
  std::optional<ExponentMode> exponent_mode;  // unset: mixed for banach, squared for schauder

  std::string boundary = "zero";  // "zero" or a boundary CSV path
  std::string forcing = "none";   // "none" or "manufactured"
  double forcing_amplitude = 1.0;

  SolverConfig solver;
  int constant_samples = 20;
  double budget_u_h1 = 0.1, budget_B_h1 = 0.1;
  int verify_samples = 5;

  std::string output = "qmhd_out";
  std::uint64_t seed = 1;

  ExponentMode effective_mode() const {
    if (exponent_mode) return *exponent_mode;
    return solver.method == SolverMethod::banach ? ExponentMode::mixed : ExponentMode::squared;
  }
};

inline const char* to_string(SolverMethod m) { return m == SolverMethod::banach ? "banach" : "schauder"; }

inline SolverMethod parse_method(const std::string& s) {
  if (s == "banach") return SolverMethod::banach;
  if (s == "schauder" || s == "schauder_neumann") return SolverMethod::schauder_neumann;
  throw std::invalid_argument("unknown solver method: " + s);
}

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw std::invalid_argument("unknown key '" + k + "' in " + where);
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline Vec3 read_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

/// Relative paths inside the file resolve against the file's directory.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (base / fp).lexically_normal().string();
  };

  RunConfig c;
  detail::reject_unknown(j, {"domain", "params", "boundary", "forcing", "solver", "constants", "verify", "output", "seed"},
                         "config");
  if (j.contains("domain")) {
    const auto& d = j["domain"];
    detail::reject_unknown(d, {"origin", "extent", "n"}, "domain");
    if (d.contains("origin")) c.origin = detail::read_vec3(d["origin"]);
    if (d.contains("extent")) c.extent = detail::read_vec3(d["extent"]);
    if (d.contains("n")) {
      if (d["n"].is_number_integer()) {
        const int n = d["n"].get<int>();
        c.n = {n, n, n};
      } else {
        const auto& a = d["n"];
        if (!a.is_array() || a.size() != 3) throw std::invalid_argument("domain.n must be an integer or 3 integers");
        c.n = {a[0].get<int>(), a[1].get<int>(), a[2].get<int>()};
      }
    }
  }
  if (j.contains("params")) {
    const auto& p = j["params"];
    detail::reject_unknown(p, {"Re", "Rm", "mu0", "exponent_mode"}, "params");
    detail::read_if(p, "Re", c.Re);
    detail::read_if(p, "Rm", c.Rm);
    detail::read_if(p, "mu0", c.mu0);
    if (p.contains("exponent_mode")) c.exponent_mode = parse_exponent_mode(p["exponent_mode"].get<std::string>());
  }
  if (j.contains("boundary")) {
    const auto b = j["boundary"].get<std::string>();
    c.boundary = b == "zero" ? b : resolve(b);
  }
  if (j.contains("forcing")) {
    const auto& f = j["forcing"];
    detail::reject_unknown(f, {"type", "amplitude"}, "forcing");
    detail::read_if(f, "type", c.forcing);
    detail::read_if(f, "amplitude", c.forcing_amplitude);
    if (c.forcing != "none" && c.forcing != "manufactured")
      throw std::invalid_argument("forcing.type must be none or manufactured");
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    detail::reject_unknown(s,
                           {"method", "tol", "max_outer", "max_inner", "neumann_max_terms", "neumann_term_tol",
                            "leray_each_step", "norm_iterations", "norm_tolerance", "pressure_tol", "pressure_max_iter"},
                           "solver");
    if (s.contains("method")) c.solver.method = parse_method(s["method"].get<std::string>());
    detail::read_if(s, "tol", c.solver.tol);
    detail::read_if(s, "max_outer", c.solver.max_outer);
    detail::read_if(s, "max_inner", c.solver.max_inner);
    detail::read_if(s, "neumann_max_terms", c.solver.neumann_max_terms);
    detail::read_if(s, "neumann_term_tol", c.solver.neumann_term_tol);
    detail::read_if(s, "leray_each_step", c.solver.leray_each_step);
    detail::read_if(s, "norm_iterations", c.solver.norm_iterations);
    detail::read_if(s, "norm_tolerance", c.solver.norm_tolerance);
    detail::read_if(s, "pressure_tol", c.solver.pressure_tol);
    detail::read_if(s, "pressure_max_iter", c.solver.pressure_max_iter);
  }
  if (j.contains("constants")) {
    const auto& k = j["constants"];
    detail::reject_unknown(k, {"samples", "budget_u_h1", "budget_B_h1"}, "constants");
    detail::read_if(k, "samples", c.constant_samples);
    detail::read_if(k, "budget_u_h1", c.budget_u_h1);
    detail::read_if(k, "budget_B_h1", c.budget_B_h1);
  }
  if (j.contains("verify")) {
    const auto& v = j["verify"];
    detail::reject_unknown(v, {"samples"}, "verify");
    detail::read_if(v, "samples", c.verify_samples);
  }
  if (j.contains("output")) c.output = resolve(j["output"].get<std::string>());
  else c.output = resolve(c.output);
  detail::read_if(j, "seed", c.seed);

  c.solver.validate();
  MHDParams check;
  check.Re = c.Re;
  check.Rm = c.Rm;
  check.mu0 = c.mu0;
  check.validate();
  if (c.constant_samples < 10) throw std::invalid_argument("constants.samples must be at least 10");
  if (c.verify_samples < 1) throw std::invalid_argument("verify.samples must be at least 1");
  return c;
}

/// The full default configuration, as written by `qmhd defaults`.
inline json defaults_json() {
  const RunConfig c;
  json j;
  j["domain"] = {{"origin", {c.origin[0], c.origin[1], c.origin[2]}},
                 {"extent", {c.extent[0], c.extent[1], c.extent[2]}},
                 {"n", {c.n[0], c.n[1], c.n[2]}}};
  j["params"] = {{"Re", c.Re}, {"Rm", c.Rm}, {"mu0", c.mu0}, {"exponent_mode", "mixed (banach) / squared (schauder)"}};
  j["boundary"] = c.boundary;
  j["forcing"] = {{"type", c.forcing}, {"amplitude", c.forcing_amplitude}};
  const auto& s = c.solver;
  j["solver"] = {{"method", to_string(s.method)},
                 {"tol", s.tol},
                 {"max_outer", s.max_outer},
                 {"max_inner", s.max_inner},
                 {"neumann_max_terms", s.neumann_max_terms},
                 {"neumann_term_tol", s.neumann_term_tol},
                 {"leray_each_step", s.leray_each_step},
                 {"norm_iterations", s.norm_iterations},
                 {"norm_tolerance", s.norm_tolerance},
                 {"pressure_tol", s.pressure_tol},
                 {"pressure_max_iter", s.pressure_max_iter}};
  j["constants"] = {{"samples", c.constant_samples}, {"budget_u_h1", c.budget_u_h1}, {"budget_B_h1", c.budget_B_h1}};
  j["verify"] = {{"samples", c.verify_samples}};
  j["output"] = c.output;
  j["seed"] = c.seed;
  return j;
}

inline DomainPtr make_domain(const RunConfig& c) {
  return build_domain(c.origin, c.extent, c.n);
}

inline MHDParams make_params(const RunConfig& c, const DomainPtr& d) {
  MHDParams p;
  p.Re = c.Re;
  p.Rm = c.Rm;
  p.mu0 = c.mu0;
  p.exponent_mode = c.effective_mode();
  if (c.boundary != "zero") p.boundary_h = read_boundary_csv(c.boundary, d);
  if (c.forcing == "manufactured") {
    auto [fu, fB] = manufactured_forcing(d, c.forcing_amplitude);
    p.force_u = std::move(fu);
    p.force_B = std::move(fB);
  }
  return p;
}

}  // namespace qmhd::cli
