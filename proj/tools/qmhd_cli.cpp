// qmhd: verify | constants | solve | defaults

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace qmhd;
using namespace qmhd::cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitRefused = 2;
constexpr int kExitDiverged = 3;

std::string fmt(double x) { return qmhd::detail::fmt17(x); }

Manifest base_manifest(const RunConfig& c, const std::string& command) {
  Manifest m;
  m["command"] = command;
  m["seed"] = std::to_string(c.seed);
  m["n"] = std::to_string(c.n[0]) + " " + std::to_string(c.n[1]) + " " + std::to_string(c.n[2]);
  m["origin"] = fmt(c.origin[0]) + " " + fmt(c.origin[1]) + " " + fmt(c.origin[2]);
  m["extent"] = fmt(c.extent[0]) + " " + fmt(c.extent[1]) + " " + fmt(c.extent[2]);
  m["Re"] = fmt(c.Re);
  m["Rm"] = fmt(c.Rm);
  m["mu0"] = fmt(c.mu0);
  m["exponent_mode"] = to_string(c.effective_mode());
  m["method"] = cli::to_string(c.solver.method);
  m["boundary"] = c.boundary;
  m["forcing"] = c.forcing + " " + fmt(c.forcing_amplitude);
  return m;
}

// ---------------------------------------------------------------------------
// verify

struct Check {
  std::string name;
  double measured;
  double tol;
  bool skipped = false;
  bool pass() const { return skipped || measured <= tol; }
};

int cmd_verify(const RunConfig& c) {
  const auto d = make_domain(c);
  const OperatorSet ops(d);
  std::mt19937_64 rng(c.seed);
  // discretisation errors are first order in h; 5% at h = 1/16, scaled linearly on coarser grids
  const double approx_tol = 0.05 * std::max(1.0, 16.0 * d->h() / std::max({c.extent[0], c.extent[1], c.extent[2]}));

  std::vector<Check> checks;
  const int deep = min_depth_for_distance(3.0);
  bool has_deep = false;
  for (std::size_t i = 0; i < d->size() && !has_deep; ++i) has_deep = d->depth(i) >= deep;

  double ri = 0.0, bp = 0.0, adj = 0.0, fac = 0.0;
  HodgeMeasurements hm;
  for (int s = 0; s < c.verify_samples; ++s) {
    const QField f = smooth_sample(d, rng, false);
    const QField g = smooth_sample(d, rng, true);
    if (has_deep) ri = std::max(ri, right_inverse_error(ops, f));
    bp = std::max(bp, borel_pompeiu_error(ops, g));
    const auto h = hodge_measurements(ops, f, g);
    hm.sum_defect = std::max(hm.sum_defect, h.sum_defect);
    hm.idempotence = std::max(hm.idempotence, h.idempotence);
    hm.orthogonality = std::max(hm.orthogonality, h.orthogonality);
    hm.fixes_range = std::max(hm.fixes_range, h.fixes_range);
    adj = std::max(adj, adjoint_defect(random_interior_field(d, rng), random_interior_field(d, rng)));
    fac = std::max(fac, laplacian_factorization_defect(f));
  }
  checks.push_back({"right_inverse_DT", ri, approx_tol, !has_deep});
  checks.push_back({"borel_pompeiu", bp, approx_tol});
  checks.push_back({"bergman_P_plus_Q", hm.sum_defect, 1e-12});
  checks.push_back({"bergman_idempotent", hm.idempotence, 1e-8});
  checks.push_back({"bergman_orthogonal", hm.orthogonality, 1e-8});
  checks.push_back({"bergman_Q_fixes_range", hm.fixes_range, 1e-6});
  checks.push_back({"adjoint_pairing", adj, 1e-12});
  checks.push_back({"laplacian_factorization", fac, 1e-12});
  const double lam = ops.lambda_min(), lam_ref = lambda_min_analytic(*d);
  checks.push_back({"lambda_min", std::abs(lam - lam_ref) / lam_ref, 1e-6});

  // mhd invariants
  RandomFieldOptions pure;
  pure.kind = FieldKind::pure;
  const QField B = random_smooth_field(d, rng, pure);
  {
    // Vec((D+B) B) = curl+B x B - (div+B) B
    QField curl(d), div = divergence(B);
    const QField dx = partial_fwd(B, 0), dy = partial_fwd(B, 1), dz = partial_fwd(B, 2);
    for (std::size_t i = 0; i < d->size(); ++i)
      curl[i] = Quaternion::vector(dy[i].v3 - dz[i].v2, dz[i].v1 - dx[i].v3, dx[i].v2 - dy[i].v1);
    QField expected(d);
    for (std::size_t i = 0; i < d->size(); ++i) {
      const auto cr = cross3(curl[i], B[i]);
      expected[i] = (cr - B[i] * div[i].s) * (1.0 / c.mu0);
    }
    const QField L = lorentz(B, c.mu0);
    checks.push_back({"lorentz_identity", max_norm(L - expected) / std::max(max_norm(expected), 1e-300), 1e-12});
  }
  {
    const QField u = zero_boundary(random_smooth_field(d, rng, pure));
    const QField v = leray_project(u, ops);
    checks.push_back({"leray_divergence_free", l2_norm_interior(divergence(v)) / std::max(l2_norm(u), 1e-300), 1e-10});
  }

  fs::create_directories(c.output);
  std::ofstream rep(fs::path(c.output) / "verify_report.txt");
  bool ok = true;
  for (const auto& ch : checks) {
    std::ostringstream line;
    line << (ch.skipped ? "SKIP" : ch.pass() ? "PASS" : "FAIL") << ' ' << ch.name << " measured=" << fmt(ch.measured)
         << " tol=" << fmt(ch.tol);
    std::cout << line.str() << '\n';
    rep << line.str() << '\n';
    ok = ok && ch.pass();
  }
  auto m = base_manifest(c, "verify");
  m["result"] = ok ? "pass" : "fail";
  write_manifest((fs::path(c.output) / "manifest.txt").string(), m);
  return ok ? kExitOk : kExitError;
}

// ---------------------------------------------------------------------------
// constants

void write_constants_files(const RunConfig& c, const ConstantsBundle& k, const MHDParams& prm) {
  fs::create_directories(c.output);
  const double uB = c.budget_u_h1, bB = c.budget_B_h1;
  const double cond1 = cond1_threshold(k, prm.Rm);
  const double thm2 = schauder_threshold(k, prm);
  const auto t4 = check_theorem4(k, prm, bB);
  const double Ln = lipschitz_Ln(k, 2.0 * uB, 2.0 * bB, 2.0 * k.Cs * 2.0 * bB, prm);

  std::ofstream csv(fs::path(c.output) / "constants.csv");
  csv << "name,value,provenance\n";
  for (const auto& [name, v] : std::vector<std::pair<std::string, double>>{
           {"C1", k.C1}, {"Cs", k.Cs}, {"CD", k.CD}, {"Cu", k.Cu}, {"k", k.k}, {"lambda_min", k.lambda_min}})
    csv << name << ',' << fmt(v) << ',' << to_string(k.provenance.at(name)) << '\n';
  csv << "cond1_threshold," << fmt(cond1) << ",derived\n";
  csv << "theorem2_threshold," << fmt(thm2) << ",derived\n";
  csv << "theorem4_W," << (t4.W ? fmt(*t4.W) : std::string("nan")) << ",derived\n";
  csv << "theorem4_rm2_bound," << fmt(t4.rm_bound) << ",derived\n";
  csv << "lipschitz_Ln_at_budget," << fmt(Ln) << ",derived\n";

  std::ofstream txt(fs::path(c.output) / "constants.txt");
  txt << "grid " << c.n[0] << 'x' << c.n[1] << 'x' << c.n[2] << ", h = " << fmt(make_domain(c)->h()) << ", seed "
      << c.seed << ", " << c.constant_samples << " samples\n\n";
  txt << "C1         = " << fmt(k.C1) << "  (1/lambda_min, analytic)\n";
  txt << "lambda_min = " << fmt(k.lambda_min) << "  (analytic)\n";
  txt << "k          = " << fmt(k.k) << "  (||TQT||, power iteration)\n";
  txt << "Cs         = " << fmt(k.Cs) << "  (estimated, factor 2)\n";
  txt << "CD         = " << fmt(k.CD) << "  (estimated, factor 2)\n";
  txt << "Cu         = " << fmt(k.Cu) << "  (estimated, factor 1/2)\n\n";
  txt << "budget ||u||_H1 = " << fmt(uB) << ", ||B||_H1 = " << fmt(bB) << "\n";
  txt << "cond1:     ||u||_H1 < " << fmt(cond1) << "  -> " << (check_cond1(uB, k, prm.Rm) ? "holds" : "violated") << '\n';
  txt << "theorem 2: ||u||_H1 <= " << fmt(thm2) << "  -> " << (check_schauder_bound(uB, k, prm) ? "holds" : "violated")
      << '\n';
  txt << "theorem 4: small field " << (t4.small_field ? "yes" : "no") << ", Rm^2 < " << fmt(t4.rm_bound) << " "
      << (t4.small_rm ? "yes" : "no") << (t4.negative_radicand ? " (negative radicand)" : "") << " -> "
      << (t4.ok ? "holds" : "violated") << '\n';
  txt << "L_n at budget = " << fmt(Ln) << '\n';
}

int cmd_constants(const RunConfig& c) {
  const auto d = make_domain(c);
  const OperatorSet ops(d);
  const auto prm = make_params(c, d);
  const auto k = estimate_constants(ops, c.constant_samples, c.seed);
  write_constants_files(c, k, prm);
  write_manifest((fs::path(c.output) / "manifest.txt").string(), base_manifest(c, "constants"));
  std::cout << "C1=" << fmt(k.C1) << " Cs=" << fmt(k.Cs) << " CD=" << fmt(k.CD) << " Cu=" << fmt(k.Cu)
            << " k=" << fmt(k.k) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const RunConfig& c) {
  const auto d = make_domain(c);
  const OperatorSet ops(d);
  const auto prm = make_params(c, d);
  const fs::path out(c.output);
  fs::create_directories(out);

  const auto k = estimate_constants(ops, c.constant_samples, c.seed);
  write_constants_files(c, k, prm);
  auto manifest = base_manifest(c, "solve");

  std::ofstream conv(out / "convergence.csv"), en(out / "energy.csv"), log(out / "solve.log");
  log << "constants C1=" << fmt(k.C1) << " Cs=" << fmt(k.Cs) << " CD=" << fmt(k.CD) << " Cu=" << fmt(k.Cu)
      << " k=" << fmt(k.k) << '\n';
  int code = kExitOk;
  try {
    auto [state, rep] = solve(prm, ops, c.solver, k, MHDState::zero(d), SolverSinks{&conv, &en});
    for (const auto& r : rep.log)
      log << "iter " << r.iter << " du=" << fmt(r.du) << " dB=" << fmt(r.dB) << " Ln=" << fmt(r.Ln)
          << " q1=" << fmt(r.q1) << " q2=" << fmt(r.q2) << '\n';
    const auto& res = rep.final_residuals;
    log << "converged=" << rep.converged << " iterations=" << rep.iterations << " cond1=" << rep.cond1_ok
        << " theorem2=" << rep.theorem2_ok << " theorem4=" << rep.theorem4_ok << '\n';
    log << "residual momentum=" << fmt(res.momentum) << " induction=" << fmt(res.induction) << " div_u=" << fmt(res.div_u)
        << " div_B=" << fmt(res.div_B) << '\n';
    write_vtk((out / "u.vtk").string(), state.u, "u");
    write_vtk((out / "B.vtk").string(), state.B, "B");
    write_vtk((out / "p.vtk").string(), state.p, "p");
    write_csv((out / "u.csv").string(), state.u);
    write_csv((out / "B.csv").string(), state.B);
    write_csv((out / "p.csv").string(), state.p);
    manifest["iterations"] = std::to_string(rep.iterations);
    manifest["converged"] = rep.converged ? "true" : "false";
    manifest["theorem4_ok"] = rep.theorem4_ok ? "true" : "false";
    manifest["q1"] = fmt(rep.q1);
    manifest["q2"] = fmt(rep.q2);
    if (!rep.converged) {
      std::cerr << "qmhd solve: no convergence after " << rep.iterations << " iterations\n";
      code = kExitError;
    }
  } catch (const ConditionViolation& e) {
    log << "refused: " << e.what() << " measured=" << fmt(e.measured()) << '\n';
    std::cerr << "qmhd solve: refused: " << e.what() << '\n';
    manifest["refused"] = fmt(e.measured());
    code = kExitRefused;
  } catch (const DivergenceError& e) {
    log << "diverged: " << e.what() << '\n';
    std::cerr << "qmhd solve: diverged: " << e.what() << '\n';
    code = kExitDiverged;
  }
  manifest["exit_code"] = std::to_string(code);
  write_manifest((out / "manifest.txt").string(), manifest);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quaternionic stationary MHD solver"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "random seed (overrides config)");
  };
  auto* verify = app.add_subcommand("verify", "run the operator and model invariant checks");
  auto* constants = app.add_subcommand("constants", "estimate constants and evaluate the smallness conditions");
  auto* solve_cmd = app.add_subcommand("solve", "run the configured fixed-point solver");
  auto* defaults = app.add_subcommand("defaults", "print the default configuration");
  for (auto* s : {verify, constants, solve_cmd}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  if (defaults->parsed()) {
    std::cout << defaults_json().dump(2) << '\n';
    return kExitOk;
  }
  try {
    RunConfig c = load_config(config_path);
    if (!out_dir.empty()) c.output = out_dir;
    if (seed) c.seed = *seed;
    if (verify->parsed()) return cmd_verify(c);
    if (constants->parsed()) return cmd_constants(c);
    return cmd_solve(c);
  } catch (const std::exception& e) {
    std::cerr << "qmhd: " << e.what() << '\n';
    return kExitError;
  }
}
