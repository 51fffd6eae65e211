#pragma once

/*! \file
 *  \brief Banach iteration with inner magnetic loop, Schauder/Neumann iteration,
 *  pressure recovery, and the per-iteration convergence log.
 *
 *  Both schemes apply the Leray projection inside every map when
 *  leray_each_step is set, so they share one discrete fixed point. The
 *  Schauder map G is realised as a Gauss-Seidel sweep: the velocity solve
 *  uses the previous magnetic field in the Lorentz term, the magnetic solve
 *  uses the new velocity.
 */

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "qmhd/constants.hpp"
#include "qmhd/energy.hpp"
#include "qmhd/errors.hpp"
#include "qmhd/mhd.hpp"
#include "qmhd/operators.hpp"

namespace qmhd {

enum class SolverMethod { banach, schauder_neumann };

struct SolverConfig {
  SolverMethod method = SolverMethod::banach;
  double tol = 1e-8;
  int max_outer = 500;
  int max_inner = 200;
  int neumann_max_terms = 64;
  double neumann_term_tol = 1e-12;
  bool leray_each_step = true;
  int norm_iterations = 30;       ///< power iterations for q1, q2
  double norm_tolerance = 1e-6;
  double pressure_tol = 1e-8;
  int pressure_max_iter = 500;

  void validate() const {
    if (!(tol > 0.0) || max_outer < 1 || max_inner < 1 || neumann_max_terms < 1)
      throw std::invalid_argument("SolverConfig: tolerances must be positive and limits at least 1");
  }
};

struct IterationRecord {
  int iter = 0;
  double du = 0.0, dB = 0.0, dp = 0.0;
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double q2 = std::numeric_limits<double>::quiet_NaN();
  double Ln = std::numeric_limits<double>::quiet_NaN();
  bool cond1 = false, thm2 = false, thm4 = false;
  double J = 0.0;
  double res_mom = 0.0, res_ind = 0.0, divu = 0.0, divB = 0.0;
};

struct ConvergenceReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> state_changes;   ///< relative H1 change of (u, B) per outer step
  std::vector<double> velocity_steps;  ///< ||u_n - u_{n-1}||_H1
  std::vector<double> Ln;
  std::vector<double> inner_ratios;    ///< empirical contraction of each inner magnetic loop
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double q2 = std::numeric_limits<double>::quiet_NaN();
  bool cond1_ok = true, theorem2_ok = true, theorem4_ok = true;
  double F_const = 0.0, C3 = 0.0, C4 = 0.0;
  std::optional<double> W;
  double supB_h1 = 0.0;
  double initialB_h1 = 0.0, maxB_h1 = 0.0;
  StrongResidual final_residuals;
  std::vector<IterationRecord> log;
};

inline const char* convergence_csv_header() {
  return "iter,du,dB,dp,q1,q2,Ln,cond1,thm2,thm4,Jenergy,res_mom,res_ind,divu,divB";
}

inline void write_convergence_row(std::ostream& os, const IterationRecord& r) {
  using detail::fmt17;
  os << r.iter << ',' << fmt17(r.du) << ',' << fmt17(r.dB) << ',' << fmt17(r.dp) << ',' << fmt17(r.q1) << ','
     << fmt17(r.q2) << ',' << fmt17(r.Ln) << ',' << r.cond1 << ',' << r.thm2 << ',' << r.thm4 << ',' << fmt17(r.J)
     << ',' << fmt17(r.res_mom) << ',' << fmt17(r.res_ind) << ',' << fmt17(r.divu) << ',' << fmt17(r.divB) << '\n';
}

/// Optional sinks filled while a solver runs, one row per outer step.
struct SolverSinks {
  std::ostream* convergence = nullptr;
  std::ostream* energy = nullptr;
};

namespace detail {

inline double relative_change(double diff, double norm) {
  if (diff == 0.0) return 0.0;
  return diff / std::max(norm, std::numeric_limits<double>::min());
}

/// Vector part, Leray-projected when the config asks for it.
inline QField maybe_leray(const QField& u, const OperatorSet& ops, const SolverConfig& cfg) {
  QField v = vector_part(u);
  return cfg.leray_each_step ? leray_project(v, ops) : v;
}

inline QField remove_mean(QField p) {
  const double m = mean_scalar(p);
  for (std::size_t i = 0; i < p.size(); ++i) p[i].s -= m;
  return p;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pressure

/// Zero-mean scalar p with Sc(Q p) = rhs, in the least-squares sense on the
/// mean-free subspace. A = M Sc Q M (M removes the mean) is symmetric positive
/// semidefinite, so conjugate residuals converge with the condition number of A
/// rather than its square. Stops on the normal residual ||A r|| / ||A rhs||.
inline QField pressure_recover(const QField& rhs, const OperatorSet& ops, const std::optional<QField>& guess = std::nullopt,
                               double tol = 1e-8, int max_iter = 500) {
  if (!rhs.is_scalar()) throw std::invalid_argument("pressure_recover: right side must be scalar");
  auto A = [&](const QField& x) { return detail::remove_mean(scalar_part(ops.bergman_Q(detail::remove_mean(x)))); };
  const QField b = detail::remove_mean(rhs);
  QField x = guess ? detail::remove_mean(scalar_part(*guess)) : QField(rhs.domain_ptr());
  const double ref = l2_norm(A(b));
  if (ref == 0.0) return x;
  QField r = b - A(x);
  QField Ar = A(r);
  QField dir = r, Adir = Ar;
  double rAr = sc_inner(r, Ar);
  double normal = l2_norm(Ar);
  for (int it = 0; it < max_iter && normal > tol * ref; ++it) {
    const double aa = sc_inner(Adir, Adir);
    if (aa == 0.0 || rAr <= 0.0) break;
    const double alpha = rAr / aa;
    x += dir * alpha;
    r -= Adir * alpha;
    Ar = A(r);
    normal = l2_norm(Ar);
    const double next = sc_inner(r, Ar);
    const double beta = next / rAr;
    rAr = next;
    dir = r + dir * beta;
    Adir = Ar + Adir * beta;
  }
  if (normal <= tol * ref) return detail::remove_mean(x);
  throw ConvergenceError("pressure_recover: normal residual above tolerance", normal / ref);
}

// ---------------------------------------------------------------------------
// Neumann series

struct NeumannResult {
  QField value;
  double q = 0.0;
  int terms = 0;
  double residual = 0.0;  ///< ||(I + A)v - r|| / ||r||
};

using LinearMap = std::function<QField(const QField&)>;

/// Growth-ratio estimate of ||A|| by power iteration from a deterministic start.
inline double estimate_map_norm(const LinearMap& A, const QField& start, int iterations, double tol) {
  QField x = start;
  double nx = l2_norm(x);
  if (nx == 0.0) {
    x = QField::constant(start.domain_ptr(), Quaternion{0.0, 1.0, 1.0, 1.0});
    nx = l2_norm(x);
  }
  x *= 1.0 / nx;
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    QField y = A(x);
    const double ny = l2_norm(y);
    if (ny == 0.0) return 0.0;
    if (it > 0 && std::abs(ny - est) <= tol * ny) return ny;
    est = ny;
    x = y * (1.0 / ny);
  }
  return est;
}

/// v = sum_n (-A)^n r, refusing when the estimated ||A|| is at least one.
inline NeumannResult neumann_solve(const LinearMap& A, const QField& r, const SolverConfig& cfg, const char* name) {
  NeumannResult out;
  out.q = estimate_map_norm(A, r, cfg.norm_iterations, cfg.norm_tolerance);
  if (out.q >= 1.0) throw ConditionViolation(std::string(name) + " >= 1: Neumann series refused", out.q);
  out.value = r;
  out.terms = 1;
  const double rn = l2_norm(r);
  if (rn == 0.0) return out;
  QField term = r;
  for (int n = 1; n < cfg.neumann_max_terms; ++n) {
    term = -A(term);
    out.value += term;
    ++out.terms;
    if (l2_norm(term) < cfg.neumann_term_tol * rn) break;
  }
  out.residual = l2_norm(out.value + A(out.value) - r) / rn;
  return out;
}

/// Velocity row of the linearised problem: (I + A) u = r with A v = c TQT[(u~.grad) v].
inline NeumannResult neumann_apply_u(const MHDState& tilde, const QField& B, const QField& p, const MHDParams& prm,
                                     const OperatorSet& ops, const SolverConfig& cfg) {
  const double c = prm.coef_nonlinear();
  QField g = lorentz(B, prm.mu0);
  if (prm.force_u) g += *prm.force_u;
  const QField r = detail::maybe_leray(ops.tqt(g) * c - ops.tqt(pressure_gradient(p)) * prm.coef_pressure(), ops, cfg);
  const LinearMap A = [&](const QField& v) {
    return detail::maybe_leray(ops.tqt(convective(tilde.u, v)) * c, ops, cfg);
  };
  return neumann_solve(A, r, cfg, "q1");
}

/// Magnetic row: (I + A) B = r with A w = c TQT[(u~.grad) w], r = c TQT[(B~.grad) u + f_B] (+ lift).
inline NeumannResult neumann_apply_B(const MHDState& tilde, const QField& u, const MHDParams& prm, const OperatorSet& ops,
                                     const SolverConfig& cfg) {
  const double c = prm.coef_magnetic();
  QField g = convective(tilde.B, u);
  if (prm.force_B) g += *prm.force_B;
  QField r = ops.tqt(g) * c;
  if (prm.boundary_h) r += boundary_lift(*prm.boundary_h, ops);
  r = detail::maybe_leray(r, ops, cfg);
  const LinearMap A = [&](const QField& w) {
    return detail::maybe_leray(ops.tqt(convective(tilde.u, w)) * c, ops, cfg);
  };
  return neumann_solve(A, r, cfg, "q2");
}

// ---------------------------------------------------------------------------
// Banach

struct InnerResult {
  QField B;
  int iterations = 0;
  double ratio = 0.0;  ///< largest ratio of successive H1 steps
  bool converged = false;
};

/// One application of the magnetic map at fixed velocity u.
inline QField magnetic_map(const QField& u, const QField& B, const MHDParams& prm, const OperatorSet& ops,
                           const SolverConfig& cfg) {
  return detail::maybe_leray(tqt_rhs_B(MHDState{u, B, QField(u.domain_ptr())}, prm, ops), ops, cfg);
}

inline InnerResult banach_inner_B(const QField& u, const QField& B_init, const MHDParams& prm, const OperatorSet& ops,
                                  const SolverConfig& cfg) {
  detail::require_pure(u, "banach_inner_B");
  InnerResult out;
  QField prev = B_init;
  double prev_step = -1.0;
  for (int i = 1; i <= cfg.max_inner; ++i) {
    QField next = magnetic_map(u, prev, prm, ops, cfg);
    const double step = h1_norm(next - prev);
    if (prev_step > 0.0) out.ratio = std::max(out.ratio, step / prev_step);
    prev_step = step;
    out.iterations = i;
    const double rel = detail::relative_change(step, h1_norm(next));
    prev = std::move(next);
    if (rel < cfg.tol) {
      out.converged = true;
      break;
    }
  }
  out.B = std::move(prev);
  return out;
}

namespace detail {

struct OuterMonitor {
  double initial_norm = 0.0;
  double last_change = std::numeric_limits<double>::infinity();
  int increases = 0;

  void check(int iter, double state_norm, double change) {
    if (iter == 1) initial_norm = std::max(state_norm, 1e-300);
    if (!std::isfinite(state_norm) || (iter > 1 && state_norm > 1e3 * std::max(initial_norm, 1e-12) && state_norm > 1e-6))
      throw DivergenceError("state norm grew beyond 1e3 times its first iterate");
    increases = change > last_change ? increases + 1 : 0;
    last_change = change;
    if (increases >= 5) throw DivergenceError("state change increased for 5 consecutive steps");
  }
};

inline void emit(const IterationRecord& rec, const EnergyReport& e, const SolverSinks& sinks) {
  if (sinks.convergence) {
    write_convergence_row(*sinks.convergence, rec);
    sinks.convergence->flush();
  }
  if (sinks.energy) {
    *sinks.energy << rec.iter << ',';
    write_energy_csv_row(*sinks.energy, e);
    sinks.energy->flush();
  }
}

inline void fill_diagnostics(IterationRecord& rec, const MHDState& s, const MHDParams& prm, const ConstantsBundle& c,
                             ConvergenceReport& rep, EnergyReport& e) {
  const double uh = h1_norm(s.u), bh = h1_norm(s.B);
  rep.supB_h1 = std::max(rep.supB_h1, bh);
  rep.maxB_h1 = std::max(rep.maxB_h1, bh);
  rec.cond1 = check_cond1(uh, c, prm.Rm);
  rec.thm2 = check_schauder_bound(uh, c, prm);
  const auto t4 = check_theorem4(c, prm, rep.supB_h1);
  rec.thm4 = t4.ok;
  rep.W = t4.W;
  rep.cond1_ok = rep.cond1_ok && rec.cond1;
  rep.theorem2_ok = rep.theorem2_ok && rec.thm2;
  rep.theorem4_ok = rep.theorem4_ok && rec.thm4;
  e = energy(s.u, s.B, prm, c.Cs);
  rec.J = e.J;
  const auto res = residual_strong(s, prm);
  rec.res_mom = res.momentum;
  rec.res_ind = res.induction;
  rec.divu = res.div_u;
  rec.divB = res.div_B;
  rep.final_residuals = res;
}

}  // namespace detail

inline std::pair<MHDState, ConvergenceReport> banach_solve(const MHDParams& prm, const OperatorSet& ops,
                                                           const SolverConfig& cfg, const ConstantsBundle& c,
                                                           const MHDState& init, const SolverSinks& sinks = {}) {
  prm.validate();
  cfg.validate();
  ConvergenceReport rep;
  MHDState s = init;
  rep.initialB_h1 = h1_norm(s.B);
  rep.supB_h1 = rep.initialB_h1;
  if (sinks.convergence) *sinks.convergence << convergence_csv_header() << '\n';
  if (sinks.energy) *sinks.energy << "iter," << energy_csv_header() << '\n';
  std::vector<double> u_norms{h1_norm(s.u)}, B_norms{rep.initialB_h1};
  detail::OuterMonitor monitor;
  for (int n = 1; n <= cfg.max_outer; ++n) {
    const QField p = pressure_recover(tqt_rhs_p(s, prm, ops), ops, s.p, cfg.pressure_tol, cfg.pressure_max_iter);
    MHDState trial{s.u, s.B, p};
    QField u = detail::maybe_leray(tqt_rhs_u(trial, prm, ops), ops, cfg);
    InnerResult inner = banach_inner_B(u, s.B, prm, ops, cfg);
    rep.inner_ratios.push_back(inner.ratio);

    IterationRecord rec;
    rec.iter = n;
    const double du_abs = h1_norm(u - s.u), dB_abs = h1_norm(inner.B - s.B);
    const double uh = h1_norm(u), bh = h1_norm(inner.B);
    rec.du = detail::relative_change(du_abs, uh);
    rec.dB = detail::relative_change(dB_abs, bh);
    rec.dp = detail::relative_change(l2_norm(p - s.p), l2_norm(p));
    const double change = detail::relative_change(du_abs + dB_abs, uh + bh);
    rep.state_changes.push_back(change);
    rep.velocity_steps.push_back(du_abs);

    // running quantities of the Lipschitz bound, from the iterate history
    const double u1 = u_norms.back(), u2 = u_norms.size() > 1 ? u_norms[u_norms.size() - 2] : 0.0;
    const double b1 = B_norms.back(), b2 = B_norms.size() > 1 ? B_norms[B_norms.size() - 2] : 0.0;
    rep.C3 = u1 + u2;
    rep.C4 = b1 + b2;
    rep.F_const = 2.0 * c.Cs * (bh + b1);
    rec.Ln = lipschitz_Ln(c, rep.C3, rep.C4, rep.F_const, prm);
    rep.Ln.push_back(rec.Ln);
    u_norms.push_back(uh);
    B_norms.push_back(bh);

    s = MHDState{std::move(u), std::move(inner.B), p};
    EnergyReport e;
    detail::fill_diagnostics(rec, s, prm, c, rep, e);
    rep.log.push_back(rec);
    rep.iterations = n;
    detail::emit(rec, e, sinks);
    monitor.check(n, uh + bh, change);
    if (change < cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  return {s, rep};
}

// ---------------------------------------------------------------------------
// Schauder / Neumann

inline std::pair<MHDState, ConvergenceReport> schauder_solve(const MHDParams& prm, const OperatorSet& ops,
                                                             const SolverConfig& cfg, const ConstantsBundle& c,
                                                             const MHDState& init, const SolverSinks& sinks = {}) {
  prm.validate();
  cfg.validate();
  ConvergenceReport rep;
  MHDState s = init;
  rep.initialB_h1 = h1_norm(s.B);
  rep.supB_h1 = rep.initialB_h1;
  rep.q1 = rep.q2 = 0.0;
  if (sinks.convergence) *sinks.convergence << convergence_csv_header() << '\n';
  if (sinks.energy) *sinks.energy << "iter," << energy_csv_header() << '\n';
  detail::OuterMonitor monitor;
  for (int n = 1; n <= cfg.max_outer; ++n) {
    const QField p = pressure_recover(tqt_rhs_p(s, prm, ops), ops, s.p, cfg.pressure_tol, cfg.pressure_max_iter);
    const NeumannResult nu = neumann_apply_u(s, s.B, p, prm, ops, cfg);
    const NeumannResult nb = neumann_apply_B(s, nu.value, prm, ops, cfg);
    rep.q1 = std::max(rep.q1, nu.q);
    rep.q2 = std::max(rep.q2, nb.q);

    IterationRecord rec;
    rec.iter = n;
    rec.q1 = nu.q;
    rec.q2 = nb.q;
    const double du_abs = h1_norm(nu.value - s.u), dB_abs = h1_norm(nb.value - s.B);
    const double uh = h1_norm(nu.value), bh = h1_norm(nb.value);
    rec.du = detail::relative_change(du_abs, uh);
    rec.dB = detail::relative_change(dB_abs, bh);
    rec.dp = detail::relative_change(l2_norm(p - s.p), l2_norm(p));
    const double change = detail::relative_change(du_abs + dB_abs, uh + bh);
    rep.state_changes.push_back(change);
    rep.velocity_steps.push_back(du_abs);

    // the bound is a condition on the linearisation point u~
    const bool tilde_ok = check_schauder_bound(h1_norm(s.u), c, prm);
    s = MHDState{nu.value, nb.value, p};
    EnergyReport e;
    detail::fill_diagnostics(rec, s, prm, c, rep, e);
    rec.thm2 = tilde_ok;
    rep.log.push_back(rec);
    rep.iterations = n;
    detail::emit(rec, e, sinks);
    monitor.check(n, uh + bh, change);
    if (change < cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.theorem2_ok = true;
  for (const auto& r : rep.log) rep.theorem2_ok = rep.theorem2_ok && r.thm2;
  return {s, rep};
}

inline std::pair<MHDState, ConvergenceReport> solve(const MHDParams& prm, const OperatorSet& ops, const SolverConfig& cfg,
                                                    const ConstantsBundle& c, const MHDState& init,
                                                    const SolverSinks& sinks = {}) {
  return cfg.method == SolverMethod::banach ? banach_solve(prm, ops, cfg, c, init, sinks)
                                            : schauder_solve(prm, ops, cfg, c, init, sinks);
}

}  // namespace qmhd
