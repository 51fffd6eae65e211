#pragma once

/*! \file
 *  \brief Stationary incompressible MHD: nonlinear terms, strong and weak
 *  residuals, right-hand sides of the TQT integral form, Leray projection.
 *
 *  Sign conventions follow the classical system
 *    -(1/Re) lap u + (u.grad)u + grad p = (1/mu0)(curl B) x B + f_u
 *    -(1/Rm) lap B + (u.grad)B - (B.grad)u = f_B
 *    div u = div B = 0
 *  with D p realised by the forward Dirac operator and TQT standing in for
 *  the inverse of -lap with zero boundary values.
 */

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "qmhd/grid.hpp"
#include "qmhd/operators.hpp"

namespace qmhd {

/// Which power of Re/Rm multiplies each term of the integral form.
///   linear:  Re on everything, Rm on the induction row
///   squared: Re^2 and Rm^2 everywhere
///   mixed:   Re on the nonlinear term, Re^2 on the pressure term, Rm^2 on the induction row
enum class ExponentMode { linear, squared, mixed };

inline std::string to_string(ExponentMode m) {
  switch (m) {
    case ExponentMode::linear: return "linear";
    case ExponentMode::squared: return "squared";
    case ExponentMode::mixed: return "mixed";
  }
  return "?";
}

inline ExponentMode parse_exponent_mode(const std::string& s) {
  if (s == "linear") return ExponentMode::linear;
  if (s == "squared") return ExponentMode::squared;
  if (s == "mixed") return ExponentMode::mixed;
  throw std::invalid_argument("unknown exponent_mode: " + s);
}

struct MHDParams {
  double Re = 1.0;
  double Rm = 1.0;
  double mu0 = 1.0;
  ExponentMode exponent_mode = ExponentMode::squared;
  std::optional<BoundaryData> boundary_h;
  std::optional<QField> force_u;
  std::optional<QField> force_B;

  void validate() const {
    if (!(Re > 0.0) || !(Rm > 0.0) || !(mu0 > 0.0)) throw std::invalid_argument("MHDParams: Re, Rm, mu0 must be positive");
  }
  double coef_nonlinear() const { return exponent_mode == ExponentMode::squared ? Re * Re : Re; }
  double coef_pressure() const { return exponent_mode == ExponentMode::linear ? Re : Re * Re; }
  double coef_magnetic() const { return exponent_mode == ExponentMode::linear ? Rm : Rm * Rm; }
};

struct MHDState {
  QField u;  ///< pure vector
  QField B;  ///< pure vector
  QField p;  ///< scalar, zero mean

  static MHDState zero(const DomainPtr& d) { return {QField(d), QField(d), QField(d)}; }
};

namespace detail {
inline void require_pure(const QField& a, const char* what) {
  if (!a.is_pure()) throw std::invalid_argument(std::string(what) + ": field must be a pure vector");
}
}  // namespace detail

/// (a.grad) w with central differences; this is how Sc(a D) w is realised.
inline QField convective(const QField& a, const QField& w) {
  detail::require_pure(a, "convective");
  a.check_same(w);
  QField out(w.domain_ptr());
  for (int i = 0; i < 3; ++i) {
    const auto dw = partial_central(w, i);
    for (std::size_t c = 0; c < w.size(); ++c) out[c] += dw[c] * a[c][i + 1];
  }
  return out;
}

/// (1/mu0) Vec((D+ B) B), the Lorentz force (curl B) x B.
inline QField lorentz(const QField& B, double mu0) {
  detail::require_pure(B, "lorentz");
  const auto dB = dirac_fwd(B);
  QField out(B.domain_ptr());
  for (std::size_t c = 0; c < B.size(); ++c) out[c] = vec(qmul(dB[c], B[c])) * (1.0 / mu0);
  return out;
}

inline QField M_of(const QField& u, const QField& B, double mu0) { return convective(u, u) - lorentz(B, mu0); }

inline QField pressure_gradient(const QField& p) { return vector_part(dirac_fwd(scalar_part(p))); }

struct StrongResidual {
  double momentum = 0.0;
  double induction = 0.0;
  double div_u = 0.0;
  double div_B = 0.0;
  double momentum_scale = 0.0;   ///< norm of the largest term in the momentum row
  double induction_scale = 0.0;  ///< norm of the largest term in the induction row
};

/// Residual fields of the classical system; collar cells are not part of the residual.
inline std::pair<QField, QField> residual_fields(const MHDState& s, const MHDParams& prm) {
  QField mom = laplacian(s.u) * (-1.0 / prm.Re) + convective(s.u, s.u) + pressure_gradient(s.p) - lorentz(s.B, prm.mu0);
  QField ind = laplacian(s.B) * (-1.0 / prm.Rm) + convective(s.u, s.B) - convective(s.B, s.u);
  if (prm.force_u) mom -= *prm.force_u;
  if (prm.force_B) ind -= *prm.force_B;
  return {mom, ind};
}

inline StrongResidual residual_strong(const MHDState& s, const MHDParams& prm) {
  StrongResidual r;
  const auto [mom, ind] = residual_fields(s, prm);
  r.momentum = l2_norm_interior(mom);
  r.induction = l2_norm_interior(ind);
  r.div_u = l2_norm_interior(divergence(s.u));
  r.div_B = l2_norm_interior(divergence(s.B));
  for (double t : {l2_norm_interior(laplacian(s.u)) / prm.Re, l2_norm_interior(convective(s.u, s.u)),
                   l2_norm_interior(pressure_gradient(s.p)), l2_norm_interior(lorentz(s.B, prm.mu0)),
                   prm.force_u ? l2_norm_interior(*prm.force_u) : 0.0})
    r.momentum_scale = std::max(r.momentum_scale, t);
  for (double t : {l2_norm_interior(laplacian(s.B)) / prm.Rm, l2_norm_interior(convective(s.u, s.B)),
                   l2_norm_interior(convective(s.B, s.u)), prm.force_B ? l2_norm_interior(*prm.force_B) : 0.0})
    r.induction_scale = std::max(r.induction_scale, t);
  return r;
}

/// Weak residuals against zero-boundary test fields v (momentum) and w (induction).
inline std::pair<double, double> residual_weak(const MHDState& s, const MHDParams& prm, const QField& v, const QField& w) {
  if (!has_zero_collar(v) || !has_zero_collar(w)) throw std::invalid_argument("residual_weak: test fields must vanish on the collar");
  if (l2_norm_interior(divergence(w)) > 1e-10 * std::max(1.0, h1_norm(w)))
    throw std::invalid_argument("residual_weak: induction test field must be divergence free");
  double rv = sc_inner(dirac_fwd(s.u), dirac_fwd(v)) / prm.Re + sc_inner(convective(s.u, s.u), v) +
              sc_inner(pressure_gradient(s.p), v) - sc_inner(lorentz(s.B, prm.mu0), v);
  double rw = sc_inner(dirac_fwd(s.B), dirac_fwd(w)) / prm.Rm + sc_inner(convective(s.u, s.B) - convective(s.B, s.u), w);
  if (prm.force_u) rv -= sc_inner(*prm.force_u, v);
  if (prm.force_B) rw -= sc_inner(*prm.force_B, w);
  return {rv, rw};
}

/// Harmonic extension H of face data h (collar cell = mean of its faces), then
/// F h + T P D+ H as the lift added to every magnetic iterate.
inline QField boundary_lift(const BoundaryData& h, const OperatorSet& ops) {
  const auto& d = ops.domain();
  QField H0(ops.domain_ptr());
  std::vector<int> count(d.size(), 0);
  const auto& faces = d.boundary_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    H0[faces[f].cell] += h.values[f];
    ++count[faces[f].cell];
  }
  for (std::size_t i = 0; i < d.size(); ++i)
    if (count[i] > 0) H0[i] *= 1.0 / count[i];
  QField rhs = laplacian(H0);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.in_collar(i)) rhs[i] = Quaternion{};
  const QField H = H0 + ops.poisson_dirichlet(rhs);
  return ops.cauchy(h) + ops.teodorescu(ops.bergman_P(dirac_fwd(H)));
}

/// Momentum bracket (1/mu0) Vec((D B)B) - (u.grad)u + f_u.
inline QField momentum_source(const QField& u, const QField& B, const MHDParams& prm) {
  QField g = lorentz(B, prm.mu0) - convective(u, u);
  if (prm.force_u) g += *prm.force_u;
  return g;
}

/// Induction bracket (B.grad)u - (u.grad)B + f_B.
inline QField induction_source(const QField& u, const QField& B, const MHDParams& prm) {
  QField g = convective(B, u) - convective(u, B);
  if (prm.force_B) g += *prm.force_B;
  return g;
}

// The discrete TQT leaves a small scalar part on vector input; the velocity and
// magnetic rows keep the vector part only.
inline QField tqt_rhs_u(const MHDState& s, const MHDParams& prm, const OperatorSet& ops) {
  return vector_part(ops.tqt(momentum_source(s.u, s.B, prm)) * prm.coef_nonlinear() -
                     ops.tqt(pressure_gradient(s.p)) * prm.coef_pressure());
}

inline QField tqt_rhs_B(const MHDState& s, const MHDParams& prm, const OperatorSet& ops) {
  QField B = ops.tqt(induction_source(s.u, s.B, prm)) * prm.coef_magnetic();
  if (prm.boundary_h) B += boundary_lift(*prm.boundary_h, ops);
  return vector_part(B);
}

/// Right side r of Sc(Q p) = r: the divergence constraint applied to the momentum row.
inline QField tqt_rhs_p(const MHDState& s, const MHDParams& prm, const OperatorSet& ops) {
  const double ratio = prm.coef_nonlinear() / prm.coef_pressure();
  return scalar_part(ops.bergman_Q(ops.teodorescu(momentum_source(s.u, s.B, prm)))) * ratio;
}

/// Smooth body forces vanishing on the boundary, used for small-data runs.
inline std::pair<QField, QField> manufactured_forcing(const DomainPtr& d, double amplitude) {
  const auto& o = d->origin();
  const double L = d->h() * d->n(0);
  const double w = std::numbers::pi / L;
  auto bump = [&](const Vec3& x) {
    return std::sin(w * (x[0] - o[0])) * std::sin(w * (x[1] - o[1])) * std::sin(w * (x[2] - o[2]));
  };
  QField fu = QField::sample(d, [&](const Vec3& x) {
    const double b = amplitude * bump(x);
    return Quaternion::vector(b * std::cos(w * (x[1] - o[1])), b * std::cos(w * (x[2] - o[2])), b * std::cos(w * (x[0] - o[0])));
  });
  QField fB = QField::sample(d, [&](const Vec3& x) {
    const double b = amplitude * bump(x);
    return Quaternion::vector(b * std::cos(w * (x[2] - o[2])), b * std::cos(w * (x[0] - o[0])), b * std::cos(w * (x[1] - o[1])));
  });
  return {fu, fB};
}

/// u - grad- phi with lap phi = div+ u on non-collar cells, phi = 0 on the collar.
inline QField leray_project(const QField& u, const OperatorSet& ops) {
  detail::require_pure(u, "leray_project");
  QField div = divergence(u);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.domain().in_collar(i)) div[i] = Quaternion{};
  const QField phi = ops.poisson_dirichlet(-div);
  return u - gradient_bwd(phi);
}

}  // namespace qmhd
