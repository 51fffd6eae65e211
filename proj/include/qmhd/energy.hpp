#pragma once

/*! \file
 *  \brief Energy functional J(u, B) and the coercivity radius conditions.
 */

#include <algorithm>
#include <limits>
#include <ostream>

#include "qmhd/field_io.hpp"
#include "qmhd/mhd.hpp"

namespace qmhd {

struct EnergyReport {
  double J = 0.0;
  double viscous_u = 0.0;           ///< (1/Re) ||D u||^2
  double viscous_B = 0.0;           ///< (1/Rm) ||D B||^2
  double lorentz_coupling = 0.0;    ///< (1/mu0) Sc <Vec((D B) B), u>
  double induction_coupling = 0.0;  ///< Sc <(u.grad)B - (B.grad)u, B>
  bool coercivity_ok = false;
  double rho_max = 0.0;
};

inline double coercivity_radius(const MHDParams& prm, double Cs) {
  return std::min(Cs / prm.Re, Cs / prm.Rm) / (1.0 + 1.0 / (2.0 * prm.mu0));
}

inline bool is_coercive(double B_h1, const MHDParams& prm, double Cs) { return B_h1 < coercivity_radius(prm, Cs); }

/// [Cs/Re - (2 + 1/mu0) B/2] u^2 + [Cs/Rm - (2 + 1/mu0) B/2] B^2 with u, B the H1 norms.
inline double lower_bound_estimate(double u_h1, double B_h1, const MHDParams& prm, double Cs) {
  const double shift = 0.5 * (2.0 + 1.0 / prm.mu0) * B_h1;
  const double first = Cs / prm.Re - shift;
  const double second = Cs / prm.Rm - shift;
  return first * u_h1 * u_h1 + second * B_h1 * B_h1;
}

/// J and its four terms. Cs only feeds the coercivity flag; pass a non-positive
/// value to skip it.
inline EnergyReport energy(const QField& u, const QField& B, const MHDParams& prm, double Cs = 0.0) {
  detail::require_pure(u, "energy");
  detail::require_pure(B, "energy");
  EnergyReport r;
  const auto du = dirac_fwd(u);
  const auto dB = dirac_fwd(B);
  r.viscous_u = sc_inner(du, du) / prm.Re;
  r.viscous_B = sc_inner(dB, dB) / prm.Rm;
  r.lorentz_coupling = sc_inner(lorentz(B, prm.mu0), u);
  r.induction_coupling = sc_inner(convective(u, B) - convective(B, u), B);
  r.J = r.viscous_u + r.viscous_B - r.lorentz_coupling + r.induction_coupling;
  if (Cs > 0.0) {
    r.rho_max = coercivity_radius(prm, Cs);
    r.coercivity_ok = is_coercive(h1_norm(B), prm, Cs);
  }
  return r;
}

inline const char* energy_csv_header() {
  return "J,viscous_u,viscous_B,lorentz_coupling,induction_coupling,coercivity_ok,rho_max";
}

inline void write_energy_csv_row(std::ostream& os, const EnergyReport& r) {
  os << detail::fmt17(r.J) << ',' << detail::fmt17(r.viscous_u) << ',' << detail::fmt17(r.viscous_B) << ','
     << detail::fmt17(r.lorentz_coupling) << ',' << detail::fmt17(r.induction_coupling) << ','
     << (r.coercivity_ok ? 1 : 0) << ',' << detail::fmt17(r.rho_max) << '\n';
}

}  // namespace qmhd
