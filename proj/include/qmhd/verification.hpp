#pragma once

/*! \file
 *  \brief Measured operator identities, shared by `qmhd verify` and the acceptance driver.
 *
 *  Every function returns a relative measurement; thresholds live with the caller.
 */

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "qmhd/operators.hpp"
#include "qmhd/random_fields.hpp"

namespace qmhd {

/// Cells whose centres sit at least `distance_cells` cell widths from the boundary.
inline int min_depth_for_distance(double distance_cells) {
  return static_cast<int>(std::ceil(distance_cells - 0.5));
}

/// max |D+ T f - f| over cells at distance >= dist*h, divided by ||f||_inf.
inline double right_inverse_error(const OperatorSet& ops, const QField& f, double dist_cells = 3.0) {
  const QField e = dirac_fwd(ops.teodorescu(f)) - f;
  const double ref = max_norm(f);
  return ref > 0.0 ? max_norm(e, min_depth_for_distance(dist_cells)) / ref : 0.0;
}

/// ||F(tr f) + T(D+ f) - f||_L2 / ||f||_L2.
inline double borel_pompeiu_error(const OperatorSet& ops, const QField& f) {
  const QField r = ops.cauchy(trace_boundary(f)) + ops.teodorescu(dirac_fwd(f)) - f;
  const double ref = l2_norm(f);
  return ref > 0.0 ? l2_norm(r) / ref : 0.0;
}

struct HodgeMeasurements {
  double sum_defect = 0.0;    ///< max |P f + Q f - f| / ||f||_inf
  double idempotence = 0.0;   ///< ||P P f - P f|| / ||f||
  double orthogonality = 0.0; ///< |sc<P f, Q f>| / ||f||^2
  double fixes_range = 0.0;   ///< ||Q D+ g - D+ g|| / ||D+ g||
};

inline HodgeMeasurements hodge_measurements(const OperatorSet& ops, const QField& f, const QField& g_zero_boundary) {
  HodgeMeasurements m;
  const QField P = ops.bergman_P(f), Q = ops.bergman_Q(f);
  const double nf = l2_norm(f);
  if (nf > 0.0) {
    m.sum_defect = max_norm(P + Q - f) / max_norm(f);
    m.idempotence = l2_norm(ops.bergman_P(P) - P) / nf;
    m.orthogonality = std::abs(sc_inner(P, Q)) / (nf * nf);
  }
  const QField dg = dirac_fwd(g_zero_boundary);
  const double ndg = l2_norm(dg);
  if (ndg > 0.0) m.fixes_range = l2_norm(ops.bergman_Q(dg) - dg) / ndg;
  return m;
}

/// |<D+ u, v> - <u, D- v>| / (||u|| ||v||), quaternion-valued pairing.
inline double adjoint_defect(const QField& u, const QField& v) {
  const double ref = l2_norm(u) * l2_norm(v);
  return ref > 0.0 ? abs(l2_inner(dirac_fwd(u), v) - l2_inner(u, dirac_bwd(v))) / ref : 0.0;
}

/// max |-D- D+ u - laplacian(u)| / max |laplacian(u)| on cells of depth >= 1.
inline double laplacian_factorization_defect(const QField& u) {
  const QField lap = laplacian(u);
  const double ref = max_norm(lap, 1);
  const double diff = max_norm(dirac_laplacian(u) - lap, 1);
  return ref > 0.0 ? diff / ref : diff;
}

/// Random field with every value strictly inside the collar (depth >= min_depth).
inline QField random_interior_field(const DomainPtr& d, std::mt19937_64& rng, int min_depth = 1) {
  std::normal_distribution<double> n(0.0, 1.0);
  QField u(d);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (d->depth(i) >= min_depth) u[i] = Quaternion{n(rng), n(rng), n(rng), n(rng)};
  return u;
}

inline QField smooth_sample(const DomainPtr& d, std::mt19937_64& rng, bool zero_bdry, int max_k = 1) {
  RandomFieldOptions o;
  o.max_wavenumber = max_k;
  o.zero_boundary = zero_bdry;
  return random_smooth_field(d, rng, o);
}

}  // namespace qmhd
