#pragma once

/*! \file
 *  \brief Norm constants (C1, Cs, CD, Cu, k) and the smallness conditions built from them.
 *
 *  C1 and lambda_min come from the discrete spectrum. Cs, CD and Cu are
 *  sampled extremal ratios over seeded random fields with a safety factor of
 *  two, so every condition that uses them is an estimate.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "qmhd/mhd.hpp"
#include "qmhd/operators.hpp"
#include "qmhd/random_fields.hpp"

namespace qmhd {

enum class Provenance { analytic, estimated };

inline const char* to_string(Provenance p) { return p == Provenance::analytic ? "analytic" : "estimated"; }

struct ConstantsBundle {
  double C1 = 0.0;
  double Cs = 0.0;
  double CD = 0.0;
  double Cu = 0.0;
  double k = 0.0;
  double lambda_min = 0.0;
  std::map<std::string, Provenance> provenance;
};

/// The individual ratios bounded by Cs (u and B are two independent samples).
struct LemmaRatios {
  double convective = 0.0;  ///< ||(u.grad)u||_Lq / ||u||_H1^2
  double lorentz = 0.0;     ///< ||Vec((D B) B)||_Lq / ||B||_H1^2
  double dirac = 0.0;       ///< ||D B||_L2 / ||B||_H1
  double composed = 0.0;    ///< ||T (u.grad)u||_L2 / ||u||_H1^2
  double max() const { return std::max({convective, lorentz, dirac, composed}); }
};

inline std::optional<LemmaRatios> lemma3_ratios(const QField& u, const QField& B, const OperatorSet& ops) {
  const double uh = h1_norm(u), bh = h1_norm(B);
  if (uh == 0.0 || bh == 0.0) return std::nullopt;
  LemmaRatios r;
  const QField adv = convective(u, u);
  r.convective = lq_norm(adv, kDefaultLq) / (uh * uh);
  r.lorentz = lq_norm(lorentz(B, 1.0), kDefaultLq) / (bh * bh);
  r.dirac = l2_norm(dirac_fwd(B)) / bh;
  r.composed = l2_norm(ops.teodorescu(adv)) / (uh * uh);
  return r;
}

/// Sample family shared by the estimator and by holdout checks.
inline QField constants_sample(const DomainPtr& d, std::mt19937_64& rng) {
  RandomFieldOptions opt;
  opt.kind = FieldKind::pure;
  opt.zero_boundary = true;
  opt.max_wavenumber = 2;
  return random_smooth_field(d, rng, opt);
}

inline ConstantsBundle estimate_constants(const OperatorSet& ops, int samples, std::uint64_t seed) {
  if (samples < 10) throw std::invalid_argument("estimate_constants: need at least 10 samples");
  ConstantsBundle c;
  c.lambda_min = ops.lambda_min();
  c.C1 = 1.0 / c.lambda_min;
  c.k = ops.op_norm_TQT();
  std::mt19937_64 rng(seed);
  double cs = 0.0, cd = 0.0, cu = std::numeric_limits<double>::infinity();
  int used = 0;
  for (int s = 0; s < samples; ++s) {
    const QField u = constants_sample(ops.domain_ptr(), rng);
    const QField B = constants_sample(ops.domain_ptr(), rng);
    const auto r = lemma3_ratios(u, B, ops);
    if (!r) continue;
    ++used;
    cs = std::max(cs, r->max());
    const double uh = h1_norm(u);
    const QField du = dirac_fwd(u);
    cd = std::max(cd, l2_norm(du) / uh);
    cu = std::min(cu, sc_inner(du, du) / (uh * uh));
  }
  if (used == 0) throw std::runtime_error("estimate_constants: every sample was degenerate");
  c.Cs = 2.0 * cs;
  c.CD = 2.0 * cd;
  c.Cu = 0.5 * cu;
  c.provenance = {{"C1", Provenance::analytic},  {"lambda_min", Provenance::analytic}, {"k", Provenance::estimated},
                  {"Cs", Provenance::estimated}, {"CD", Provenance::estimated},         {"Cu", Provenance::estimated}};
  return c;
}

// ---------------------------------------------------------------------------
// Conditions

inline double cond1_threshold(const ConstantsBundle& c, double Rm) { return 1.0 / (2.0 * c.C1 * c.Cs * Rm * Rm); }

inline bool check_cond1(double u_h1, const ConstantsBundle& c, double Rm) { return u_h1 < cond1_threshold(c, Rm); }

inline double schauder_threshold(const ConstantsBundle& c, const MHDParams& prm) {
  return std::min(prm.mu0 / (prm.Re * prm.Re * c.k * c.CD), 1.0 / (prm.Rm * prm.Rm * c.k * c.CD));
}

inline bool check_schauder_bound(double u_h1, const ConstantsBundle& c, const MHDParams& prm) {
  return u_h1 <= schauder_threshold(c, prm);
}

inline double lipschitz_Ln(const ConstantsBundle& c, double C3, double C4, double F, const MHDParams& prm) {
  return 2.0 * prm.Re * prm.Re * c.C1 *
         (c.Cs * C3 + ((0.5 + c.Cs) * C4 / prm.mu0) * prm.Rm * prm.Rm * c.C1 * F);
}

struct Theorem4Result {
  bool ok = false;
  bool small_field = false;      ///< sup ||B||^2 / mu0 <= 1/(16 C1^2 Cs^2 Re^4)
  bool small_rm = false;         ///< Rm^2 < 4 Cs^2 Re^2 (8 W Re^2 C1 Cs - 1)/(1 + 2 Cs)
  bool negative_radicand = false;
  std::optional<double> W;       ///< empty when the radicand is negative
  double rm_bound = std::numeric_limits<double>::quiet_NaN();
};

inline Theorem4Result check_theorem4(const ConstantsBundle& c, const MHDParams& prm, double supB_h1) {
  Theorem4Result r;
  const double re2 = prm.Re * prm.Re, re4 = re2 * re2;
  const double cc = c.C1 * c.C1 * c.Cs * c.Cs;
  const double field = supB_h1 * supB_h1 / prm.mu0;
  r.small_field = field <= 1.0 / (16.0 * cc * re4);
  const double radicand = 1.0 / (4.0 * cc * re4) - field;
  if (radicand < 0.0) {
    r.negative_radicand = true;
    r.small_field = false;
    return r;
  }
  r.W = std::sqrt(radicand);
  r.rm_bound = 4.0 * c.Cs * c.Cs * re2 * (8.0 * *r.W * re2 * c.C1 * c.Cs - 1.0) / (1.0 + 2.0 * c.Cs);
  r.small_rm = prm.Rm * prm.Rm < r.rm_bound;
  r.ok = r.small_field && r.small_rm;
  return r;
}

}  // namespace qmhd
