#pragma once

/*! \file
 *  \brief Seeded smooth random fields for property tests and constant estimation.
 */

#include <cmath>
#include <numbers>
#include <random>

#include "qmhd/grid.hpp"

namespace qmhd {

enum class FieldKind { quaternion, pure, scalar };

struct RandomFieldOptions {
  FieldKind kind = FieldKind::quaternion;
  int max_wavenumber = 2;
  /// Multiply by a sine bump vanishing on the collar, then zero the collar.
  bool zero_boundary = false;
  double amplitude = 1.0;
};

/// Low-wavenumber trigonometric sum with coefficients ~ N(0,1) / (1 + |k|^2).
inline QField random_smooth_field(const DomainPtr& d, std::mt19937_64& rng, const RandomFieldOptions& opt = {}) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  struct Mode {
    int k[3];
    double coef[4];
    double phase[4];
  };
  std::vector<Mode> modes;
  const int K = opt.max_wavenumber;
  for (int a = 0; a <= K; ++a)
    for (int b = 0; b <= K; ++b)
      for (int c = 0; c <= K; ++c) {
        Mode m{{a, b, c}, {}, {}};
        const double damp = 1.0 / (1.0 + a * a + b * b + c * c);
        for (int q = 0; q < 4; ++q) {
          m.coef[q] = normal(rng) * damp;
          m.phase[q] = phase(rng);
        }
        modes.push_back(m);
      }

  const auto& o = d->origin();
  Vec3 len, first;
  for (int a = 0; a < 3; ++a) {
    len[a] = d->h() * d->n(a);
    first[a] = o[a] + 0.5 * d->h();
  }
  QField out = QField::sample(d, [&](const Vec3& x) {
    Quaternion q;
    for (const auto& m : modes) {
      const double arg = std::numbers::pi * (m.k[0] * (x[0] - o[0]) / len[0] + m.k[1] * (x[1] - o[1]) / len[1] +
                                             m.k[2] * (x[2] - o[2]) / len[2]);
      for (int c = 0; c < 4; ++c) q[c] += m.coef[c] * std::cos(arg + m.phase[c]);
    }
    if (opt.kind == FieldKind::pure) q.s = 0.0;
    if (opt.kind == FieldKind::scalar) q = Quaternion::scalar(q.s);
    if (opt.zero_boundary) {
      double env = 1.0;
      for (int a = 0; a < 3; ++a) {
        const double span = (d->n(a) - 1) * d->h();
        env *= std::sin(std::numbers::pi * (x[a] - first[a]) / span);
      }
      q *= env;
    }
    return q * opt.amplitude;
  });
  return opt.zero_boundary ? zero_boundary(std::move(out)) : out;
}

/// Arnold-Beltrami-Childress type flow: component i does not depend on x_i,
/// so it is divergence free under any difference stencil.
inline QField random_abc_field(const DomainPtr& d, std::mt19937_64& rng, double amplitude = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double A = normal(rng), B = normal(rng), C = normal(rng);
  const double w = 2.0 * std::numbers::pi / (d->h() * d->n(0));
  return QField::sample(d, [&](const Vec3& x) {
    return Quaternion::vector(A * std::sin(w * x[2]) + C * std::cos(w * x[1]),
                              B * std::sin(w * x[0]) + A * std::cos(w * x[2]),
                              C * std::sin(w * x[1]) + B * std::cos(w * x[0])) *
           amplitude;
  });
}

}  // namespace qmhd
