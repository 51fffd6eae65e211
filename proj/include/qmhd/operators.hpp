#pragma once

/*! \file
 *  \brief Discrete Dirac, Teodorescu and Cauchy operators and the Bergman/Hodge split.
 *
 *  The Dirac operator D = e1 d1 + e2 d2 + e3 d3 is discretised with forward
 *  (D+) and backward (D-) differences. The Teodorescu transform is a dense
 *  midpoint quadrature of the Cauchy kernel x/|x|^3 with the singular cell
 *  dropped, the Cauchy transform a face-midpoint quadrature over the voxel
 *  boundary. The complement Q of the Bergman projection is the orthogonal
 *  projection onto D+ applied to zero-collar fields; its normal equations are
 *  solved by conjugate gradients preconditioned with the scalar Dirichlet
 *  Laplacian, which is spectrally close to (D+)^T D+.
 */

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "qmhd/errors.hpp"
#include "qmhd/grid.hpp"
#include "qmhd/parallel.hpp"
#include "qmhd/quaternion.hpp"

namespace qmhd {

// ---------------------------------------------------------------------------
// Local differential operators

inline QField dirac_fwd(const QField& u) {
  QField out(u.domain_ptr());
  for (int a = 0; a < 3; ++a) {
    const auto du = partial_fwd(u, a);
    const auto ea = Quaternion::e(a);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] += qmul(ea, du[i]);
  }
  return out;
}

inline QField dirac_bwd(const QField& u) {
  QField out(u.domain_ptr());
  for (int a = 0; a < 3; ++a) {
    const auto du = partial_bwd(u, a);
    const auto ea = Quaternion::e(a);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] += qmul(ea, du[i]);
  }
  return out;
}

/// Seven-point Laplacian; collar cells use one-sided second differences.
inline QField laplacian(const QField& u) {
  const auto& d = u.domain();
  QField out(u.domain_ptr());
  const double inv_h2 = 1.0 / (d.h() * d.h());
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    const auto c = d.coords(idx);
    Quaternion acc;
    for (int a = 0; a < 3; ++a) {
      const int n = d.n(a);
      auto at = [&](int offset) {
        auto c2 = c;
        c2[a] += offset;
        return u[d.index(c2)];
      };
      if (c[a] > 0 && c[a] + 1 < n) {
        acc += at(1) + at(-1) - 2.0 * u[idx];
      } else if (n >= 3) {
        acc += c[a] == 0 ? u[idx] - 2.0 * at(1) + at(2) : u[idx] - 2.0 * at(-1) + at(-2);
      }
    }
    out[idx] = acc * inv_h2;
  }
  return out;
}

/// -D- D+ u. Agrees with the seven-point stencil on the diagonal terms only;
/// the mixed terms e_i e_j (d-_i d+_j - d-_j d+_i) u survive on general fields.
inline QField dirac_laplacian(const QField& u) { return -dirac_bwd(dirac_fwd(u)); }

/// Forward divergence of the vector part, i.e. -Sc(D+ u).
inline QField divergence(const QField& u) {
  QField out(u.domain_ptr());
  for (int a = 0; a < 3; ++a) {
    const auto du = partial_fwd(u, a);
    for (std::size_t i = 0; i < u.size(); ++i) out[i].s += du[i][a + 1];
  }
  return out;
}

/// Backward gradient of the scalar part as a pure vector field.
inline QField gradient_bwd(const QField& p) {
  QField out(p.domain_ptr());
  for (int a = 0; a < 3; ++a) {
    const auto dp = partial_bwd(p, a);
    for (std::size_t i = 0; i < p.size(); ++i) out[i][a + 1] = dp[i].s;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// 4x4 matrix of q -> e_axis q, row-major.
inline std::array<double, 16> left_mul_matrix(int axis) {
  std::array<double, 16> m{};
  for (int col = 0; col < 4; ++col) {
    Quaternion basis;
    basis[col] = 1.0;
    const auto r = qmul(Quaternion::e(axis), basis);
    for (int row = 0; row < 4; ++row) m[row * 4 + col] = r[row];
  }
  return m;
}

inline Eigen::VectorXd pack(const QField& u) {
  Eigen::VectorXd v(4 * u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (int c = 0; c < 4; ++c) v[4 * i + c] = u[i][c];
  return v;
}

inline QField unpack(const DomainPtr& d, const Eigen::VectorXd& v) {
  QField out(d);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int c = 0; c < 4; ++c) out[i][c] = v[4 * i + c];
  return out;
}

struct HodgeContext {
  SpMat dirac;  // 4N x 4M: D+ restricted to zero-collar fields
  SpMat normal;
};

struct ScalarContext {
  Eigen::SimplicialLLT<SpMat> solver;
  SpMat matrix;
};

}  // namespace detail

class OperatorSet {
 public:
  explicit OperatorSet(DomainPtr d) : domain_(std::move(d)) {
    const auto& n = domain_->extent();
    for (std::size_t i = 0; i < domain_->size(); ++i) {
      if (domain_->in_collar(i)) {
        unknown_.push_back(-1);
      } else {
        unknown_.push_back(static_cast<long>(interior_count_++));
      }
    }
    span_ = {2 * n[0] - 1, 2 * n[1] - 1, 2 * n[2] - 1};
    kernel_.resize(static_cast<std::size_t>(span_[0]) * span_[1] * span_[2]);
    const double scale = domain_->h() / (4.0 * std::numbers::pi);
    for (int dk = -(n[2] - 1); dk < n[2]; ++dk)
      for (int dj = -(n[1] - 1); dj < n[1]; ++dj)
        for (int di = -(n[0] - 1); di < n[0]; ++di) {
          const double r2 = double(di) * di + double(dj) * dj + double(dk) * dk;
          Vec3 c{0.0, 0.0, 0.0};
          if (r2 > 0.0) {
            const double w = scale / (r2 * std::sqrt(r2));
            c = {w * di, w * dj, w * dk};
          }
          kernel_[kernel_index(di, dj, dk)] = c;
        }
    sign_ = calibrate_sign();
  }

  OperatorSet(const OperatorSet&) = delete;
  OperatorSet& operator=(const OperatorSet&) = delete;

  const VoxelDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  int kernel_sign() const { return sign_; }
  std::size_t interior_count() const { return interior_count_; }

  /// sigma / (4 pi) h^3 sum_{y != x} (x - y)/|x - y|^3 f(y). The kernel table
  /// stores h d/(4 pi |d|^3) per cell offset d, which already carries the h^3.
  QField teodorescu(const QField& f) const {
    check(f);
    return apply_kernel(f, static_cast<double>(sign_));
  }

  /// Face-midpoint quadrature of the Cauchy integral, same sign convention as teodorescu.
  QField cauchy(const BoundaryData& g) const {
    if (!g.domain || !g.domain->same_grid(*domain_)) throw DomainMismatch("cauchy: boundary data on another domain");
    const auto& faces = domain_->boundary_faces();
    std::vector<Quaternion> weighted(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) weighted[f] = g.values[f] * faces[f].area;
    QField out(domain_);
    const double c = -static_cast<double>(sign_) / (4.0 * std::numbers::pi);
    parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t idx = begin; idx < end; ++idx) {
        const Vec3 x = domain_->center(idx);
        Quaternion acc;
        for (std::size_t f = 0; f < faces.size(); ++f) {
          const auto& face = faces[f];
          const double r0 = x[0] - face.center[0], r1 = x[1] - face.center[1], r2 = x[2] - face.center[2];
          const double rr = r0 * r0 + r1 * r1 + r2 * r2;
          const double w = 1.0 / (rr * std::sqrt(rr));
          const auto& nn = face.normal;
          // (r/|r|^3) n as a quaternion: (-r.n, r x n)
          const Quaternion kn{-(r0 * nn[0] + r1 * nn[1] + r2 * nn[2]) * w, (r1 * nn[2] - r2 * nn[1]) * w,
                              (r2 * nn[0] - r0 * nn[2]) * w, (r0 * nn[1] - r1 * nn[0]) * w};
          acc += qmul(kn, weighted[f]);
        }
        out[idx] = acc * c;
      }
    });
    return out;
  }

  /// Solves laplacian(w) = -rhs on non-collar cells with w = 0 on the collar.
  QField poisson_dirichlet(const QField& rhs) const {
    check(rhs);
    QField w(domain_);
    if (interior_count_ == 0) return w;
    const auto& ctx = collar_poisson();
    Eigen::VectorXd b(interior_count_);
    for (int comp = 0; comp < 4; ++comp) {
      for (std::size_t i = 0; i < rhs.size(); ++i)
        if (unknown_[i] >= 0) b[unknown_[i]] = rhs[i][comp];
      const Eigen::VectorXd x = ctx.solver.solve(b);
      for (std::size_t i = 0; i < rhs.size(); ++i)
        if (unknown_[i] >= 0) w[i][comp] = x[unknown_[i]];
    }
    // residual check on the stencil actually used by laplacian()
    const auto lap = laplacian(w);
    double res = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      if (unknown_[i] < 0) continue;
      res += norm_sq(lap[i] + rhs[i]);
      ref += norm_sq(rhs[i]);
    }
    const double rel = ref > 0.0 ? std::sqrt(res / ref) : std::sqrt(res);
    if (rel > 1e-10) throw ConvergenceError("poisson_dirichlet: residual above 1e-10", rel);
    return w;
  }

  /// Orthogonal projection onto D+ (zero-collar fields).
  QField bergman_Q(const QField& f) const {
    check(f);
    if (interior_count_ == 0) return QField(domain_);
    const auto& ctx = hodge();
    const Eigen::VectorXd rhs = ctx.dirac.transpose() * detail::pack(f);
    const Eigen::VectorXd w = solve_normal(ctx, rhs);
    return detail::unpack(domain_, ctx.dirac * w);
  }

  QField bergman_P(const QField& f) const { return f - bergman_Q(f); }

  /// The zero-collar potential w with Q f = D+ w.
  QField hodge_potential(const QField& f) const {
    check(f);
    QField out(domain_);
    if (interior_count_ == 0) return out;
    const auto& ctx = hodge();
    const Eigen::VectorXd w = solve_normal(ctx, ctx.dirac.transpose() * detail::pack(f));
    for (std::size_t i = 0; i < out.size(); ++i)
      if (unknown_[i] >= 0)
        for (int c = 0; c < 4; ++c) out[i][c] = w[4 * unknown_[i] + c];
    return out;
  }

  QField tqt(const QField& f) const { return teodorescu(bergman_Q(teodorescu(f))); }

  /// Smallest eigenvalue of the cell-centred Dirichlet Laplacian (Dirichlet
  /// condition on the faces), by inverse iteration.
  double lambda_min() const {
    std::call_once(lambda_once_, [this] { lambda_ = compute_lambda_min(); });
    return lambda_;
  }

  /// Power-iteration estimate of ||T Q T|| on L2. T and Q are symmetric, so
  /// TQT is positive semidefinite and the Rayleigh growth converges to its norm.
  double op_norm_TQT(int max_iter = 100, double tol = 1e-6) const {
    QField x = QField::sample(domain_, [&](const Vec3& p) {
      const auto& o = domain_->origin();
      double s = 1.0;
      for (int a = 0; a < 3; ++a) s *= std::sin(std::numbers::pi * (p[a] - o[a]) / (domain_->h() * domain_->n(a)));
      return Quaternion{s, 0.5 * s, 0.25 * s, 0.125 * s};
    });
    x *= 1.0 / l2_norm(x);
    double est = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      QField y = tqt(x);
      const double ny = l2_norm(y);
      if (ny == 0.0) return 0.0;
      const double next = sc_inner(x, y);
      y *= 1.0 / ny;
      x = std::move(y);
      if (it > 2 && std::abs(next - est) <= tol * std::abs(next)) return next;
      est = next;
    }
    throw ConvergenceError("op_norm_TQT: power iteration did not settle", est);
  }

 private:
  std::size_t kernel_index(int di, int dj, int dk) const {
    const auto& n = domain_->extent();
    return (static_cast<std::size_t>(dk + n[2] - 1) * span_[1] + (dj + n[1] - 1)) * span_[0] + (di + n[0] - 1);
  }

  void check(const QField& f) const {
    if (f.domain_ptr() != domain_ && !f.domain().same_grid(*domain_)) throw DomainMismatch("field not on operator domain");
  }

  Quaternion kernel_sum_at(const QField& f, std::size_t idx) const {
    const auto& n = domain_->extent();
    const auto c = domain_->coords(idx);
    Quaternion acc;
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j) {
        const Vec3* row = &kernel_[kernel_index(c[0], c[1] - j, c[2] - k)];
        const Quaternion* fy = &f[domain_->index(0, j, k)];
        for (int i = 0; i < n[0]; ++i) {
          const Vec3& w = *(row - i);
          acc += pure_mul(w[0], w[1], w[2], fy[i]);
        }
      }
    return acc;
  }

  QField apply_kernel(const QField& f, double sign) const {
    QField out(domain_);
    parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t idx = begin; idx < end; ++idx) out[idx] = kernel_sum_at(f, idx) * sign;
    });
    return out;
  }

  /// Picks sigma so that D+(T f) = f on a smooth test field.
  int calibrate_sign() const {
    const auto& n = domain_->extent();
    const Index3 c{(n[0] - 1) / 2, (n[1] - 1) / 2, (n[2] - 1) / 2};
    const QField f = QField::sample(domain_, [](const Vec3& p) {
      return Quaternion{1.0 + 0.3 * p[0], 0.5 - 0.2 * p[1], 0.25 + 0.1 * p[2], -0.5 + 0.2 * p[0] * p[1]};
    });
    const Quaternion t0 = kernel_sum_at(f, domain_->index(c));
    Quaternion dt;
    for (int a = 0; a < 3; ++a) {
      auto c2 = c;
      ++c2[a];
      const Quaternion t1 = kernel_sum_at(f, domain_->index(c2));
      dt += qmul(Quaternion::e(a), (t1 - t0) / domain_->h());
    }
    const Quaternion target = f[domain_->index(c)];
    return abs(dt - target) <= abs(-dt - target) ? +1 : -1;
  }

  const detail::ScalarContext& collar_poisson() const {
    std::call_once(poisson_once_, [this] {
      auto ctx = std::make_unique<detail::ScalarContext>();
      const double inv_h2 = 1.0 / (domain_->h() * domain_->h());
      std::vector<detail::Triplet> trips;
      for (std::size_t i = 0; i < domain_->size(); ++i) {
        const long row = unknown_[i];
        if (row < 0) continue;
        trips.emplace_back(row, row, 6.0 * inv_h2);
        const auto c = domain_->coords(i);
        for (int a = 0; a < 3; ++a)
          for (int s : {-1, 1}) {
            auto c2 = c;
            c2[a] += s;
            const long col = unknown_[domain_->index(c2)];
            if (col >= 0) trips.emplace_back(row, col, -inv_h2);
          }
      }
      ctx->matrix.resize(interior_count_, interior_count_);
      ctx->matrix.setFromTriplets(trips.begin(), trips.end());
      ctx->solver.compute(ctx->matrix);
      poisson_ = std::move(ctx);
    });
    return *poisson_;
  }

  const detail::HodgeContext& hodge() const {
    std::call_once(hodge_once_, [this] {
      auto ctx = std::make_unique<detail::HodgeContext>();
      const double inv_h = 1.0 / domain_->h();
      std::vector<detail::Triplet> trips;
      for (std::size_t x = 0; x < domain_->size(); ++x) {
        const auto c = domain_->coords(x);
        for (int a = 0; a < 3; ++a) {
          const auto m = detail::left_mul_matrix(a);
          auto shifted = c;
          std::size_t plus, minus;
          if (c[a] + 1 < domain_->n(a)) {
            ++shifted[a];
            plus = domain_->index(shifted);
            minus = x;
          } else {
            --shifted[a];
            plus = x;
            minus = domain_->index(shifted);
          }
          for (auto [cell, coef] : {std::pair{plus, inv_h}, std::pair{minus, -inv_h}}) {
            const long col = unknown_[cell];
            if (col < 0) continue;
            for (int r = 0; r < 4; ++r)
              for (int k = 0; k < 4; ++k)
                if (m[r * 4 + k] != 0.0) trips.emplace_back(4 * x + r, 4 * col + k, coef * m[r * 4 + k]);
          }
        }
      }
      ctx->dirac.resize(4 * domain_->size(), 4 * interior_count_);
      ctx->dirac.setFromTriplets(trips.begin(), trips.end());
      ctx->normal = detail::SpMat(ctx->dirac.transpose()) * ctx->dirac;
      hodge_ = std::move(ctx);
    });
    return *hodge_;
  }

  Eigen::VectorXd precondition(const Eigen::VectorXd& r) const {
    const auto& solver = collar_poisson().solver;
    const Eigen::Index m = static_cast<Eigen::Index>(interior_count_);
    Eigen::VectorXd out(r.size()), comp(m);
    for (int c = 0; c < 4; ++c) {
      for (Eigen::Index i = 0; i < m; ++i) comp[i] = r[4 * i + c];
      const Eigen::VectorXd z = solver.solve(comp);
      for (Eigen::Index i = 0; i < m; ++i) out[4 * i + c] = z[i];
    }
    return out;
  }

  /// Preconditioned CG on (D+)^T D+ w = rhs.
  Eigen::VectorXd solve_normal(const detail::HodgeContext& ctx, const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    const double bnorm = rhs.norm();
    if (bnorm == 0.0) return x;
    Eigen::VectorXd r = rhs;
    Eigen::VectorXd z = precondition(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    for (int it = 0; it < 1000; ++it) {
      const Eigen::VectorXd ap = ctx.normal * p;
      const double alpha = rz / p.dot(ap);
      x += alpha * p;
      r -= alpha * ap;
      if (r.norm() <= 1e-14 * bnorm) return x;
      z = precondition(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    throw ConvergenceError("bergman_Q: normal equations did not converge", r.norm() / bnorm);
  }

  double compute_lambda_min() const {
    const std::size_t N = domain_->size();
    const double inv_h2 = 1.0 / (domain_->h() * domain_->h());
    std::vector<detail::Triplet> trips;
    for (std::size_t i = 0; i < N; ++i) {
      const auto c = domain_->coords(i);
      double diag = 6.0 * inv_h2;
      for (int a = 0; a < 3; ++a)
        for (int s : {-1, 1}) {
          auto c2 = c;
          c2[a] += s;
          if (c2[a] < 0 || c2[a] >= domain_->n(a)) {
            diag += inv_h2;  // ghost value -u puts the zero on the face
          } else {
            trips.emplace_back(i, domain_->index(c2), -inv_h2);
          }
        }
      trips.emplace_back(i, i, diag);
    }
    detail::SpMat a(N, N);
    a.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLLT<detail::SpMat> chol(a);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(N);
    x.normalize();
    double rq = x.dot(a * x);
    for (int it = 0; it < 500; ++it) {
      x = chol.solve(x);
      x.normalize();
      const double next = x.dot(a * x);
      if (std::abs(next - rq) <= 1e-13 * next) return next;
      rq = next;
    }
    throw ConvergenceError("lambda_min: inverse iteration did not converge", rq);
  }

  DomainPtr domain_;
  std::vector<long> unknown_;
  std::size_t interior_count_ = 0;
  Index3 span_{};
  std::vector<Vec3> kernel_;
  int sign_ = 1;

  mutable std::once_flag poisson_once_, hodge_once_, lambda_once_;
  mutable std::unique_ptr<detail::ScalarContext> poisson_;
  mutable std::unique_ptr<detail::HodgeContext> hodge_;
  mutable double lambda_ = 0.0;
};

/// Analytic smallest eigenvalue of the face-Dirichlet seven-point Laplacian on an n^3 box of spacing h.
inline double lambda_min_analytic(const VoxelDomain& d) {
  double sum = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double s = std::sin(std::numbers::pi / (2.0 * d.n(a)));
    sum += 4.0 / (d.h() * d.h()) * s * s;
  }
  return sum;
}

}  // namespace qmhd
