#pragma once

/*! \file
 *  \brief Voxel domains, quaternion-valued cell fields and their inner products.
 *
 *  Storage is cell-centred. Volume integrals use the midpoint rule and
 *  surface integrals the face midpoint. The one-cell layer next to the
 *  boundary ("collar") stands in for the trace: a field with zero collar is
 *  the discrete analogue of a function vanishing on the boundary.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "qmhd/errors.hpp"
#include "qmhd/quaternion.hpp"

namespace qmhd {

using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

struct BoundaryFace {
  std::size_t cell;  ///< linear index of the adjacent interior cell
  int axis;          ///< 0, 1 or 2
  int orientation;   ///< +1 for the high side, -1 for the low side
  Vec3 normal;       ///< outward unit normal
  Vec3 center;       ///< face midpoint
  double area;       ///< h^2
};

class VoxelDomain {
 public:
  VoxelDomain(Vec3 origin, Index3 n, double h) : origin_(origin), n_(n), h_(h) {
    for (int k = 0; k < n_[2]; ++k)
      for (int j = 0; j < n_[1]; ++j)
        for (int i = 0; i < n_[0]; ++i) {
          const Index3 c{i, j, k};
          for (int axis = 0; axis < 3; ++axis) {
            for (int orient : {-1, +1}) {
              const bool on_side = orient < 0 ? c[axis] == 0 : c[axis] == n_[axis] - 1;
              if (!on_side) continue;
              BoundaryFace f{};
              f.cell = index(i, j, k);
              f.axis = axis;
              f.orientation = orient;
              f.normal = {0.0, 0.0, 0.0};
              f.normal[axis] = orient;
              f.center = center(i, j, k);
              f.center[axis] += 0.5 * orient * h_;
              f.area = h_ * h_;
              faces_.push_back(f);
            }
          }
        }
  }

  const Vec3& origin() const { return origin_; }
  const Index3& extent() const { return n_; }
  int n(int axis) const { return n_[axis]; }
  double h() const { return h_; }
  double cell_volume() const { return h_ * h_ * h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2]; }
  const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(n_[1]) * k);
  }
  std::size_t index(const Index3& c) const { return index(c[0], c[1], c[2]); }
  Index3 coords(std::size_t idx) const {
    const int i = static_cast<int>(idx % n_[0]);
    const std::size_t rest = idx / n_[0];
    return {i, static_cast<int>(rest % n_[1]), static_cast<int>(rest / n_[1])};
  }

  Vec3 center(int i, int j, int k) const {
    return {origin_[0] + (i + 0.5) * h_, origin_[1] + (j + 0.5) * h_, origin_[2] + (k + 0.5) * h_};
  }
  Vec3 center(std::size_t idx) const {
    const auto c = coords(idx);
    return center(c[0], c[1], c[2]);
  }

  /// Distance in cells to the nearest boundary layer (0 for collar cells).
  int depth(std::size_t idx) const {
    const auto c = coords(idx);
    int d = c[0];
    for (int a = 0; a < 3; ++a) d = std::min({d, c[a], n_[a] - 1 - c[a]});
    return d;
  }
  bool in_collar(std::size_t idx) const { return depth(idx) == 0; }

  bool same_grid(const VoxelDomain& o) const {
    return n_ == o.n_ && h_ == o.h_ && origin_ == o.origin_;
  }

 private:
  Vec3 origin_;
  Index3 n_;
  double h_;
  std::vector<BoundaryFace> faces_;
};

using DomainPtr = std::shared_ptr<const VoxelDomain>;

/// Uniform isotropic voxelization of the box [origin, origin + extent].
inline DomainPtr build_domain(Vec3 origin, Vec3 physical_extent, Index3 n) {
  for (int a = 0; a < 3; ++a) {
    if (n[a] < 2) throw std::invalid_argument("build_domain: need at least 2 cells per axis");
    if (!(physical_extent[a] > 0.0)) throw std::invalid_argument("build_domain: extents must be positive");
  }
  const double h = physical_extent[0] / n[0];
  for (int a = 1; a < 3; ++a) {
    const double ha = physical_extent[a] / n[a];
    if (std::abs(ha - h) > 1e-12 * h) throw std::invalid_argument("build_domain: spacing must be isotropic");
  }
  return std::make_shared<const VoxelDomain>(origin, n, h);
}

inline DomainPtr unit_cube(int n) { return build_domain({0, 0, 0}, {1, 1, 1}, {n, n, n}); }

class QField {
 public:
  QField() = default;
  explicit QField(DomainPtr d) : domain_(std::move(d)), values_(domain_->size()) {}
  QField(DomainPtr d, std::vector<Quaternion> values) : domain_(std::move(d)), values_(std::move(values)) {
    if (values_.size() != domain_->size()) throw DomainMismatch("QField: value count does not match domain");
  }

  /// Samples f at every cell centre.
  static QField sample(DomainPtr d, const std::function<Quaternion(const Vec3&)>& f) {
    QField out(d);
    for (std::size_t i = 0; i < out.size(); ++i) out.values_[i] = f(d->center(i));
    return out;
  }
  static QField constant(DomainPtr d, const Quaternion& q) {
    QField out(d);
    std::fill(out.values_.begin(), out.values_.end(), q);
    return out;
  }

  const VoxelDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  std::size_t size() const { return values_.size(); }

  Quaternion& operator[](std::size_t i) { return values_[i]; }
  const Quaternion& operator[](std::size_t i) const { return values_[i]; }
  Quaternion& at(int i, int j, int k) { return values_[domain_->index(i, j, k)]; }
  const Quaternion& at(int i, int j, int k) const { return values_[domain_->index(i, j, k)]; }

  std::span<Quaternion> values() { return values_; }
  std::span<const Quaternion> values() const { return values_; }

  bool is_pure() const {
    for (const auto& q : values_)
      if (q.s != 0.0) return false;
    return true;
  }
  bool is_scalar() const {
    for (const auto& q : values_)
      if (q.v1 != 0.0 || q.v2 != 0.0 || q.v3 != 0.0) return false;
    return true;
  }

  QField& operator+=(const QField& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  QField& operator-=(const QField& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  QField& operator*=(double a) {
    for (auto& q : values_) q *= a;
    return *this;
  }

  void check_same(const QField& o) const {
    if (!domain_ || !o.domain_ || (domain_ != o.domain_ && !domain_->same_grid(*o.domain_))) {
      throw DomainMismatch("fields live on different domains");
    }
  }

 private:
  DomainPtr domain_;
  std::vector<Quaternion> values_;
};

inline QField operator+(QField a, const QField& b) { return a += b; }
inline QField operator-(QField a, const QField& b) { return a -= b; }
inline QField operator*(QField a, double k) { return a *= k; }
inline QField operator*(double k, QField a) { return a *= k; }
inline QField operator-(QField a) { return a *= -1.0; }

/// Pointwise map.
template <class Fn>
QField map_field(const QField& u, Fn&& fn) {
  QField out(u.domain_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = fn(u[i]);
  return out;
}

inline QField scalar_part(const QField& u) {
  return map_field(u, [](const Quaternion& q) { return Quaternion::scalar(q.s); });
}
inline QField vector_part(const QField& u) { return map_field(u, [](const Quaternion& q) { return vec(q); }); }

/// Pointwise left product a(x) b(x).
inline QField pointwise_mul(const QField& a, const QField& b) {
  a.check_same(b);
  QField out(a.domain_ptr());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = qmul(a[i], b[i]);
  return out;
}

struct BoundaryData {
  DomainPtr domain;
  std::vector<Quaternion> values;  ///< one per boundary face, in domain face order

  explicit BoundaryData(DomainPtr d) : domain(std::move(d)), values(domain->boundary_faces().size()) {}
  BoundaryData(DomainPtr d, std::vector<Quaternion> v) : domain(std::move(d)), values(std::move(v)) {
    if (values.size() != domain->boundary_faces().size()) {
      throw DomainMismatch("BoundaryData: face count does not match domain");
    }
  }
};

// ---------------------------------------------------------------------------
// Inner products and norms

/// Quaternion-valued L2 pairing: h^3 sum conj(u) v.
inline Quaternion l2_inner(const QField& u, const QField& v) {
  u.check_same(v);
  Quaternion acc;
  for (std::size_t i = 0; i < u.size(); ++i) acc += qmul(conj(u[i]), v[i]);
  return acc * u.domain().cell_volume();
}

/// Real inner product Sc <u, v>.
inline double sc_inner(const QField& u, const QField& v) {
  u.check_same(v);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += u[i].s * v[i].s + u[i].v1 * v[i].v1 + u[i].v2 * v[i].v2 + u[i].v3 * v[i].v3;
  }
  return acc * u.domain().cell_volume();
}

inline double l2_norm(const QField& u) { return std::sqrt(sc_inner(u, u)); }

/// L2 norm restricted to cells at least `min_depth` cells away from the boundary.
inline double l2_norm_interior(const QField& u, int min_depth = 1) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.domain().depth(i) >= min_depth) acc += norm_sq(u[i]);
  return std::sqrt(acc * u.domain().cell_volume());
}

inline double max_norm(const QField& u, int min_depth = 0) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.domain().depth(i) >= min_depth) m = std::max(m, abs(u[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Difference stencils. Forward differences fall back to backward ones on the
// high face and vice versa, so every operator is total.

inline QField partial_fwd(const QField& u, int axis) {
  const auto& d = u.domain();
  QField out(u.domain_ptr());
  const double inv_h = 1.0 / d.h();
  const int n = d.n(axis);
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    auto c = d.coords(idx);
    if (c[axis] + 1 < n) {
      auto c2 = c;
      ++c2[axis];
      out[idx] = (u[d.index(c2)] - u[idx]) * inv_h;
    } else {
      auto c2 = c;
      --c2[axis];
      out[idx] = (u[idx] - u[d.index(c2)]) * inv_h;
    }
  }
  return out;
}

inline QField partial_bwd(const QField& u, int axis) {
  const auto& d = u.domain();
  QField out(u.domain_ptr());
  const double inv_h = 1.0 / d.h();
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    auto c = d.coords(idx);
    if (c[axis] > 0) {
      auto c2 = c;
      --c2[axis];
      out[idx] = (u[idx] - u[d.index(c2)]) * inv_h;
    } else {
      auto c2 = c;
      ++c2[axis];
      out[idx] = (u[d.index(c2)] - u[idx]) * inv_h;
    }
  }
  return out;
}

/// Central differences in the interior, one-sided on the collar.
inline QField partial_central(const QField& u, int axis) {
  const auto& d = u.domain();
  QField out(u.domain_ptr());
  const double inv_h = 1.0 / d.h();
  const int n = d.n(axis);
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    auto c = d.coords(idx);
    auto lo = c, hi = c;
    --lo[axis];
    ++hi[axis];
    if (c[axis] > 0 && c[axis] + 1 < n) {
      out[idx] = (u[d.index(hi)] - u[d.index(lo)]) * (0.5 * inv_h);
    } else if (c[axis] == 0) {
      out[idx] = (u[d.index(hi)] - u[idx]) * inv_h;
    } else {
      out[idx] = (u[idx] - u[d.index(lo)]) * inv_h;
    }
  }
  return out;
}

/// sqrt of the integral of |u|^2 + sum |d_i u|^2 (forward differences).
inline double h1_norm(const QField& u) {
  double acc = sc_inner(u, u);
  for (int a = 0; a < 3; ++a) {
    const auto du = partial_fwd(u, a);
    acc += sc_inner(du, du);
  }
  return std::sqrt(acc);
}

inline constexpr double kDefaultLq = 1.25;

inline double lq_norm(const QField& u, double q = kDefaultLq) {
  const bool admissible = q == 2.0 || (q > 1.0 && q < 1.5);
  if (!admissible) throw std::invalid_argument("lq_norm: q must lie in (1, 3/2) or equal 2");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += std::pow(abs(u[i]), q);
  return std::pow(acc * u.domain().cell_volume(), 1.0 / q);
}

// ---------------------------------------------------------------------------
// Boundary handling

inline BoundaryData trace_boundary(const QField& u) {
  BoundaryData out(u.domain_ptr());
  const auto& faces = u.domain().boundary_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) out.values[f] = u[faces[f].cell];
  return out;
}

inline QField zero_boundary(QField u) {
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.domain().in_collar(i)) u[i] = Quaternion{};
  return u;
}

inline bool has_zero_collar(const QField& u) {
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.domain().in_collar(i) && norm_sq(u[i]) != 0.0) return false;
  return true;
}

inline double mean_scalar(const QField& u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i].s;
  return u.size() ? acc / static_cast<double>(u.size()) : 0.0;
}

}  // namespace qmhd
