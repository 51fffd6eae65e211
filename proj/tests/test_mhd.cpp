#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qmhd/mhd.hpp"
#include "qmhd/verification.hpp"

using namespace qmhd;

namespace {

// curl built from one difference type; the divergence of the same type annihilates it
QField curl_of(const QField& phi, bool forward) {
  auto d = [&](int a) { return forward ? partial_fwd(phi, a) : partial_bwd(phi, a); };
  const QField dx = d(0), dy = d(1), dz = d(2);
  QField out(phi.domain_ptr());
  for (std::size_t i = 0; i < phi.size(); ++i)
    out[i] = Quaternion::vector(dy[i].v3 - dz[i].v2, dz[i].v1 - dx[i].v3, dx[i].v2 - dy[i].v1);
  return out;
}

QField curl_fwd(const QField& phi) { return curl_of(phi, true); }
QField curl_bwd(const QField& phi) { return curl_of(phi, false); }

QField quadratic_pure(const DomainPtr& d, double a) {
  return QField::sample(d, [a](const Vec3& x) {
    return Quaternion::vector(a * x[1] * x[1] + x[2], x[0] * x[2] - a * x[0] * x[0], 0.5 * x[0] * x[1] + a * x[2] * x[2]);
  });
}

}  // namespace

TEST(Params, ExponentModes) {
  MHDParams p;
  p.Re = 3.0;
  p.Rm = 5.0;
  p.exponent_mode = ExponentMode::linear;
  EXPECT_EQ(p.coef_nonlinear(), 3.0);
  EXPECT_EQ(p.coef_pressure(), 3.0);
  EXPECT_EQ(p.coef_magnetic(), 5.0);
  p.exponent_mode = ExponentMode::squared;
  EXPECT_EQ(p.coef_nonlinear(), 9.0);
  EXPECT_EQ(p.coef_pressure(), 9.0);
  EXPECT_EQ(p.coef_magnetic(), 25.0);
  p.exponent_mode = ExponentMode::mixed;
  EXPECT_EQ(p.coef_nonlinear(), 3.0);
  EXPECT_EQ(p.coef_pressure(), 9.0);
  EXPECT_EQ(p.coef_magnetic(), 25.0);
  for (auto m : {ExponentMode::linear, ExponentMode::squared, ExponentMode::mixed})
    EXPECT_EQ(parse_exponent_mode(to_string(m)), m);
  EXPECT_THROW(parse_exponent_mode("cubic"), std::invalid_argument);
  p.Re = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Terms, LorentzOfLinearField) {
  // B = (0, x1, 0): curl B = e3, (curl B) x B = (-x1, 0, 0)
  auto d = unit_cube(6);
  const auto B = QField::sample(d, [](const Vec3& x) { return Quaternion::vector(0, x[0], 0); });
  const auto L = lorentz(B, 2.0);
  for (std::size_t i = 0; i < d->size(); ++i) {
    const auto x = d->center(i);
    EXPECT_NEAR(L[i].v1, -x[0] / 2.0, 1e-12);
    EXPECT_NEAR(L[i].v2, 0.0, 1e-12);
    EXPECT_NEAR(L[i].v3, 0.0, 1e-12);
    EXPECT_EQ(L[i].s, 0.0);
  }
  EXPECT_THROW(lorentz(QField::constant(d, Quaternion::scalar(1.0)), 1.0), std::invalid_argument);
}

TEST(Terms, ConvectiveOfLinearField) {
  auto d = unit_cube(5);
  const auto a = QField::constant(d, Quaternion::vector(1, 2, 3));
  const auto w = QField::sample(d, [](const Vec3& x) { return Quaternion::vector(x[0], x[1], 0); });
  const auto c = convective(a, w);
  for (std::size_t i = 0; i < d->size(); ++i) {
    EXPECT_NEAR(c[i].v1, 1.0, 1e-12);
    EXPECT_NEAR(c[i].v2, 2.0, 1e-12);
    EXPECT_NEAR(c[i].v3, 0.0, 1e-12);
  }
}

TEST(Terms, PressureGradientIsPure) {
  auto d = unit_cube(5);
  const auto p = QField::sample(d, [](const Vec3& x) { return Quaternion::scalar(x[0] + 2 * x[1] - x[2]); });
  const auto g = pressure_gradient(p);
  EXPECT_TRUE(g.is_pure());
  for (std::size_t i = 0; i < d->size(); ++i) EXPECT_NEAR(abs(g[i] - Quaternion::vector(1, 2, -1)), 0.0, 1e-12);
}

TEST(Residual, ZeroStateIsExact) {
  auto d = unit_cube(6);
  MHDParams prm;
  const auto r = residual_strong(MHDState::zero(d), prm);
  EXPECT_EQ(r.momentum, 0.0);
  EXPECT_EQ(r.induction, 0.0);
  EXPECT_EQ(r.div_u, 0.0);
  EXPECT_EQ(r.div_B, 0.0);
}

TEST(Residual, WeakMatchesStrongOnQuadratics) {
  auto d = unit_cube(9);
  std::mt19937_64 rng(1);
  MHDParams prm;
  prm.Re = 2.0;
  prm.Rm = 0.5;
  prm.mu0 = 1.5;
  const MHDState s{quadratic_pure(d, 0.3), quadratic_pure(d, -0.7),
                   QField::sample(d, [](const Vec3& x) { return Quaternion::scalar(x[0] * x[1] - x[2] * x[2]); })};
  const QField v = random_interior_field(d, rng, 2);
  const QField w = curl_fwd(vector_part(random_interior_field(d, rng, 2)));
  ASSERT_TRUE(has_zero_collar(w));
  const auto [mom, ind] = residual_fields(s, prm);
  const auto [rv, rw] = residual_weak(s, prm, v, w);
  EXPECT_NEAR(rv, sc_inner(mom, v), 1e-10 * l2_norm(mom) * l2_norm(v));
  EXPECT_NEAR(rw, sc_inner(ind, w), 1e-10 * l2_norm(ind) * l2_norm(w));
}

// grad+ is adjoint to -div-, so backward-solenoidal tests see no pressure
TEST(Residual, PressureDropsOutAgainstSolenoidalTests) {
  auto d = unit_cube(8);
  std::mt19937_64 rng(2);
  const QField p = scalar_part(smooth_sample(d, rng, false));
  const QField w = curl_bwd(vector_part(random_interior_field(d, rng, 2)));
  EXPECT_NEAR(sc_inner(pressure_gradient(p), w), 0.0, 1e-12 * l2_norm(p) * l2_norm(w) * 64);
}

TEST(Residual, WeakRejectsBadTestFields) {
  auto d = unit_cube(6);
  std::mt19937_64 rng(3);
  MHDParams prm;
  const auto s = MHDState::zero(d);
  const QField ok = curl_fwd(vector_part(random_interior_field(d, rng, 2)));
  const QField collar = QField::constant(d, Quaternion::vector(1, 0, 0));
  EXPECT_THROW(residual_weak(s, prm, collar, ok), std::invalid_argument);
  const QField not_solenoidal = vector_part(random_interior_field(d, rng, 1));
  EXPECT_THROW(residual_weak(s, prm, ok, not_solenoidal), std::invalid_argument);
}

TEST(Residual, LorentzAgainstCurlIdentity) {
  auto d = unit_cube(7);
  std::mt19937_64 rng(4);
  RandomFieldOptions o;
  o.kind = FieldKind::pure;
  const QField B = random_smooth_field(d, rng, o);
  const QField L = lorentz(B, 1.0), div = divergence(B);
  const QField dx = partial_fwd(B, 0), dy = partial_fwd(B, 1), dz = partial_fwd(B, 2);
  for (std::size_t i = 0; i < d->size(); ++i) {
    const Quaternion curl = Quaternion::vector(dy[i].v3 - dz[i].v2, dz[i].v1 - dx[i].v3, dx[i].v2 - dy[i].v1);
    const Quaternion expected = cross3(curl, B[i]) - B[i] * div[i].s;
    EXPECT_NEAR(abs(L[i] - expected), 0.0, 1e-12 * (1.0 + abs(expected)));
  }
}

class MhdOps : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { ops = new OperatorSet(unit_cube(8)); }
  static void TearDownTestSuite() {
    delete ops;
    ops = nullptr;
  }
  static OperatorSet* ops;
};
OperatorSet* MhdOps::ops = nullptr;

TEST_F(MhdOps, LerayRemovesDivergence) {
  std::mt19937_64 rng(5);
  RandomFieldOptions o;
  o.kind = FieldKind::pure;
  const QField u = random_smooth_field(ops->domain_ptr(), rng, o);
  const QField v = leray_project(u, *ops);
  EXPECT_TRUE(v.is_pure());
  EXPECT_LT(l2_norm_interior(divergence(v)), 1e-10 * l2_norm(u));
  // solenoidal input is left alone
  const QField w = curl_fwd(vector_part(random_interior_field(ops->domain_ptr(), rng, 2)));
  EXPECT_LT(l2_norm(leray_project(w, *ops) - w), 1e-10 * l2_norm(w));
}

TEST_F(MhdOps, LerayAnnihilatesGradients) {
  std::mt19937_64 rng(6);
  const QField psi = scalar_part(random_interior_field(ops->domain_ptr(), rng, 1));
  const QField g = gradient_bwd(psi);
  EXPECT_LT(l2_norm(leray_project(g, *ops)), 1e-10 * l2_norm(g));
}

TEST_F(MhdOps, ZeroDataGivesZeroRightSides) {
  MHDParams prm;
  const auto s = MHDState::zero(ops->domain_ptr());
  EXPECT_EQ(max_norm(tqt_rhs_u(s, prm, *ops)), 0.0);
  EXPECT_EQ(max_norm(tqt_rhs_B(s, prm, *ops)), 0.0);
  EXPECT_EQ(max_norm(tqt_rhs_p(s, prm, *ops)), 0.0);
  EXPECT_EQ(max_norm(boundary_lift(BoundaryData(ops->domain_ptr()), *ops)), 0.0);
}

TEST_F(MhdOps, RightSidesArePureAndLinearInForcing) {
  MHDParams prm;
  auto [fu, fB] = manufactured_forcing(ops->domain_ptr(), 1.0);
  prm.force_u = fu;
  prm.force_B = fB;
  const auto s = MHDState::zero(ops->domain_ptr());
  const QField r1 = tqt_rhs_u(s, prm, *ops);
  EXPECT_TRUE(r1.is_pure());
  prm.force_u = fu * 2.0;
  const QField r2 = tqt_rhs_u(s, prm, *ops);
  EXPECT_LT(l2_norm(r2 - r1 * 2.0), 1e-12 * l2_norm(r2));
  EXPECT_TRUE(tqt_rhs_B(s, prm, *ops).is_pure());
  EXPECT_TRUE(tqt_rhs_p(s, prm, *ops).is_scalar());
}

TEST(Forcing, ManufacturedIsPureAndBounded) {
  auto d = unit_cube(8);
  auto [fu, fB] = manufactured_forcing(d, 0.5);
  EXPECT_TRUE(fu.is_pure());
  EXPECT_TRUE(fB.is_pure());
  EXPECT_LE(max_norm(fu), 0.5 * std::sqrt(3.0));
  EXPECT_GT(max_norm(fu), 0.0);
}
