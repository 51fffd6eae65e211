#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "qmhd/energy.hpp"
#include "qmhd/random_fields.hpp"

using namespace qmhd;

namespace {

QField pure_sample(const DomainPtr& d, std::mt19937_64& rng) {
  RandomFieldOptions o;
  o.kind = FieldKind::pure;
  return random_smooth_field(d, rng, o);
}

}  // namespace

TEST(Energy, ZeroStateIsExactlyZero) {
  auto d = unit_cube(6);
  MHDParams prm;
  const auto e = energy(QField(d), QField(d), prm, 1.0);
  EXPECT_EQ(e.J, 0.0);
  EXPECT_EQ(e.viscous_u, 0.0);
  EXPECT_EQ(e.lorentz_coupling, 0.0);
}

TEST(Energy, VelocityOnlyIsViscousTerm) {
  auto d = unit_cube(7);
  std::mt19937_64 rng(1);
  MHDParams prm;
  prm.Re = 3.5;
  for (int i = 0; i < 5; ++i) {
    const QField u = pure_sample(d, rng);
    const QField du = dirac_fwd(u);
    const double expected = sc_inner(du, du) / prm.Re;
    EXPECT_NEAR(energy(u, QField(d), prm).J, expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(Energy, TermsCombineWithDocumentedSigns) {
  auto d = unit_cube(6);
  std::mt19937_64 rng(2);
  MHDParams prm;
  prm.Re = 0.7;
  prm.Rm = 1.3;
  prm.mu0 = 2.0;
  const QField u = pure_sample(d, rng), B = pure_sample(d, rng);
  const auto e = energy(u, B, prm);
  EXPECT_NEAR(e.J, e.viscous_u + e.viscous_B - e.lorentz_coupling + e.induction_coupling, 1e-14 * std::abs(e.J) + 1e-14);
  EXPECT_NEAR(e.lorentz_coupling, sc_inner(lorentz(B, 2.0), u), 1e-14 * std::abs(e.lorentz_coupling) + 1e-15);
  EXPECT_GE(e.viscous_u, 0.0);
  EXPECT_GE(e.viscous_B, 0.0);
}

TEST(Energy, RejectsNonPureFields) {
  auto d = unit_cube(4);
  MHDParams prm;
  EXPECT_THROW(energy(QField::constant(d, Quaternion::scalar(1)), QField(d), prm), std::invalid_argument);
}

TEST(Coercivity, RadiusHandEvaluation) {
  MHDParams prm;
  prm.Re = 2.0;
  prm.Rm = 4.0;
  prm.mu0 = 0.5;
  // min(3/2, 3/4) / (1 + 1/(2*0.5)) = 0.75 / 2
  EXPECT_NEAR(coercivity_radius(prm, 3.0), 0.375, 1e-14);
  EXPECT_TRUE(is_coercive(0.374, prm, 3.0));
  EXPECT_FALSE(is_coercive(0.375, prm, 3.0));
  prm.Re = prm.Rm = prm.mu0 = 1.0;
  // 1 / 1.5
  EXPECT_NEAR(coercivity_radius(prm, 1.0), 2.0 / 3.0, 1e-14);
}

TEST(Coercivity, LowerBoundHandEvaluation) {
  MHDParams prm;
  prm.Re = 2.0;
  prm.Rm = 4.0;
  prm.mu0 = 0.5;
  // shift = 0.5 * (2 + 2) * 0.1 = 0.2; (1.5 - 0.2) * 0.25 + (0.75 - 0.2) * 0.01
  EXPECT_NEAR(lower_bound_estimate(0.5, 0.1, prm, 3.0), 1.3 * 0.25 + 0.55 * 0.01, 1e-14);
}

TEST(Coercivity, FlagAndRadiusInReport) {
  auto d = unit_cube(5);
  MHDParams prm;
  const auto e = energy(QField(d), QField(d), prm, 1.0);
  EXPECT_TRUE(e.coercivity_ok);
  EXPECT_NEAR(e.rho_max, 2.0 / 3.0, 1e-14);
  const auto skipped = energy(QField(d), QField(d), prm);
  EXPECT_FALSE(skipped.coercivity_ok);
  EXPECT_EQ(skipped.rho_max, 0.0);
}

TEST(Energy, CsvRow) {
  EnergyReport e;
  e.J = 0.5;
  e.coercivity_ok = true;
  std::ostringstream os;
  write_energy_csv_row(os, e);
  EXPECT_EQ(os.str(), "0.5,0,0,0,0,1,0\n");
  EXPECT_EQ(std::string(energy_csv_header()).find("J,"), 0u);
}
