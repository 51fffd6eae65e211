#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qmhd/constants.hpp"

using namespace qmhd;

namespace {

ConstantsBundle hand_bundle() {
  ConstantsBundle c;
  c.C1 = 0.1;
  c.Cs = 2.0;
  c.CD = 3.0;
  c.k = 0.05;
  return c;
}

MHDParams params(double Re, double Rm, double mu0) {
  MHDParams p;
  p.Re = Re;
  p.Rm = Rm;
  p.mu0 = mu0;
  return p;
}

}  // namespace

TEST(Conditions, Cond1HandEvaluation) {
  const auto c = hand_bundle();
  // 1 / (2 * 0.1 * 2 * 2^2)
  EXPECT_NEAR(cond1_threshold(c, 2.0), 0.625, 1e-15);
  EXPECT_TRUE(check_cond1(0.6249, c, 2.0));
  EXPECT_FALSE(check_cond1(0.625, c, 2.0));
}

TEST(Conditions, SchauderHandEvaluation) {
  const auto c = hand_bundle();
  // min(1 / (1 * 0.05 * 3), 1 / (4 * 0.05 * 3))
  EXPECT_NEAR(schauder_threshold(c, params(1.0, 2.0, 1.0)), 1.0 / 0.6, 1e-14);
  EXPECT_TRUE(check_schauder_bound(1.66, c, params(1.0, 2.0, 1.0)));
  EXPECT_FALSE(check_schauder_bound(1.67, c, params(1.0, 2.0, 1.0)));
  // mu0 small makes the velocity term binding: 0.1 / (4 * 0.05 * 3)
  EXPECT_NEAR(schauder_threshold(c, params(2.0, 1.0, 0.1)), 0.1 / 0.6, 1e-14);
}

TEST(Conditions, LipschitzHandEvaluation) {
  const auto c = hand_bundle();
  // 2 * 1 * 0.1 * (2 * 1 + (2.5 * 2 / 1) * 4 * 0.1 * 0.5) = 0.2 * 3
  EXPECT_NEAR(lipschitz_Ln(c, 1.0, 2.0, 0.5, params(1.0, 2.0, 1.0)), 0.6, 1e-14);
  EXPECT_EQ(lipschitz_Ln(c, 0.0, 0.0, 0.0, params(1.0, 1.0, 1.0)), 0.0);
}

TEST(Conditions, Theorem4HandEvaluation) {
  const auto c = hand_bundle();
  const auto r = check_theorem4(c, params(1.0, 2.0, 1.0), 0.5);
  // radicand 1/(4 * 0.04) - 0.25 = 6
  ASSERT_TRUE(r.W.has_value());
  EXPECT_NEAR(*r.W, std::sqrt(6.0), 1e-14);
  EXPECT_TRUE(r.small_field);
  EXPECT_NEAR(r.rm_bound, 16.0 * (1.6 * std::sqrt(6.0) - 1.0) / 5.0, 1e-12);
  EXPECT_TRUE(r.small_rm);
  EXPECT_TRUE(r.ok);
  EXPECT_FALSE(check_theorem4(c, params(1.0, 4.0, 1.0), 0.5).small_rm);
}

TEST(Conditions, Theorem4NegativeRadicand) {
  const auto r = check_theorem4(hand_bundle(), params(1.0, 1.0, 1.0), 3.0);
  EXPECT_TRUE(r.negative_radicand);
  EXPECT_FALSE(r.W.has_value());
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(std::isnan(r.rm_bound));
}

class ConstantsEstimate : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ops = new OperatorSet(unit_cube(8));
    bundle = new ConstantsBundle(estimate_constants(*ops, 12, 42));
  }
  static void TearDownTestSuite() {
    delete bundle;
    delete ops;
  }
  static OperatorSet* ops;
  static ConstantsBundle* bundle;
};
OperatorSet* ConstantsEstimate::ops = nullptr;
ConstantsBundle* ConstantsEstimate::bundle = nullptr;

TEST_F(ConstantsEstimate, C1IsInverseLambda) {
  const double lam = lambda_min_analytic(ops->domain());
  EXPECT_NEAR(bundle->C1, 1.0 / lam, 0.01 / lam);
  EXPECT_EQ(bundle->provenance.at("C1"), Provenance::analytic);
  EXPECT_EQ(bundle->provenance.at("Cs"), Provenance::estimated);
}

TEST_F(ConstantsEstimate, TqtNormBoundedByInverseLambda) {
  EXPECT_GT(bundle->k, 0.0);
  EXPECT_LE(bundle->k * bundle->lambda_min, 1.1);
}

TEST_F(ConstantsEstimate, PositiveAndOrdered) {
  EXPECT_GT(bundle->Cs, 0.0);
  EXPECT_GT(bundle->CD, 0.0);
  EXPECT_GT(bundle->Cu, 0.0);
  // CD bounds ||Du|| / ||u||_H1 from above, Cu bounds its square from below
  EXPECT_LE(bundle->Cu, bundle->CD * bundle->CD);
}

TEST_F(ConstantsEstimate, SameSeedSameBundle) {
  const auto again = estimate_constants(*ops, 12, 42);
  EXPECT_EQ(again.Cs, bundle->Cs);
  EXPECT_EQ(again.CD, bundle->CD);
  EXPECT_EQ(again.Cu, bundle->Cu);
  EXPECT_EQ(again.k, bundle->k);
}

TEST_F(ConstantsEstimate, HoldoutRatiosBelowCs) {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 20; ++i) {
    const QField u = constants_sample(ops->domain_ptr(), rng), B = constants_sample(ops->domain_ptr(), rng);
    const auto r = lemma3_ratios(u, B, *ops);
    ASSERT_TRUE(r.has_value());
    EXPECT_LE(r->max(), bundle->Cs);
  }
}

TEST_F(ConstantsEstimate, RejectsTooFewSamples) { EXPECT_THROW(estimate_constants(*ops, 9, 1), std::invalid_argument); }

TEST(Lemma3, DegenerateFieldsSkipped) {
  auto d = unit_cube(4);
  OperatorSet ops(d);
  EXPECT_FALSE(lemma3_ratios(QField(d), QField(d), ops).has_value());
}
