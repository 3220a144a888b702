#include <gtest/gtest.h>

#include "stefanlab/constants.hpp"

using namespace stefanlab;

namespace {

ConstantsLedger ledger_for(int n, double p, double theta, double Lambda = 1.0, double c0 = 2.0, double c1 = 2.0) {
  return fix_constants(StructuralContext::from(n, p, Lambda, 0.45), c0, c1, 2.0, std::nullopt, theta, theta, 0.25,
                       0.5);
}

} // namespace

TEST(FixConstants, ConfiguredExample) {
  StructuralContext ctx{3, 3.0, 1.0, 0.4, 3.0};
  const auto led = fix_constants(ctx, 2.0, 16.0, 2.0, std::nullopt, 0.1, 0.1, 0.25, 0.5);
  EXPECT_NEAR(led.eps1.value, std::pow(2.0, -2.25), 1e-15);
  EXPECT_NEAR(led.eps1.value, 0.21022, 1e-5);
  EXPECT_NEAR(led.M.value, 1.0 + 1.0 / led.eps1.value, 1e-12);
  EXPECT_NEAR(led.M.value, 5.7569, 1e-4);
  EXPECT_EQ(led.M.provenance, Provenance::formula);
  EXPECT_EQ(led.c0.provenance, Provenance::configured);
  EXPECT_EQ(led.c_star.provenance, Provenance::measured);
}

TEST(FixConstants, LFormula) {
  StructuralContext ctx{3, 2.0, 1.0, 0.4, 3.0};
  const auto led = fix_constants(ctx, 2.0, 2.0, 2.0, std::nullopt, 0.01, 0.02, 0.25, 0.5);
  EXPECT_EQ(led.theta.value, 0.01);
  const double first = std::pow(32.0 * 0.4 * std::log(32.0) / 0.01, 0.4);
  EXPECT_NEAR(first, 28.76, 0.01);
  EXPECT_DOUBLE_EQ(led.L.value, first);
  EXPECT_GE(led.modulus(1.0).omega(1.0), 2.0 * ctx.Lambda * (1 - 1e-15));
}

TEST(FixConstants, P2UsesFirstBranchAndKeepsMAtLeastTwo) {
  StructuralContext ctx{3, 2.0, 1.0, 0.4, 3.0};
  const auto led = fix_constants(ctx, 2.0, 2.0, 2.0, std::nullopt, 0.1, 0.1, 0.25, 0.5);
  EXPECT_NEAR(led.eps1.value, std::pow(2.0, -9.0 / 4.0), 1e-15);
  EXPECT_GE(led.M.value, 2.0);
  EXPECT_FALSE(led.M.note.empty());
}

TEST(FixConstants, C3DefaultAndValidation) {
  const auto led = ledger_for(3, 3.0, 0.1);
  EXPECT_EQ(led.c3.provenance, Provenance::formula);
  EXPECT_GE(led.c3.value, 2.0 * led.c2.value);
  EXPECT_GE(led.c3.value, std::log(2.0 * led.c2.value) / led.c1.value);
  StructuralContext ctx{3, 3.0, 1.0, 0.4, 3.0};
  EXPECT_THROW(fix_constants(ctx, 0.0, 2, 2, std::nullopt, 0.1, 0.1, 0.25, 0.5), InvalidArgument);
  EXPECT_THROW(fix_constants(ctx, 2, 2, 2, -1.0, 0.1, 0.1, 0.25, 0.5), InvalidArgument);
  EXPECT_THROW(fix_constants(ctx, 2, 2, 2, std::nullopt, 0.1, 0.1, 0.75, 0.5), InvalidArgument);
}

TEST(FixConstants, InvariantsOverParameterSweep) {
  for (int n = 1; n <= 5; ++n)
    for (double p : {2.0, 2.5, 3.0, 4.0, 6.0})
      for (double c1 : {0.5, 2.0, 16.0, 40.0}) {
        const auto led = ledger_for(n, p, 0.05, 1.5, 3.0, c1);
        EXPECT_GE(led.M.value, 2.0);
        if (p > 2.0) EXPECT_LE(led.eps1.value, std::pow(c1 / 16.0, 1.0 / (p - 2.0)) * (1 + 1e-15));
        EXPECT_GE(led.L.value * std::pow(p, -led.context.alpha), 2.0 * 1.5 * (1 - 1e-14));
      }
}

TEST(DecayProfile, Examples) {
  EXPECT_DOUBLE_EQ(decay_profile(1.0, 0.0, 0.0, 1.0, 2.0, 3.0), 0.5);
  EXPECT_NEAR(decay_profile(1.0, 1.0, 0.0, 1.0, 2.0, 3.0), 1.0 / 6.0, 1e-15);
  const double limit = decay_profile(0.7, 0.4, 0.1, 0.8, 2.5, 2.0);
  EXPECT_NEAR(limit, 0.7 / 2.5 * std::exp(-2.5 * 0.3 / 0.64), 1e-15);
  const double near = decay_profile(0.7, 0.4, 0.1, 0.8, 2.5, 2.0 + 1e-6);
  EXPECT_LT(std::abs(near - limit) / limit, 1e-4);
}

TEST(DecayProfile, MonotoneAndBounded) {
  for (double p : {2.0, 2.3, 3.0, 5.0}) {
    double prev = decay_profile(1.3, 0.0, 0.0, 0.5, 4.0, p);
    EXPECT_DOUBLE_EQ(prev, 1.3 / 4.0);
    for (double t = 0.01; t < 5.0; t += 0.01) {
      const double v = decay_profile(1.3, t, 0.0, 0.5, 4.0, p);
      EXPECT_LE(v, prev);
      EXPECT_LE(v, 1.3 / 4.0);
      prev = v;
    }
  }
  EXPECT_THROW(decay_profile(1.0, -1.0, 0.0, 1.0, 2.0, 3.0), InvalidArgument);
}

TEST(RTilde, ClosedFormAndBoundary) {
  ModulusParams mp{3, 2.0, 0.4, 3.0, 2.0 * std::pow(2.0, 0.4), 2.0, 1.0};
  const auto rt = r_tilde_0(mp, 1.0);
  EXPECT_NEAR(rt.log_ratio, std::pow(mp.L, 2.5) - 2.0, 1e-12);
  EXPECT_NEAR(rt.log_ratio, rt.log_ratio_closed_form, 1e-13 * rt.log_ratio);
  EXPECT_NEAR(rt.log_ratio, 9.31, 0.05);
  EXPECT_NEAR(mp.omega(rt.radius), 1.0, 1e-13);
  mp.L = std::pow(2.0, 0.4) * 1.7;
  EXPECT_EQ(r_tilde_0(mp, 1.7).log_ratio, 0.0);
  EXPECT_THROW(r_tilde_0(mp, 2.0), InvalidArgument);
}

TEST(Induction, SingleFactorMatchesDirectEvaluation) {
  const auto led = ledger_for(3, 2.0, 0.01);
  const ModulusParams mp = led.modulus(1.0);
  const auto rt = r_tilde_0(mp, 1.0);
  for (int j = 1; j < 6; ++j) {
    const auto rep = certify_induction(mp, led, j - 1, j);
    const double wj = mp.omega_log(rt.log_ratio + j * std::log(32.0));
    const double wi = mp.omega_log(rt.log_ratio + (j - 1) * std::log(32.0));
    const double lhs = 1.0 - 0.01 / 32.0 * std::pow(wj, 2.5);
    EXPECT_NEAR(rep.product_slack, std::log(wj / wi) - std::log(lhs), 1e-12);
    EXPECT_EQ(rep.product_bound, lhs <= wj / wi);
  }
}

TEST(Induction, ShiftedChainAndClosureHoldWithFormulaL) {
  for (int n : {1, 2, 3, 4})
    for (double p : {2.0, 3.0, 4.0})
      for (double theta : {1e-3, 1e-2, 0.1, 0.5}) {
        const auto led = ledger_for(n, p, theta);
        const ModulusParams mp = led.modulus(1.0);
        for (int j = 1; j <= 30; j += 7)
          for (int i = 0; i < j; i += 3) {
            const auto rep = certify_induction(mp, led, i, j);
            EXPECT_TRUE(rep.pass_shifted()) << n << " " << p << " " << theta << " " << i << " " << j;
            EXPECT_TRUE(rep.log_bound);
          }
      }
}

TEST(Induction, LiteralChainFailsWhenFirstBranchOfLIsActive) {
  // With L equal to its first branch each ladder term falls short of the integral over the
  // interval above it, so the literal bound misses by a small relative margin.
  const auto led = ledger_for(3, 2.0, 0.01);
  const auto rep = certify_induction(led.modulus(1.0), led, 0, 20);
  EXPECT_FALSE(rep.product_bound);
  EXPECT_LT(rep.product_slack, 0.0);
  EXPECT_GT(rep.product_slack, -1e-4);
  EXPECT_TRUE(rep.closure);
}

TEST(Induction, HalvedLBreaksTheChain) {
  const auto led = ledger_for(3, 2.0, 0.01);
  ModulusParams mp = led.modulus(1.0);
  mp.L *= 0.5;
  bool any_literal = false, any_shifted = false;
  for (int j = 1; j <= 30; ++j)
    for (int i = 0; i < j; ++i) {
      const auto rep = certify_induction(mp, led, i, j);
      any_literal |= !rep.product_bound;
      any_shifted |= !rep.product_bound_shifted;
    }
  EXPECT_TRUE(any_literal);
  EXPECT_TRUE(any_shifted);
}

TEST(Induction, RejectsBadIndices) {
  const auto led = ledger_for(3, 2.0, 0.01);
  EXPECT_THROW(certify_induction(led.modulus(1.0), led, 3, 3), InvalidArgument);
}
