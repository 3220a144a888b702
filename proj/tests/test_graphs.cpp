#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "stefanlab/graphs.hpp"

using namespace stefanlab;

TEST(Mollifier, MatchesQuadratureOracle) {
  const RegularizedGraph g(0.0, 1.0, 0.1);
  for (double s = -0.12; s <= 0.12; s += 0.0037)
    EXPECT_NEAR(mollified_heaviside(g, s), oracle::heaviside(0.0, 0.1, s), 1e-10) << "s=" << s;
}

TEST(Mollifier, TrivialValues) {
  const RegularizedGraph g(0.0, 1.0, 0.1);
  EXPECT_EQ(mollified_heaviside(g, -0.2), 0.0);
  EXPECT_EQ(mollified_heaviside(g, 0.0), 0.5);
  EXPECT_EQ(mollified_heaviside(g, 0.2), 1.0);
  const double v = mollified_heaviside(g, 0.05);
  EXPECT_GT(v, 0.5);
  EXPECT_LT(v, 1.0);
  EXPECT_NEAR(v, 1.0 - mollified_heaviside(g, -0.05), 1e-12);
}

TEST(Mollifier, SymmetryAndMonotonicity) {
  const RegularizedGraph g(0.3, 1.0, 0.02);
  double prev = -1.0;
  for (int k = 0; k <= 2000; ++k) {
    const double d = 0.025 * k / 2000.0;
    EXPECT_NEAR(g.heaviside(0.3 + d) + g.heaviside(0.3 - d), 1.0, 1e-14);
    const double s = 0.27 + 0.06 * k / 2000.0;
    const double v = g.heaviside(s);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Mollifier, DerivativeNormalizedAndSupported) {
  const RegularizedGraph g(-0.5, 1.0, 0.07);
  const double mass = oracle::integrate([&](double s) { return g.heaviside_derivative(s); }, -0.57, -0.43, 1e-15);
  EXPECT_NEAR(mass, 1.0, 1e-10);
  EXPECT_EQ(g.heaviside_derivative(-0.57), 0.0);
  EXPECT_EQ(g.heaviside_derivative(-0.43), 0.0);
  EXPECT_GT(g.heaviside_derivative(-0.5), 0.0);
}

TEST(Mollifier, ConvergesToHeavisideGraph) {
  for (double eps : {0.1, 0.01, 0.001}) {
    const RegularizedGraph g(0.0, 1.0, eps);
    EXPECT_EQ(g.heaviside(-0.05), eps < 0.05 ? 0.0 : g.heaviside(-0.05));
    EXPECT_EQ(g.heaviside(0.0), 0.5);
  }
  const RegularizedGraph fine(0.0, 1.0, 1e-4);
  EXPECT_EQ(fine.heaviside(-1e-3), 0.0);
  EXPECT_EQ(fine.heaviside(1e-3), 1.0);
}

TEST(Enthalpy, TrivialValues) {
  const RegularizedGraph g(0.0, 1.0, 0.1);
  EXPECT_EQ(enthalpy(g, 1.0, 0.0, -1.0), -1.0);
  EXPECT_EQ(enthalpy(g, 1.0, 0.0, 0.0), 0.5);
  EXPECT_EQ(enthalpy(g, 0.5, 0.0, 2.0), 2.5);
  EXPECT_THROW(enthalpy(g, 1.5, 0.0, 0.0), InvalidArgument);
}

TEST(Enthalpy, StrictlyIncreasing) {
  const RegularizedGraph g(0.2, 1.0, 0.05, Beta::piecewise_linear({0.1}, {0.5, 2.0}));
  const double ds = 1e-4;
  for (double s = -1.0; s < 1.0; s += 0.0013) {
    const double slope = (g.enthalpy(s + ds) - g.enthalpy(s)) / ds;
    EXPECT_GE(slope, 0.5 - 1e-6);
  }
}

TEST(Enthalpy, PrimitiveMatchesQuadrature) {
  for (const Beta& b : {Beta::identity(), Beta::piecewise_linear({-0.3, 0.4}, {1.5, 0.5, 2.0}),
                        Beta::tanh_perturbed(0.6, 3.0)}) {
    const RegularizedGraph g(0.1, 0.8, 0.05, b);
    for (double u : {-1.0, -0.2, 0.0, 0.08, 0.1, 0.13, 0.7}) {
      const double ref = u >= 0.0 ? oracle::integrate([&](double s) { return g.enthalpy(s); }, 0.0, u, 1e-13)
                                  : -oracle::integrate([&](double s) { return g.enthalpy(s); }, u, 0.0, 1e-13);
      EXPECT_NEAR(g.enthalpy_primitive(u), ref, 1e-10) << b.name() << " u=" << u;
    }
  }
}

TEST(Enthalpy, DerivativeMatchesDifferenceQuotient) {
  const RegularizedGraph g(0.0, 1.0, 0.1, Beta::tanh_perturbed(-0.4, 2.0));
  for (double u = -0.3; u < 0.3; u += 0.01) {
    const double fd = (g.enthalpy(u + 1e-6) - g.enthalpy(u - 1e-6)) / 2e-6;
    EXPECT_NEAR(g.enthalpy_derivative(u), fd, 1e-5 * (1.0 + std::abs(fd)));
  }
}

TEST(JumpPrimitive, TrivialCases) {
  const RegularizedGraph g(0.0, 1.0, 0.1);
  EXPECT_EQ(enthalpy_jump_primitive(g, 0.0, 0.1, 5.0), 0.0);
  EXPECT_EQ(enthalpy_jump_primitive(g, 0.0, 0.3, 0.2), 0.0);
  EXPECT_EQ(enthalpy_jump_primitive(g, 0.0, -0.05, -0.06), 0.0);
}

TEST(JumpPrimitive, FullCrossingEqualsDistanceToCentre) {
  // Integration by parts: int H'(xi)(xi-k) dxi over the whole support equals b - k.
  const RegularizedGraph g(0.0, 1.0, 0.1);
  for (double b : {-0.2, 0.0, 0.35})
    for (double k : {-0.5, -0.11}) {
      const double kk = b + k;
      EXPECT_NEAR(enthalpy_jump_primitive(g, b, kk, b + 0.2), b - kk, 1e-12);
    }
}

TEST(JumpPrimitive, PartialMatchesOracle) {
  const RegularizedGraph g(0.0, 1.0, 0.1);
  for (double k : {-0.2, -0.05, 0.02})
    for (double v : {-0.03, 0.01, 0.07}) {
      const double lo = std::max(k, -0.1), hi = std::min(v, 0.1);
      const double ref = hi > lo ? oracle::integrate(
                                       [&](double xi) {
                                         return oracle::bump(xi / 0.1) / (0.1 * oracle::bump_mass()) * (xi - k);
                                       },
                                       lo, hi, 1e-15)
                                 : 0.0;
      EXPECT_NEAR(enthalpy_jump_primitive(g, 0.0, k, v), ref, 1e-12);
      EXPECT_GE(enthalpy_jump_primitive(g, 0.0, k, v), 0.0);
    }
}

TEST(Beta, TrivialValues) {
  const RegularizedGraph id(0.0, 1.0, 0.1);
  EXPECT_EQ(beta_apply(id, 3.7), 3.7);
  const RegularizedGraph pl(0.0, 1.0, 0.1, Beta::piecewise_linear({0.0}, {0.5, 2.0}));
  EXPECT_EQ(beta_apply(pl, 0.0), 0.0);
  EXPECT_EQ(pl.lipschitz(), 2.0);
}

TEST(Beta, RejectsInvalidTables) {
  EXPECT_THROW(Beta::piecewise_linear({0.0}, {1.0}), InvalidArgument);
  EXPECT_THROW(Beta::piecewise_linear({0.0, 0.0}, {1.0, 2.0, 1.0}), InvalidArgument);
  EXPECT_THROW(Beta::piecewise_linear({0.0}, {1.0, -1.0}), InvalidArgument);
  EXPECT_THROW(Beta::tanh_perturbed(-1.0), InvalidArgument);
  EXPECT_THROW(RegularizedGraph(0.0, 1.2, 0.1), InvalidArgument);
  EXPECT_THROW(RegularizedGraph(0.0, 1.0, 0.0), InvalidArgument);
}

TEST(Beta, RoundTripAndBiLipschitzProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> draw(-10.0, 10.0);
  for (const Beta& b : {Beta::identity(), Beta::piecewise_linear({0.0}, {0.5, 2.0}),
                        Beta::piecewise_linear({-2.0, 1.0, 3.0}, {3.0, 0.25, 1.0, 2.5}),
                        Beta::tanh_perturbed(2.0, 0.7), Beta::tanh_perturbed(-0.6, 4.0)}) {
    const double lam = b.lipschitz();
    double worst = 0.0;
    EXPECT_EQ(b(0.0), 0.0);
    for (int k = 0; k < 1000; ++k) {
      const double u = draw(rng), v = draw(rng);
      worst = std::max(worst, std::abs(b.inverse(b(u)) - u));
      const double du = std::abs(u - v), dw = std::abs(b(u) - b(v));
      EXPECT_LE(dw, lam * du * (1 + 1e-12) + 1e-12);
      EXPECT_GE(dw, du / lam * (1 - 1e-12) - 1e-12);
    }
    EXPECT_LT(worst, 1e-12) << b.name();
  }
}

TEST(Beta, RescaledMapMatchesDefinition) {
  for (const Beta& b : {Beta::piecewise_linear({-0.3, 0.5}, {2.0, 0.5, 1.5}), Beta::tanh_perturbed(0.8, 2.0)}) {
    const Beta r = b.rescaled(3.0);
    for (double x = -1.0; x <= 1.0; x += 0.05) EXPECT_NEAR(r(x), b(3.0 * x) / 3.0, 1e-13);
    EXPECT_EQ(r.lipschitz(), b.lipschitz());
  }
}

TEST(RegularizedGraph, RescaledEnthalpyIsScaledEnthalpy) {
  const RegularizedGraph g(0.2, 1.0, 0.05, Beta::tanh_perturbed(0.5, 2.0));
  const RegularizedGraph r = g.rescaled(4.0);
  EXPECT_DOUBLE_EQ(r.latent_heat(), 0.25);
  for (double u = -1.0; u <= 1.0; u += 0.01) EXPECT_NEAR(r.enthalpy(u / 4.0), g.enthalpy(u) / 4.0, 1e-12);
}
