#include <gtest/gtest.h>

#include "stefanlab/verify.hpp"

using namespace stefanlab;

namespace {

Scenario two_phase(int n, double p, double eps = 0.1, double lh = 1.0) {
  Scenario s;
  s.grid = Grid::line(n, 1.0);
  s.p = p;
  s.graph = RegularizedGraph(0.0, lh, eps);
  s.initial = {"cosine", {{"offset", 0.1}, {"amplitude", 0.8}, {"waves", 2}}, {}};
  s.t_end = 0.05;
  s.stepping = TimeStepping::fixed(0.05 / 64);
  return s;
}

Scenario constant_scenario(double value) {
  Scenario s;
  s.grid = Grid::line(32, 1.0);
  s.initial = {"constant", {{"value", value}}, {}};
  s.t_end = 0.05;
  s.stepping = TimeStepping::fixed(0.01);
  return s;
}

ConstantsLedger ledger_for(int n, double p) {
  return fix_constants(StructuralContext::from(n, p, 1.0, 0.45), 2.0, 2.0, 2.0, std::nullopt, 0.1, 0.1, 0.25, 0.5);
}

const EnergyCylinder kCyl{{0.5, 0.0}, 0.3, 0.01, 0.05};

} // namespace

TEST(Caccioppoli, ConstantSolutionIsDegenerate) {
  const Trajectory t = run_simulation(constant_scenario(0.3));
  const auto rep = caccioppoli_check(t, 0.3, {}, kCyl);
  EXPECT_EQ(rep.lhs, 0.0);
  EXPECT_EQ(rep.rhs, 0.0);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_TRUE(rep.pass);
}

TEST(Caccioppoli, LevelAboveMaximumGivesZeroBothSides) {
  const Trajectory t = run_simulation(two_phase(64, 2.0));
  const auto rep = caccioppoli_check(t, 1.0, {}, kCyl);
  EXPECT_EQ(rep.lhs, 0.0);
  EXPECT_EQ(rep.rhs, 0.0);
  EXPECT_TRUE(rep.pass);
}

TEST(Caccioppoli, RejectsBadCutoffAndCylinder) {
  const Trajectory t = run_simulation(two_phase(32, 2.0));
  EXPECT_THROW(caccioppoli_check(t, 0.0, {1.0, 0.5}, kCyl), InvalidArgument);
  EXPECT_THROW(caccioppoli_check(t, 0.0, {0.5, 0.0}, kCyl), InvalidArgument);
  EXPECT_THROW(caccioppoli_check(t, 0.0, {}, EnergyCylinder{{0.5, 0.0}, 0.7, 0.0, 0.05}), InvalidArgument);
  EXPECT_THROW(caccioppoli_check(t, 0.0, {}, EnergyCylinder{{0.5, 0.0}, 0.3, 0.0, 0.5}), InvalidArgument);
}

TEST(Caccioppoli, ImpliedConstantFiniteAndStableUnderRefinement) {
  for (double p : {2.0, 3.0})
    for (double k : {-0.5, -0.2, 0.0}) {
      const auto a = caccioppoli_check(run_simulation(two_phase(64, p)), k, {}, kCyl);
      const auto b = caccioppoli_check(run_simulation(two_phase(128, p)), k, {}, kCyl);
      EXPECT_GT(a.rhs, 0.0);
      EXPECT_TRUE(std::isfinite(a.implied_constant));
      EXPECT_TRUE(stable_within(a.implied_constant, b.implied_constant))
          << p << " " << k << " " << a.implied_constant << " " << b.implied_constant;
    }
}

TEST(Caccioppoli, ScaleCovariant) {
  const Trajectory t = run_simulation(two_phase(64, 3.0));
  const auto base = caccioppoli_check(t, 0.1, {}, kCyl);
  const double lambda = 2.5, tf = std::pow(lambda, 1.0);
  const Trajectory r = rescale_solution(t, lambda, {0.2, 0.0});
  const EnergyCylinder moved{{0.3, 0.0}, kCyl.R, kCyl.t_lo * tf, kCyl.t_hi * tf};
  const auto scaled = caccioppoli_check(r, 0.1 / lambda, {}, moved);
  EXPECT_NEAR(scaled.implied_constant, base.implied_constant, 1e-8 * base.implied_constant);
}

TEST(Caccioppoli, JumpFreeMatchesHeatHarness) {
  Scenario s = two_phase(64, 2.0);
  s.graph = RegularizedGraph(5.0, 1.0, 0.1);
  Scenario heat = s;
  heat.graph = RegularizedGraph(5.0, 0.0, 0.1);
  const auto a = caccioppoli_check(run_simulation(s), 0.0, {}, kCyl);
  const auto b = caccioppoli_check(run_simulation(heat), 0.0, {}, kCyl);
  EXPECT_EQ(a.implied_constant, b.implied_constant);
  EXPECT_GT(a.implied_constant, 0.0);
}

TEST(Truncation, ConstantTruncationHasZeroPairing) {
  Scenario s = two_phase(64, 2.0);
  s.graph = RegularizedGraph(2.0, 1.0, 0.1);
  const Trajectory t = run_simulation(s);
  const auto rep = truncation_supersolution_check(t, s.graph, -1.0, 2.0, 0.1, {{0.5, 0.0}, 0.4, 0.0, 0.05});
  EXPECT_EQ(rep.lhs, 0.0);
  EXPECT_TRUE(rep.pass);
}

TEST(Truncation, HalfActiveLevelPasses) {
  for (double p : {2.0, 3.0}) {
    Scenario s = two_phase(96, p);
    s.graph = RegularizedGraph(0.5, 1.0, 0.1);
    const Trajectory t = run_simulation(s);
    const auto rep = truncation_supersolution_check(t, s.graph, 0.1, 0.5, 0.1, {{0.5, 0.0}, 0.45, 0.0, 0.05});
    EXPECT_TRUE(rep.pass) << rep.lhs << " " << rep.rhs;
    EXPECT_GE(rep.implied_constant, -1e-8);
    EXPECT_GT(rep.terms.at("test_functions"), 10.0);
  }
}

TEST(Truncation, RejectsHypothesisViolation) {
  const Trajectory t = run_simulation(two_phase(32, 2.0));
  EXPECT_THROW(truncation_supersolution_check(t, t.scenario.graph, 0.0, 0.05, 0.1, {{0.5, 0.0}, 0.3, 0.0, 0.05}),
               InvalidArgument);
}

TEST(WeakHarnack, ConstantOneHoldsWithC2BelowOne) {
  Scenario s = constant_scenario(1.0);
  s.p = 3.0;
  s.grid = Grid::line(64, 1.0);
  s.stepping = TimeStepping::fixed(5e-4);
  const Trajectory t = run_simulation(s);
  const auto led = ledger_for(1, 3.0);
  const auto rep = weak_harnack_check(t, 2.0, {0.5, 0.0}, 0.1, 0.0, 0.05, led);
  EXPECT_EQ(rep.terms.at("average"), 1.0);
  EXPECT_EQ(rep.terms.at("infimum"), 1.0);
  EXPECT_LE(rep.implied_constant, 1.0);
  EXPECT_TRUE(rep.pass);
}

TEST(WeakHarnack, ZeroIsDegenerate) {
  Scenario s = constant_scenario(0.0);
  s.p = 3.0;
  s.grid = Grid::line(64, 1.0);
  const auto rep = weak_harnack_check(run_simulation(s), 1.0, {0.5, 0.0}, 0.1, 0.0, 0.05, ledger_for(1, 3.0));
  EXPECT_TRUE(rep.degenerate);
  EXPECT_TRUE(rep.pass);
}

TEST(WeakHarnack, Preconditions) {
  const auto led = ledger_for(1, 3.0);
  const Trajectory t2 = run_simulation(two_phase(64, 2.0));
  EXPECT_THROW(weak_harnack_check(t2, 1.0, {0.5, 0.0}, 0.1, 0.0, 0.05, led), InvalidArgument);
  const Trajectory t3 = run_simulation(two_phase(64, 3.0));
  EXPECT_THROW(weak_harnack_check(t3, 1.0, {0.5, 0.0}, 0.1, 0.0, 0.5, led), InvalidArgument);
  EXPECT_THROW(weak_harnack_check(t3, 1.0, {0.5, 0.0}, 0.2, 0.0, 0.05, led), InvalidArgument);
}

TEST(WeakHarnack, BumpDataStableUnderRefinement) {
  std::vector<double> c;
  for (int n : {80, 160}) {
    Scenario s;
    s.grid = Grid::line(n, 1.0);
    s.p = 3.0;
    s.graph = RegularizedGraph(5.0, 1.0, 0.1);
    s.initial = {"bump", {{"center", 0.5}, {"width", 0.3}, {"base", 0.05}, {"amplitude", 1.0}}, {}};
    s.t_end = 0.2;
    s.stepping = TimeStepping::fixed(0.2 / 200);
    const auto rep = weak_harnack_check(run_simulation(s), 10.0, {0.5, 0.0}, 0.1, 0.0, 0.2, ledger_for(1, 3.0));
    EXPECT_TRUE(rep.pass);
    c.push_back(rep.implied_constant);
  }
  EXPECT_GT(c[0], 0.0);
  EXPECT_TRUE(stable_within(c[0], c[1])) << c[0] << " " << c[1];
}

TEST(DecayOfPositivity, SteadyStateNeedsNoDecay) {
  const Trajectory t = run_simulation(constant_scenario(0.7));
  const auto rep = decay_of_positivity_check(t, 0.5, {0.5, 0.0}, 0.1, 0.0, 0.05, ledger_for(1, 2.0));
  EXPECT_EQ(rep.implied_constant, 1.0);
  EXPECT_TRUE(rep.pass);
}

TEST(DecayOfPositivity, CollapsingBumpFiniteAndStable) {
  std::vector<double> c;
  for (int n : {80, 160}) {
    Scenario s;
    s.grid = Grid::line(n, 1.0);
    s.p = 3.0;
    s.graph = RegularizedGraph(5.0, 1.0, 0.1);
    s.initial = {"bump", {{"center", 0.5}, {"width", 0.45}, {"base", 0.0}, {"amplitude", 1.0}}, {}};
    s.t_end = 0.5;
    s.stepping = TimeStepping::fixed(0.5 / 250);
    const Trajectory t = run_simulation(s);
    const auto rep = decay_of_positivity_check(t, 0.4, {0.5, 0.0}, 0.1, 0.0, 0.5, ledger_for(1, 3.0));
    EXPECT_TRUE(rep.pass);
    c.push_back(rep.implied_constant);
  }
  EXPECT_TRUE(stable_within(c[0], c[1])) << c[0] << " " << c[1];
}

TEST(DecayOfPositivity, RejectsFailedHypothesis) {
  const Trajectory t = run_simulation(constant_scenario(0.3));
  EXPECT_THROW(decay_of_positivity_check(t, 0.5, {0.5, 0.0}, 0.1, 0.0, 0.05, ledger_for(1, 2.0)), InvalidArgument);
}

TEST(Alternatives, TrivialAndExtremeFields) {
  Scenario s = constant_scenario(0.0);
  s.graph = RegularizedGraph(0.75, 1.0, 0.1);
  s.t_end = 0.0;
  Trajectory t = run_simulation(s);
  for (int m = 1; m <= 4; ++m) {
    t.times.push_back(0.01 * m);
    t.u.push_back(t.u[0]);
    t.e.push_back(t.e[0]);
  }
  const IntrinsicCylinder cyl{{0.5, 0.0}, 0.04, 0.4, 0.04, CylinderFlavor::full};
  EXPECT_EQ(alternative_classifier(t, cyl, 0.02, 0.5, 0.1, 3.0).kind, Alternative::trivial);
  // A ring of ones outside B_{r/4}: v = 0 on the lower cylinder, osc = 1.
  for (std::size_t m = 0; m < t.levels(); ++m)
    for (std::size_t i = 0; i < t.u[m].size(); ++i)
      t.u[m][i] = std::abs(t.grid().position(i)[0] - 0.5) > 0.3 ? 1.0 : 0.0;
  auto rep = alternative_classifier(t, cyl, 0.02, 0.5, 0.1, 3.0);
  EXPECT_EQ(rep.kind, Alternative::second);
  EXPECT_EQ(rep.fraction, 0.0);
  for (std::size_t m = 0; m < t.levels(); ++m)
    for (std::size_t i = 0; i < t.u[m].size(); ++i)
      t.u[m][i] = std::abs(t.grid().position(i)[0] - 0.5) > 0.3 ? 0.0 : 1.0;
  rep = alternative_classifier(t, cyl, 0.02, 0.5, 0.1, 3.0);
  EXPECT_EQ(rep.kind, Alternative::first);
  EXPECT_EQ(rep.fraction, 1.0);
  EXPECT_TRUE(rep.time_slice);
}

TEST(Alternatives, RecountAtDoubleResolutionAgrees) {
  std::vector<double> f;
  for (int n : {200, 400}) {
    Scenario s = two_phase(n, 2.0);
    s.stepping = TimeStepping::fixed(0.05 / 100);
    const Trajectory t = run_simulation(s);
    const IntrinsicCylinder cyl{{0.5, 0.0}, 0.05, 0.4, 0.04, CylinderFlavor::full};
    const auto rep = alternative_classifier(t, cyl, 0.02, 0.2, 0.1, 3.0);
    EXPECT_NE(rep.kind, Alternative::trivial);
    f.push_back(rep.fraction);
  }
  EXPECT_NEAR(f[0], f[1], 0.1);
}

TEST(ModulusAcceptance, ConstantDataPasses) {
  const auto led = ledger_for(1, 2.0);
  const ModulusParams mp = led.modulus(0.25);
  Scenario s = constant_scenario(0.4);
  s.grid = Grid::line(64, 1.0);
  s.t_end = time_depth(mp, 0.25, CylinderFlavor::outer);
  s.sample_times = ladder_sample_times(mp, 1.0, s.t_end, acceptance_ladder(mp, 1.0, s.grid.h));
  s.stepping = TimeStepping::fixed(s.t_end / 8);
  const auto rep = modulus_acceptance(run_simulation(s), mp, led, {0.5, 0.0});
  EXPECT_EQ(rep.c_star, 0.0);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.ladder, "dyadic");
  EXPECT_FALSE(rep.fit.has_value());
}

TEST(ModulusAcceptance, TwoPhaseStableAndMonotone) {
  const auto led = ledger_for(1, 2.0);
  const ModulusParams mp = led.modulus(0.25);
  std::vector<double> cs;
  for (int n : {64, 128}) {
    Scenario s = two_phase(n, 2.0, 0.05);
    s.initial = {"cosine", {{"offset", 0.0}, {"amplitude", 1.0}, {"waves", 3}}, {}};
    const double lambda = data_normalization(s);
    s.t_end = 1.5 * time_depth(mp, mp.r0, CylinderFlavor::outer, lambda);
    s.sample_times = ladder_sample_times(mp, lambda, s.t_end, acceptance_ladder(mp, 1.0, s.grid.h));
    s.stepping = TimeStepping::fixed(s.t_end / 100);
    const auto rep = modulus_acceptance(run_simulation(s), mp, led, {0.5, 0.0});
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.oscillation_monotone);
    EXPECT_GT(rep.c_star, 0.0);
    cs.push_back(rep.c_star);
  }
  EXPECT_TRUE(stable_within(cs[0], cs[1])) << cs[0] << " " << cs[1];
}

TEST(ModulusAcceptance, RejectsCylinderOutsideDomain) {
  const auto led = ledger_for(1, 2.0);
  const Trajectory t = run_simulation(constant_scenario(0.1));
  EXPECT_THROW(modulus_acceptance(t, led.modulus(0.25), led, {0.1, 0.0}), InvalidArgument);
  EXPECT_THROW(modulus_acceptance(t, led.modulus(0.25), led, {0.5, 0.0}), InvalidArgument);
}

TEST(EpsilonStudy, SingleLevelIsDegenerate) {
  const auto led = ledger_for(1, 2.0);
  const ModulusParams mp = led.modulus(0.25);
  Scenario s = two_phase(64, 2.0, 0.1);
  s.t_end = time_depth(mp, mp.r0, CylinderFlavor::outer);
  s.stepping = TimeStepping::fixed(s.t_end / 50);
  const IntrinsicCylinder interior{{0.5, 0.0}, s.t_end, 0.2, s.t_end, CylinderFlavor::full};
  const auto st = epsilon_convergence_study({run_simulation(s)}, mp, led, {0.5, 0.0}, 0.125, interior);
  EXPECT_TRUE(st.degenerate);
  EXPECT_TRUE(st.gaps.empty());
}

TEST(EpsilonStudy, JumpFreeIsEpsilonIndependent) {
  const auto led = ledger_for(1, 2.0);
  const ModulusParams mp = led.modulus(0.25);
  std::vector<Trajectory> fam;
  for (double e : {0.2, 0.1, 0.05}) {
    Scenario s = two_phase(64, 2.0, e);
    s.graph = RegularizedGraph(5.0, 1.0, e);
    s.t_end = time_depth(mp, mp.r0, CylinderFlavor::outer);
    s.stepping = TimeStepping::fixed(s.t_end / 50);
    fam.push_back(run_simulation(s));
  }
  const IntrinsicCylinder interior{{0.5, 0.0}, fam[0].times.back(), 0.2, fam[0].times.back(), CylinderFlavor::full};
  const auto st = epsilon_convergence_study(fam, mp, led, {0.5, 0.0}, 0.125, interior);
  for (double g : st.gaps) EXPECT_LT(g, 1e-8);
  EXPECT_TRUE(st.gaps_decreasing);
}

TEST(EpsilonStudy, RejectsUnresolvedOrIncreasingLadder) {
  const auto led = ledger_for(1, 2.0);
  const ModulusParams mp = led.modulus(0.25);
  const IntrinsicCylinder interior{{0.5, 0.0}, 0.05, 0.2, 0.05, CylinderFlavor::full};
  const Trajectory a = run_simulation(two_phase(32, 2.0, 0.05));
  EXPECT_THROW(epsilon_convergence_study({a}, mp, led, {0.5, 0.0}, 0.125, interior), InvalidArgument);
  const Trajectory b = run_simulation(two_phase(32, 2.0, 0.1));
  const Trajectory c = run_simulation(two_phase(32, 2.0, 0.2));
  EXPECT_THROW(epsilon_convergence_study({b, c}, mp, led, {0.5, 0.0}, 0.125, interior), InvalidArgument);
}
