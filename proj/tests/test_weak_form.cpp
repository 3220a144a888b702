#include <gtest/gtest.h>

#include "stefanlab/geometry.hpp"
#include "stefanlab/weak_form.hpp"

using namespace stefanlab;

namespace {

Scenario smooth_two_phase(int n, double dt, double p = 2.0) {
  Scenario s;
  s.grid = Grid::line(n, 1.0);
  s.p = p;
  s.graph = RegularizedGraph(0.0, 1.0, 0.25);
  s.initial = {"cosine", {{"offset", 0.05}, {"amplitude", 0.6}, {"waves", 1}}, {}};
  s.t_end = 0.1;
  s.stepping = TimeStepping::fixed(dt);
  return s;
}

} // namespace

TEST(WeakForm, ZeroTestFunction) {
  const Trajectory t = run_simulation(smooth_two_phase(32, 0.01));
  EXPECT_EQ(weak_form_residual(t, TestFunction::zero(), {0.0, 0.1}, Region::whole(t.grid())), 0.0);
}

TEST(WeakForm, ConstantTestFunctionIsConservationDefect) {
  for (double p : {2.0, 3.0}) {
    const Trajectory t = run_simulation(smooth_two_phase(48, 0.005, p));
    const double r = weak_form_residual(t, TestFunction::constant(1.0), {0.0, 0.1}, Region::whole(t.grid()));
    EXPECT_LE(std::abs(r), 1e-10);
  }
}

TEST(WeakForm, BumpResidualIsFirstOrder) {
  const TestFunction phi = TestFunction::bump({0.45, 0.0}, 0.3, 1.0, 0.05, 4.0);
  const Region region = Region::box({0.45, 0.0}, 0.35);
  std::vector<double> res;
  for (int level = 0; level < 3; ++level) {
    const int n = 40 << level;
    const Trajectory t = run_simulation(smooth_two_phase(n, 0.01 / (1 << level)));
    res.push_back(std::abs(weak_form_residual(t, phi, {0.02, 0.1}, region)));
  }
  EXPECT_GT(res[0], 0.0);
  for (std::size_t k = 1; k < res.size(); ++k) EXPECT_LE(res[k] / res[k - 1], 0.5 * 1.2) << res[k - 1] << " " << res[k];
}

TEST(WeakForm, RescaledTrajectorySatisfiesRescaledEquation) {
  const Trajectory t = run_simulation(smooth_two_phase(80, 0.0025, 3.0));
  const TestFunction phi = TestFunction::bump({0.5, 0.0}, 0.3, 1.0, 0.05, 2.0);
  const double base = weak_form_residual(t, phi, {0.02, 0.1}, Region::box({0.5, 0.0}, 0.3));
  const double lambda = 2.0;
  const Trajectory r = rescale_solution(t, lambda, {0.1, 0.0}, 0.02);
  const double tf = std::pow(lambda, 1.0);
  TestFunction moved = phi;
  moved.center = {0.4, 0.0};
  moved.time_center = (0.05 - 0.02) * tf;
  moved.time_slope = 2.0 / tf;
  const double scaled = weak_form_residual(r, moved, {0.0, 0.08 * tf}, Region::box({0.4, 0.0}, 0.3));
  // Every term picks up the factor lambda^{-1}.
  EXPECT_NEAR(scaled, base / lambda, 1e-12 + 1e-9 * std::abs(base));
}

TEST(WeakForm, RejectsOutOfBounds) {
  const Trajectory t = run_simulation(smooth_two_phase(32, 0.01));
  const TestFunction phi = TestFunction::bump({0.5, 0.0}, 0.2);
  EXPECT_THROW(weak_form_residual(t, phi, {0.0, 0.5}, Region::box({0.5, 0.0}, 0.2)), InvalidArgument);
  EXPECT_THROW(weak_form_residual(t, phi, {0.0, 0.1}, Region{{-0.5, 0.0}, {0.5, 0.0}}), InvalidArgument);
  EXPECT_THROW(weak_form_residual(t, phi, {0.0, 0.1}, Region::box({0.5, 0.0}, 0.1)), InvalidArgument);
  EXPECT_THROW(weak_form_residual(t, TestFunction::constant(1.0), {0.0, 0.1}, Region::box({0.5, 0.0}, 0.3)),
               InvalidArgument);
}
