#include <cmath>

#include <gtest/gtest.h>

#include "cutfsi/timestepper.hpp"

using namespace cutfsi;

namespace {

SimulationConfig small(double T = 2.0) {
  SimulationConfig c;
  c.cells_per_side = 8;
  c.final_time = T;
  return c;
}

}  // namespace

TEST(Inflow, RampAndProfile) {
  EXPECT_EQ(inflow(0.0, {0.0, 1.0}).x, 0.0);
  EXPECT_EQ(inflow(0.0, {0.5, 1.0}).x, 0.0);
  EXPECT_NEAR(inflow(2.0, {0.0, 1.0}).x, 0.2, 1e-15);
  EXPECT_NEAR(inflow(1.0, {0.0, 1.0}).x, 0.1, 1e-15);
  EXPECT_EQ(inflow(1.0, {0.0, 1.0}).y, 0.0);
  EXPECT_NEAR(inflow(5.0, {1.0, 1.0}).x, 0.0, 1e-15);
  EXPECT_NEAR(inflow(5.0, {-1.0, 1.0}).x, 0.0, 1e-15);
  EXPECT_EQ(inflow(5.0, {0.0, -1.0}).x, 0.0);
  EXPECT_EQ(inflow(5.0, {1.0, 0.3}).x, 0.0);
  // Continuous at the flank/plateau junctions.
  EXPECT_NEAR(inflow(5.0, {0.7 - 1e-9, 1.0}).x, inflow(5.0, {0.7 + 1e-9, 1.0}).x, 1e-9);
}

TEST(Initialize, AllZero) {
  const Discretization d(small());
  const State s = initialize(d);
  EXPECT_EQ(s.n, 0);
  EXPECT_EQ(s.t, 0.0);
  EXPECT_EQ(static_cast<int>(s.U.size()), d.layout().total);
  for (double v : s.U) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(constraint_residual(d, s.U, s.U, 1.0), 0.0);
}

TEST(Step, ZeroDataIsFixedPoint) {
  const Discretization d(small(4.0));
  RunOptions o;
  o.boundary = zero_boundary;
  const RunResult r = run(d, o);
  for (double v : r.final_state.U) EXPECT_EQ(v, 0.0);
}

TEST(Step, FirstLidStep) {
  const Discretization d(small());
  const TimeStepper stepper(d, 1.0);
  StepRecord rec;
  const State s1 = stepper.step(initialize(d), &rec);
  EXPECT_EQ(s1.n, 1);
  EXPECT_EQ(s1.t, 1.0);
  EXPECT_LE(rec.solve_residual, 1e-10);
  EXPECT_LE(rec.constraint_residual, 1e-9);
  const DofMap& df = d.dofs(FieldRole::FluidVelocity);
  const auto g = interpolate_boundary(df, inflow, 1.0);
  const int off = d.layout().begin(FieldRole::FluidVelocity);
  for (const auto& [dof, v] : g) EXPECT_EQ(s1.U[off + dof], v);
  // Interior velocity just below the lid is driven in +x.
  double near_lid = 0.0;
  for (int s = 0; s < df.num_scalar(); ++s) {
    const Vec2 x = df.node_point(s);
    if (std::abs(x.y - 0.875) < 1e-12 && std::abs(x.x) < 0.5) near_lid = std::max(near_lid, s1.U[off + df.index(0, s)]);
  }
  EXPECT_GT(near_lid, 1e-4);
}

TEST(Run, StepCountAndRejection) {
  SimulationConfig c = small(8.0);
  const Discretization d(c);
  EXPECT_EQ(run(d).log.size(), 8u);
  c.time_step = 0.3;
  const Discretization bad(c);
  EXPECT_THROW(run(bad), ConfigError);
}

TEST(Run, ObservationIsPassiveAndDeterministic) {
  const Discretization d(small(3.0));
  RunOptions hist;
  hist.keep_history = true;
  const RunResult a = run(d);
  int calls = 0;
  const RunResult b = run(d, hist, [&](const State&, const StepRecord&) { ++calls; });
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(a.final_state.U, b.final_state.U);
  EXPECT_EQ(b.history.size(), 4u);
  const Discretization d2(small(3.0));
  EXPECT_EQ(run(d2).final_state.U, a.final_state.U);
}

TEST(Run, ConstraintIdentityEveryStep) {
  SimulationConfig c = small(4.0);
  c.solid_order = 1;
  c.time_step = 0.5;
  const Discretization d(c);
  for (const StepRecord& r : run(d).log) {
    EXPECT_LE(r.constraint_residual, 1e-9);
    EXPECT_LE(r.solve_residual, 1e-10);
  }
}

TEST(Run, LoadDrivesSolid) {
  const Discretization d(small(1.0));
  TimeStepper stepper(d, 1.0, zero_boundary);
  stepper.set_load({}, [](double, Vec2) { return Vec2{1.0, 0.0}; });
  const State s = stepper.step(initialize(d));
  double vs = 0.0;
  for (double v : d.block(std::span<const double>(s.U), FieldRole::SolidVelocity)) vs = std::max(vs, v);
  EXPECT_GT(vs, 0.1);
}
