#include "toiv/exp/gradcheck.hpp"
#include "toiv/opt/optimizer.hpp"
#include "toiv/sim/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace toiv;

namespace {

StateD with_p2(Vec2d p2) { return {{5, 5}, p2, {0, 0}, {0, 0}}; }

ScenarioConfig far_apart() {
  ScenarioConfig sc;
  sc.initial = {{-3.0, -3.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  sc.steps = 480;
  sc.initial_controls.assign(480, Vec2d{0, 0});
  return sc;
}

} // namespace

TEST(TerminalCost, Examples) {
  EXPECT_EQ(terminal_cost(with_p2({0, 0})), 0.0);
  EXPECT_EQ(terminal_cost(with_p2({1, 0})), 1.0);
  EXPECT_NEAR(terminal_cost(with_p2({-0.3, 0.4})), 0.25, 1e-16);
}

TEST(TerminalCost, Target) {
  EXPECT_NEAR(terminal_cost(with_p2({1, 2}), Vec2d{1, 1}), 1.0, 1e-16);
}

TEST(RunningCost, Examples) {
  EXPECT_EQ(running_cost(Vec2d{0, 0}, 0.01), 0.0);
  EXPECT_NEAR(running_cost(Vec2d{0, 3}, 0.01), 0.09, 1e-16);
}

TEST(Objective, ConstantControlRunningTotal) {
  // Ball 2 stays at the origin, Ball 1 moves away from it
  ScenarioConfig sc;
  sc.initial = {{0.0, -1.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  const ControlSequence u(480, Vec2d{0, -3});
  EXPECT_NEAR(objective(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), u), 0.09, 1e-12);
}

TEST(Objective, ZeroAtRestOnTarget) {
  const auto sc = far_apart();
  EXPECT_EQ(objective(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), sc.initial_controls), 0.0);
}

TEST(Objective, TapeAndPlainPathsAgree) {
  for (const auto& sc : {scenarios::single_collision(), scenarios::multi_collision()}) {
    for (bool pos : {false, true}) {
      for (bool vel : {false, true}) {
        const auto c = ContactConfig::direct(pos, vel);
        const auto obj = ObjectiveConfig::from(sc);
        const double plain = objective(sc, c, obj, sc.initial_controls);
        const double taped = objective_gradient(sc, c, obj, sc.initial_controls).value;
        EXPECT_LE(std::abs(plain - taped) / std::abs(plain), 1e-12) << sc.name;
      }
    }
  }
}

TEST(Gradient, NoPathGivesExactZero) {
  auto sc = far_apart();
  sc.epsilon = 0.0;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1.0, 0.0);
  ControlSequence u(480);
  for (auto& e : u) e = {d(rng), d(rng)}; // pushes Ball 1 further away
  const auto vg = objective_gradient(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), u);
  for (const auto& g : vg.gradient) {
    EXPECT_EQ(g.x, 0.0);
    EXPECT_EQ(g.y, 0.0);
  }
}

TEST(Gradient, RunningCostOnlyIsAnalytic) {
  const auto sc = far_apart();
  const ControlSequence u(480, Vec2d{-0.5, -0.25});
  const auto vg = objective_gradient(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), u);
  const double dt = sc.dt();
  for (const auto& g : vg.gradient) {
    EXPECT_NEAR(g.x, 2 * 0.01 * -0.5 * dt, 1e-18);
    EXPECT_NEAR(g.y, 2 * 0.01 * -0.25 * dt, 1e-18);
  }
}

TEST(Gradient, NoContactMatchesFiniteDifferences) {
  auto sc = far_apart();
  sc.initial.p1 = {0.0, -1.0};
  sc.initial.p2 = {-0.5, 0.5};
  sc.initial.v2 = {0.3, 0.1};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-2.0, 0.0);
  ControlSequence u(480);
  for (auto& e : u) e = {d(rng), d(rng)};
  // Ball 2 coasts untouched, so give the terminal cost a path through Ball 1
  const auto rep = gradient_check(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), u, 5, 4);
  EXPECT_EQ(rep.flipped, 0);
  EXPECT_EQ(rep.checked, 5);
  EXPECT_LT(rep.max_rel_error, 1e-6);
}

TEST(Gradient, SingleContactMatchesFiniteDifferences) {
  const auto sc = scenarios::single_collision();
  const auto rep =
      gradient_check(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), sc.initial_controls, 20, 1);
  EXPECT_GT(rep.checked, 15);
  EXPECT_LT(rep.max_rel_error, 1e-4);
}

TEST(Gradient, MultiContactMatchesFiniteDifferences) {
  const auto sc = scenarios::multi_collision();
  const auto rep =
      gradient_check(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), sc.initial_controls, 20, 2);
  EXPECT_GT(rep.checked, 15);
  EXPECT_LT(rep.max_rel_error, 1e-4);
}

TEST(RelativeError, Floor) {
  EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_NEAR(relative_error(1.0, 1.1), 0.1 / 1.1, 1e-15);
}

TEST(Optimizer, ReducesLossAndKeepsBest) {
  const auto sc = scenarios::single_collision();
  OptimizerConfig cfg;
  cfg.iterations = 100;
  const auto res = optimize(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), cfg, sc.initial_controls);
  ASSERT_EQ(res.curve.records.size(), 100u);
  EXPECT_LT(res.best_loss, res.curve.records.front().loss);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : res.curve.records) best = std::min(best, r.loss);
  EXPECT_EQ(res.best_loss, best);
  EXPECT_EQ(res.curve.records[static_cast<std::size_t>(res.best_iteration)].loss, res.best_loss);
  EXPECT_NEAR(objective(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), res.best_controls),
              res.best_loss, 1e-12);
  EXPECT_EQ(res.curve.snapshots.size(), 2u); // iterations 0 and 50
}

TEST(Optimizer, Deterministic) {
  const auto sc = scenarios::multi_collision();
  OptimizerConfig cfg;
  cfg.iterations = 30;
  const auto c = ContactConfig::direct(true, true);
  const auto a = optimize(sc, c, ObjectiveConfig::from(sc), cfg, sc.initial_controls);
  const auto b = optimize(sc, c, ObjectiveConfig::from(sc), cfg, sc.initial_controls);
  ASSERT_EQ(a.curve.records.size(), b.curve.records.size());
  for (std::size_t i = 0; i < a.curve.records.size(); ++i) {
    EXPECT_EQ(a.curve.records[i].loss, b.curve.records[i].loss);
  }
  for (std::size_t i = 0; i < a.best_controls.size(); ++i) {
    EXPECT_EQ(a.best_controls[i].x, b.best_controls[i].x);
    EXPECT_EQ(a.best_controls[i].y, b.best_controls[i].y);
  }
}

TEST(Optimizer, MomentumVariantRuns) {
  const auto sc = scenarios::single_collision();
  OptimizerConfig cfg;
  cfg.method = OptimizerMethod::Momentum;
  cfg.learning_rate = 3.0;
  cfg.iterations = 50;
  const auto res = optimize(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), cfg, sc.initial_controls);
  EXPECT_LT(res.best_loss, res.curve.records.front().loss);
}

TEST(Optimizer, GradStopEndsEarly) {
  const auto sc = far_apart();
  OptimizerConfig cfg;
  cfg.grad_stop = 1.0;
  const auto res = optimize(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), cfg, sc.initial_controls);
  EXPECT_EQ(res.curve.records.size(), 1u);
}

// From the learned optimum the loss keeps drifting down. Contact-step shifts
// leave kinks that make individual steps jitter upward, but only by O(lr).
TEST(Optimizer, MonotoneNearOptimumUpToStepNoise) {
  const auto sc = scenarios::single_collision();
  const auto c = ContactConfig::direct(true, true);
  const auto obj = ObjectiveConfig::from(sc);
  const auto learned = optimize(sc, c, obj, OptimizerConfig{}, sc.initial_controls);
  for (double lr : {1.0, 0.1}) {
    OptimizerConfig small;
    small.learning_rate = lr;
    small.iterations = 200;
    const auto res = optimize(sc, c, obj, small, learned.best_controls);
    double worst_rise = 0.0;
    for (std::size_t i = 1; i < res.curve.records.size(); ++i) {
      worst_rise = std::max(worst_rise, res.curve.records[i].loss - res.curve.records[i - 1].loss);
    }
    EXPECT_LT(res.curve.records.back().loss, res.curve.records.front().loss) << "lr " << lr;
    EXPECT_LT(worst_rise, 2e-5 * lr) << "lr " << lr;
  }
}

TEST(Optimizer, NonFiniteAbortsWithIteration) {
  const auto sc = scenarios::single_collision();
  ControlSequence u = sc.initial_controls;
  u[10].x = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)optimize(sc, ContactConfig::direct(true, true), ObjectiveConfig::from(sc), OptimizerConfig{}, u);
    FAIL() << "expected a non-finite abort";
  } catch (const NonFiniteError& e) {
    EXPECT_EQ(e.iteration(), 0);
  }
}

TEST(Optimizer, RejectsBadConfig) {
  const auto sc = scenarios::single_collision();
  const auto c = ContactConfig::direct(true, true);
  const auto obj = ObjectiveConfig::from(sc);
  OptimizerConfig bad;
  bad.learning_rate = -1.0;
  EXPECT_THROW(optimize(sc, c, obj, bad, sc.initial_controls), ConfigError);
  bad = {};
  bad.iterations = 0;
  EXPECT_THROW(optimize(sc, c, obj, bad, sc.initial_controls), ConfigError);
  EXPECT_THROW(optimize(sc, c, obj, OptimizerConfig{}, ControlSequence(3)), ConfigError);
}
