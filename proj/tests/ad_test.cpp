#include "toiv/ad/tape.hpp"
#include "toiv/sim/step.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using toiv::ad::Op;
using toiv::ad::Tape;
using toiv::ad::Var;

TEST(Lift, PassesValueThrough) {
  Tape t;
  EXPECT_EQ(t.lift(3.0).value(), 3.0);
  EXPECT_EQ(t.lift(-2.5).value(), -2.5);
  EXPECT_EQ(t.input_count(), 2u);
}

TEST(Lift, SelfAdjointIsOne) {
  Tape t;
  Var x = t.lift(0.0);
  EXPECT_EQ(t.backward(x)[0], 1.0);
}

TEST(Arith, ProductRule) {
  Tape t;
  Var a = t.lift(2.0);
  Var b = t.lift(3.0);
  Var f = a * b;
  EXPECT_EQ(f.value(), 6.0);
  auto g = t.backward(f);
  EXPECT_EQ(g[0], 3.0);
  EXPECT_EQ(g[1], 2.0);
}

TEST(Arith, SqrtAdjoint) {
  Tape t;
  Var x = t.lift(4.0);
  Var f = toiv::ad::sqrt(x);
  EXPECT_EQ(f.value(), 2.0);
  EXPECT_EQ(t.backward(f)[0], 0.25);
}

TEST(Arith, QuotientRule) {
  Tape t;
  Var a = t.lift(1.0);
  Var b = t.lift(4.0);
  Var f = a / b;
  EXPECT_EQ(f.value(), 0.25);
  auto g = t.backward(f);
  EXPECT_EQ(g[0], 0.25);
  EXPECT_EQ(g[1], -1.0 / 16.0);
}

TEST(Arith, NegSubSquare) {
  Tape t;
  Var a = t.lift(3.0);
  Var b = t.lift(5.0);
  Var f = -(a - b) + toiv::ad::square(a);
  EXPECT_EQ(f.value(), 11.0);
  auto g = t.backward(f);
  EXPECT_EQ(g[0], -1.0 + 6.0);
  EXPECT_EQ(g[1], 1.0);
}

TEST(Arith, DomainViolationsAreDegeneracies) {
  Tape t;
  Var a = t.lift(1.0);
  Var z = t.lift(0.0);
  EXPECT_THROW(a / z, toiv::DegeneracyError);
  EXPECT_THROW(toiv::ad::sqrt(t.lift(-1e-3)), toiv::DegeneracyError);
  EXPECT_THROW(Var(1.0) / Var(0.0), toiv::DegeneracyError);
}

TEST(Arith, ConstantsStayOffTape) {
  Var a(2.0);
  Var b(3.0);
  Var f = a * b + a;
  EXPECT_TRUE(f.is_constant());
  EXPECT_EQ(f.value(), 8.0);
}

TEST(Arith, ComparisonsUseValues) {
  Tape t;
  Var a = t.lift(1.0);
  EXPECT_TRUE(a < Var(2.0));
  EXPECT_TRUE(a == 1.0);
  EXPECT_FALSE(a > 1.0);
}

TEST(Backward, Square) {
  Tape t;
  Var x = t.lift(3.0);
  EXPECT_EQ(t.backward(x * x)[0], 6.0);
}

TEST(Backward, HandPartials) {
  Tape t;
  Var x = t.lift(2.0);
  Var y = t.lift(5.0);
  auto g = t.backward(x * y + y);
  EXPECT_EQ(g[0], 5.0);
  EXPECT_EQ(g[1], 3.0);
}

TEST(Backward, ConstantOperandContributesNothing) {
  Tape t;
  Var x = t.lift(2.0);
  Var c(7.0);
  auto g = t.backward(x * c);
  EXPECT_EQ(g[0], 7.0);
  EXPECT_EQ(g.size(), 1u);
}

TEST(Backward, UnreachableInputsGetExactZero) {
  Tape t;
  Var x = t.lift(2.0);
  Var y = t.lift(9.0);
  Var z = t.lift(-1.0);
  (void)(y * z); // recorded but not on the output's path
  auto g = t.backward(x * x);
  EXPECT_EQ(g[1], 0.0);
  EXPECT_EQ(g[2], 0.0);
}

TEST(Backward, OutputFromAnotherTapeIsUsageError) {
  Tape t1;
  Tape t2;
  Var x = t1.lift(1.0);
  Var f = x * x;
  EXPECT_THROW(t2.backward(f), std::logic_error);
  EXPECT_THROW(t1.backward(Var(3.0)), std::logic_error);
}

TEST(Backward, MixingTapesIsUsageError) {
  Tape t1;
  Tape t2;
  Var x = t1.lift(1.0);
  Var y = t2.lift(1.0);
  EXPECT_THROW(x + y, std::logic_error);
}

namespace {

// Random straight-line program over three inputs; operand choice and op
// kind come from the generator. Division and sqrt are guarded so the
// program stays in-domain.
template <class S>
S random_program(std::mt19937_64& rng, const std::vector<S>& inputs, int length) {
  std::vector<S> pool = inputs;
  std::uniform_int_distribution<int> op(0, 6);
  for (int k = 0; k < length; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const S a = pool[pick(rng)];
    const S b = pool[pick(rng)];
    using std::sqrt;
    using toiv::ad::sqrt;
    switch (op(rng)) {
    case 0: pool.push_back(a + b); break;
    case 1: pool.push_back(a - b); break;
    case 2: pool.push_back(a * b); break;
    case 3: pool.push_back(a / (b * b + S(1.0))); break;
    case 4: pool.push_back(-a); break;
    case 5: pool.push_back(sqrt(a * a + S(0.5))); break;
    default: pool.push_back(a * a); break;
    }
  }
  return pool.back() + pool[pool.size() / 2];
}

} // namespace

TEST(Property, AdjointMatchesCentralDifferences) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const std::vector<double> x0{u(gen), u(gen), u(gen)};

    Tape t;
    std::vector<Var> xs;
    for (double v : x0) xs.push_back(t.lift(v));
    std::mt19937_64 rng(seed * 7919);
    const Var f = random_program(rng, xs, 12);
    const auto g = t.backward(f);

    const double h = 1e-5;
    for (std::size_t i = 0; i < x0.size(); ++i) {
      auto eval = [&](double delta) {
        std::vector<long double> xl(x0.begin(), x0.end());
        xl[i] += delta;
        std::mt19937_64 same(seed * 7919);
        return random_program<long double>(same, xl, 12);
      };
      const double fd = static_cast<double>((eval(h) - eval(-h)) / (2.0L * h));
      const double scale = std::max({std::abs(fd), std::abs(g[i]), 1.0});
      EXPECT_LE(std::abs(fd - g[i]) / scale, std::max(1e-6, 1e-4 * h)) << "seed " << seed << " input " << i;
    }
  }
}

TEST(Property, Linearity) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double alpha = u(gen) * 3.0;
    const double beta = u(gen) * 3.0;
    Tape t;
    std::vector<Var> xs{t.lift(u(gen)), t.lift(u(gen)), t.lift(u(gen))};
    std::mt19937_64 r1(seed + 100);
    std::mt19937_64 r2(seed + 200);
    const Var f = random_program(r1, xs, 10);
    const Var g = random_program(r2, xs, 10);
    const auto gf = t.backward(f);
    const auto gg = t.backward(g);
    const auto gh = t.backward(Var(alpha) * f + Var(beta) * g);
    for (std::size_t i = 0; i < 3; ++i) {
      const double expect = alpha * gf[i] + beta * gg[i];
      EXPECT_NEAR(gh[i], expect, 1e-12 * std::max(1.0, std::abs(expect))) << "seed " << seed;
    }
  }
}

TEST(Property, TapeIsTopologicalAndReplaysBitExact) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tape t;
  std::vector<Var> xs{t.lift(u(gen)), t.lift(u(gen)), t.lift(u(gen))};
  std::mt19937_64 rng(11);
  (void)random_program(rng, xs, 200);
  const auto& entries = t.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    EXPECT_LT(entries[k].lhs, static_cast<std::int32_t>(k));
    EXPECT_LT(entries[k].rhs, static_cast<std::int32_t>(k));
  }
  const auto replayed = t.replay();
  ASSERT_EQ(replayed.size(), entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    EXPECT_EQ(replayed[k], entries[k].result) << "entry " << k;
  }
}

// Full 480-step contact-free rollout, loss on Ball 1's final position so that
// every control entry has a non-trivial path to the output.
TEST(Backward, NoContactRolloutMatchesFiniteDifferences) {
  toiv::ScenarioConfig sc;
  sc.initial = {{0.0, 0.0}, {50.0, 50.0}, {0.0, 0.0}, {0.0, 0.0}};
  sc.steps = 480;
  std::mt19937_64 gen(42);
  std::normal_distribution<double> n(0.0, 2.0);
  toiv::ControlSequence u(480);
  for (auto& e : u) e = {n(gen), n(gen)};
  const auto contact = toiv::ContactConfig::direct(true, true);

  auto loss = [&](auto tag, const auto& controls) {
    using S = decltype(tag);
    const auto traj = toiv::rollout<S>(sc, contact, std::span<const toiv::Vec2<S>>(controls));
    const auto& p = traj.back().p1;
    return p.x * p.x + S(3.0) * p.y * p.x + p.y * p.y;
  };

  Tape t;
  std::vector<toiv::Vec2<Var>> lifted;
  for (const auto& e : u) {
    Var ux = t.lift(e.x);
    Var uy = t.lift(e.y);
    lifted.emplace_back(ux, uy);
  }
  const auto g = t.backward(loss(Var{}, lifted));

  std::uniform_int_distribution<int> pick(0, 959);
  const double h = 1e-5;
  for (int probe = 0; probe < 5; ++probe) {
    const int k = pick(gen);
    auto eval = [&](double delta) {
      std::vector<toiv::Vec2<long double>> ul;
      for (const auto& e : u) ul.emplace_back(e.x, e.y);
      (k % 2 == 0 ? ul[static_cast<std::size_t>(k / 2)].x : ul[static_cast<std::size_t>(k / 2)].y) += delta;
      return loss(0.0L, ul);
    };
    const double fd = static_cast<double>((eval(h) - eval(-h)) / (2.0L * h));
    EXPECT_LT(std::abs(fd - g[static_cast<std::size_t>(k)]) / std::abs(fd), 1e-6) << "entry " << k;
  }
}
