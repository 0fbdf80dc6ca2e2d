#include "../support/models.hpp"

#include <deflab/deflator.hpp>
#include <deflab/error.hpp>
#include <deflab/fixtures.hpp>

#include <gtest/gtest.h>

using namespace deflab;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

testkit::Model one_step(const RationalVector& moves) {
  const std::vector<int> counts{static_cast<int>(moves.size())};
  EventTree tree = EventTree::from_child_counts(1, 1, counts);
  ProbMeasure P = ProbMeasure::uniform(tree);
  RationalVector s{Rational(0)};
  s.insert(s.end(), moves.begin(), moves.end());
  AdaptedProcess S = AdaptedProcess::scalar(tree, s);
  return {std::move(tree), std::move(P), std::move(S)};
}

}  // namespace

TEST(OnePeriodDensity, Examples) {
  const auto a = one_step({q(1), q(-1, 2)});
  const auto za = one_period_density(a.tree, a.P, a.S);
  ASSERT_EQ(za.size(), 1u);
  EXPECT_EQ(*za[0].value, q(3, 2));
  EXPECT_EQ(za[0].maximizer, RationalVector{q(2)});

  const auto b = one_step({q(0), q(0)});
  EXPECT_EQ(*one_period_density(b.tree, b.P, b.S)[0].value, 1);

  const auto c = one_step({q(1), q(-1)});
  EXPECT_EQ(*one_period_density(c.tree, c.P, c.S)[0].value, 1);

  const auto d = one_step({q(1), q(1, 2)});
  EXPECT_THROW(one_period_density(d.tree, d.P, d.S), NA1FailureError);
}

TEST(ConstructDeflator, MartingaleGivesOne) {
  const auto m = one_step({q(1), q(-1)});
  const Deflator d = construct_deflator({m.tree, m.P, m.S});
  for (NodeId v = 0; v < static_cast<NodeId>(m.tree.size()); ++v) EXPECT_EQ(d.Z.scalar_at(v), 1);
}

TEST(ConstructDeflator, TwoStepBackwardInduction) {
  const TreeFile f = fixtures::two_step_binomial();
  const Deflator d = construct_deflator({f.tree, f.measure(), f.process("S")});
  EXPECT_EQ(d.Z.scalar_at(0), q(9, 4));
  for (NodeId v : f.tree.layer(1)) EXPECT_EQ(d.Z.scalar_at(v), q(3, 2));
  for (NodeId v : f.tree.leaves()) EXPECT_EQ(d.Z.scalar_at(v), 1);
  EXPECT_TRUE(d.doob.nondecreasing());
  const AdaptedProcess Zn = normalize_deflator(f.tree, f.measure(), d.Z);
  EXPECT_EQ(Zn.scalar_at(0), 1);
  EXPECT_EQ(Zn.scalar_at(1), q(2, 3));
}

TEST(ConstructDeflator, DeterministicDriftNamesTheAtom) {
  const TreeFile f = fixtures::deterministic_drift();
  try {
    construct_deflator({f.tree, f.measure(), f.process("S")});
    FAIL() << "expected NA1FailureError";
  } catch (const NA1FailureError& e) {
    EXPECT_EQ(e.node(), 0);
    ASSERT_EQ(e.ray().size(), 1u);
    EXPECT_GT(e.ray()[0], 0);
  }
}

TEST(ConstructDeflator, ReportsDeepestFailingAtom) {
  // root step is viable, the second step at node 2 drifts upward
  const EventTree t = EventTree::uniform(1, 2, 2);
  const ProbMeasure P = ProbMeasure::uniform(t);
  const AdaptedProcess S = AdaptedProcess::scalar(t, {q(0), q(1), q(-1), q(2), q(0), q(0), q(1)});
  try {
    construct_deflator({t, P, S});
    FAIL() << "expected NA1FailureError";
  } catch (const NA1FailureError& e) {
    EXPECT_EQ(e.node(), 2);
  }
}

TEST(VerifyDeflation, Examples) {
  const TreeFile f = fixtures::binomial();
  const WealthProblem p{f.tree, f.measure(), f.process("S")};
  const Deflator d = construct_deflator(p);
  EXPECT_TRUE(verify_deflation(p, d.Z, 32, 7).ok());

  // Z = 1 against a drifted NA1 market: the atom inequality 1 >= 3/2 fails
  const AdaptedProcess one = AdaptedProcess::constant(f.tree, {q(1)});
  const DeflationReport r = verify_deflation(p, one, 32, 7);
  EXPECT_FALSE(r.certified);
  ASSERT_FALSE(r.certificate_violations.empty());
  EXPECT_EQ(r.certificate_violations[0].node, 0);
  EXPECT_EQ(r.certificate_violations[0].slack, q(-1, 2));

  const auto m = one_step({q(1), q(-1)});
  EXPECT_TRUE(verify_deflation({m.tree, m.P, m.S}, AdaptedProcess::constant(m.tree, {q(1)}), 32, 7).ok());
}

TEST(VerifyDeflation, RandomStrategiesAreAdmissible) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto m = testkit::random_model(seed, {3, 3, 2, 4});
    const Strategy H = random_admissible_strategy(m.tree, m.S, seed);
    EXPECT_TRUE(is_admissible(m.tree, m.S, H));
  }
}

TEST(ConstructDeflator, EveryDeflatedWealthIsASupermartingale) {
  for (std::uint64_t seed = 500; seed < 560; ++seed) {
    const auto m = testkit::random_model(seed, {3, 3, 1, 4});
    const WealthProblem p{m.tree, m.P, m.S};
    Deflator d;
    try {
      d = construct_deflator(p);
    } catch (const NA1FailureError&) {
      continue;
    }
    // oracle: Z (1 + H.S) checked directly for sampled admissible H
    for (std::uint64_t j = 0; j < 8; ++j) {
      const Strategy H = random_admissible_strategy(m.tree, m.S, seed * 100 + j);
      const AdaptedProcess G = stochastic_integral(m.tree, m.S, H);
      const AdaptedProcess ZW = AdaptedProcess::from_function(m.tree, 1, [&](NodeId v) {
        return RationalVector{d.Z.scalar_at(v) * (1 + G.scalar_at(v))};
      });
      EXPECT_TRUE(is_supermartingale(m.tree, m.P, ZW)) << "seed " << seed;
    }
    EXPECT_TRUE(is_supermartingale(m.tree, m.P, d.Z));
  }
}
