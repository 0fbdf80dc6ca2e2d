#include "../support/models.hpp"

#include <deflab/arbitrage.hpp>
#include <deflab/error.hpp>
#include <deflab/fixtures.hpp>

#include <gtest/gtest.h>

#include <optional>

using namespace deflab;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

struct OneStep {
  EventTree tree;
  ProbMeasure P;
  AdaptedProcess S;
};

OneStep one_step(const RationalVector& children, const RationalVector& mass) {
  const std::vector<int> counts{static_cast<int>(children.size())};
  EventTree tree = EventTree::from_child_counts(1, 1, counts);
  ProbMeasure P(tree, mass);
  RationalVector s{Rational(1)};
  s.insert(s.end(), children.begin(), children.end());
  AdaptedProcess S = AdaptedProcess::scalar(tree, s);
  return {std::move(tree), std::move(P), std::move(S)};
}

// 1-d NA1 holds iff every increment set is all zero or takes both signs.
bool na1_oracle_1d(const testkit::Model& m) {
  for (NodeId v = 0; v < static_cast<NodeId>(m.tree.decision_count()); ++v) {
    bool up = false;
    bool down = false;
    for (NodeId c : m.tree.children(v)) {
      up = up || m.S.scalar_at(c) > m.S.scalar_at(v);
      down = down || m.S.scalar_at(c) < m.S.scalar_at(v);
    }
    if (up != down) return false;
  }
  return true;
}

// sup E[1 + (H.S)_n]: wealth is multiplicative per step and the objective
// is linear in the one-step fraction h, so only the ends of the admissible
// interval matter.
std::optional<Rational> value_oracle_1d(const testkit::Model& m, NodeId v) {
  if (m.tree.is_leaf(v)) return Rational(1);
  std::optional<Rational> lo;
  std::optional<Rational> hi;
  std::vector<Rational> cont;
  Rational base = 0;
  Rational slope = 0;
  for (NodeId c : m.tree.children(v)) {
    const Rational d = m.S.scalar_at(c) - m.S.scalar_at(v);
    if (d > 0 && (!lo || -1 / d > *lo)) lo = Rational(-1 / d);
    if (d < 0 && (!hi || -1 / d < *hi)) hi = Rational(-1 / d);
    const auto child = value_oracle_1d(m, c);
    if (!child) return std::nullopt;
    const Rational w = m.P.atom_mass(c) / m.P.atom_mass(v) * *child;
    base += w;
    slope += w * d;
  }
  if (slope > 0) return hi ? std::optional<Rational>(base + slope * *hi) : std::nullopt;
  if (slope < 0) return lo ? std::optional<Rational>(base + slope * *lo) : std::nullopt;
  return base;
}

}  // namespace

TEST(CheckNa, Examples) {
  const auto drift = one_step({q(2), q(1)}, {q(1, 2), q(1, 2)});
  const ArbitrageReport r = check_na({drift.tree, drift.P, drift.S});
  EXPECT_FALSE(r.na_holds);
  ASSERT_TRUE(r.arbitrage);
  EXPECT_TRUE(is_arbitrage({drift.tree, drift.P, drift.S}, *r.arbitrage));
  const AdaptedProcess X = stochastic_integral(drift.tree, drift.S, Strategy::constant(drift.tree, {q(1)}));
  EXPECT_EQ(X.scalar_at(1) + 1, 2);
  EXPECT_EQ(X.scalar_at(2) + 1, 1);

  const auto binomial = one_step({q(2), q(1, 2)}, {q(1, 2), q(1, 2)});
  EXPECT_TRUE(check_na({binomial.tree, binomial.P, binomial.S}).na_holds);

  const auto flat = one_step({q(1), q(1)}, {q(1, 3), q(2, 3)});
  const ArbitrageReport f = check_na({flat.tree, flat.P, flat.S});
  EXPECT_TRUE(f.na_holds);
  EXPECT_EQ(f.na_optimum, 0);
}

TEST(CheckNa1, BinomialGridOracle) {
  const auto b = one_step({q(2), q(1, 2)}, {q(1, 2), q(1, 2)});
  const ArbitrageReport r = check_na1({b.tree, b.P, b.S});
  ASSERT_TRUE(r.na1_holds);
  // brute force over h on a 1/64 grid of the admissible interval [-1, 2]
  Rational best = -1;
  for (long j = -64; j <= 128; ++j) {
    const Rational h = q(j, 64);
    const Rational x = q(1, 2) * (1 + h) + q(1, 2) * (1 - h / 2);
    if (x > best) best = x;
  }
  EXPECT_EQ(*r.optimal_value, best);
  EXPECT_EQ(best, q(3, 2));
  EXPECT_EQ(r.optimal_strategy->scalar_at(0), 2);
}

TEST(CheckNa1, TwoStepMultipliesOptima) {
  const TreeFile f = fixtures::two_step_binomial();
  const ArbitrageReport r = check_na1({f.tree, f.measure(), f.process("S")});
  ASSERT_TRUE(r.na1_holds);
  EXPECT_EQ(*r.optimal_value, q(9, 4));
}

TEST(CheckNa1, DeterministicDriftIsUnbounded) {
  const TreeFile f = fixtures::deterministic_drift();
  const WealthProblem p{f.tree, f.measure(), f.process("S")};
  const ArbitrageReport r = check_na1(p);
  EXPECT_FALSE(r.na1_holds);
  EXPECT_FALSE(r.optimal_value);
  ASSERT_TRUE(r.unbounded_ray);
  EXPECT_TRUE(is_unbounded_ray(p, *r.unbounded_ray));
}

TEST(CheckNa1, RandomTreesMatchOracles) {
  int holds = 0;
  for (std::uint64_t seed = 100; seed < 250; ++seed) {
    const auto m = testkit::random_model(seed, {3, 3, 1, 4});
    const WealthProblem p{m.tree, m.P, m.S};
    const ArbitrageReport r = check_both(p);
    const bool oracle = na1_oracle_1d(m);
    ASSERT_EQ(r.na1_holds, oracle) << "seed " << seed;
    // on finite trees with P > 0, NA and NA1 coincide
    EXPECT_EQ(r.na_holds, r.na1_holds) << "seed " << seed;
    const auto value = value_oracle_1d(m, 0);
    EXPECT_EQ(value.has_value(), r.na1_holds);
    if (r.na1_holds) {
      EXPECT_EQ(*r.optimal_value, *value) << "seed " << seed;
      EXPECT_GE(*r.optimal_value, 1);
      EXPECT_TRUE(is_admissible(m.tree, m.S, *r.optimal_strategy));
      ++holds;
    } else {
      EXPECT_TRUE(is_unbounded_ray(p, *r.unbounded_ray));
      EXPECT_TRUE(is_arbitrage(p, *r.arbitrage));
    }
  }
  EXPECT_GT(holds, 20);
}

TEST(CheckNa1, PivotRulesAgree) {
  for (std::uint64_t seed = 300; seed < 340; ++seed) {
    const auto m = testkit::random_model(seed, {3, 3, 2, 4});
    const WealthProblem p{m.tree, m.P, m.S};
    const ArbitrageReport a = check_na1(p, lp::PivotRule::Bland);
    const ArbitrageReport b = check_na1(p, lp::PivotRule::Dantzig);
    EXPECT_EQ(a.na1_holds, b.na1_holds);
    EXPECT_EQ(a.optimal_value, b.optimal_value);
  }
}

TEST(WealthProblem, RejectsNullAtomsAndShapes) {
  const auto b = one_step({q(2), q(1, 2)}, {q(1), q(0)});
  EXPECT_THROW(check_na1({b.tree, b.P, b.S}), ValidationError);
  const auto ok = one_step({q(2), q(1, 2)}, {q(1, 2), q(1, 2)});
  const EventTree other = EventTree::uniform(1, 2, 2);
  const AdaptedProcess wrong = AdaptedProcess::constant(other, {q(1)});
  EXPECT_THROW(check_na1({ok.tree, ok.P, wrong}), ValidationError);
}

TEST(PiecewiseLinearUtility, EvaluatesAndValidates) {
  const auto U = PiecewiseLinearUtility::unit_steps({q(1), q(1, 2), q(0)});
  EXPECT_EQ(U(q(0)), 0);
  EXPECT_EQ(U(q(1, 2)), q(1, 2));
  EXPECT_EQ(U(q(3, 2)), q(5, 4));
  EXPECT_EQ(U(q(10)), q(3, 2));
  EXPECT_THROW(PiecewiseLinearUtility::unit_steps({q(1), q(2)}), ValidationError);
  EXPECT_THROW(PiecewiseLinearUtility({q(1)}, {q(1)}), ValidationError);
}

TEST(FiniteUtilityCheck, Examples) {
  const auto b = one_step({q(2), q(1, 2)}, {q(1, 2), q(1, 2)});
  const WealthProblem p{b.tree, b.P, b.S};
  EXPECT_EQ(*finite_utility_check(p, PiecewiseLinearUtility::unit_steps({q(1)})).value, q(3, 2));
  EXPECT_EQ(*finite_utility_check(p, PiecewiseLinearUtility::unit_steps({q(1), q(0)})).value, q(1));

  const auto flat = one_step({q(1), q(1)}, {q(1, 2), q(1, 2)});
  const auto U = PiecewiseLinearUtility::unit_steps({q(2), q(1, 3), q(1, 5)});
  EXPECT_EQ(*finite_utility_check({flat.tree, flat.P, flat.S}, U).value, U(q(1)));

  const TreeFile d = fixtures::deterministic_drift();
  EXPECT_FALSE(finite_utility_check({d.tree, d.measure(), d.process("S")}, PiecewiseLinearUtility::unit_steps({q(1)}))
                   .value);
}

TEST(FiniteUtilityCheck, ConcaveUtilityBelowLinearValue) {
  for (std::uint64_t seed = 400; seed < 430; ++seed) {
    const auto m = testkit::random_model(seed, {2, 3, 1, 4});
    const WealthProblem p{m.tree, m.P, m.S};
    const ArbitrageReport r = check_na1(p);
    if (!r.na1_holds) continue;
    const auto U = PiecewiseLinearUtility::unit_steps({q(1), q(1, 2), q(1, 4)});
    const UtilityValue v = finite_utility_check(p, U);
    ASSERT_TRUE(v.value);
    EXPECT_LE(*v.value, *r.optimal_value);
    EXPECT_GE(*v.value, U(q(1)));
  }
}
