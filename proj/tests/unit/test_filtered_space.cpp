#include "../support/models.hpp"

#include <deflab/error.hpp>
#include <deflab/filtered_space.hpp>

#include <gtest/gtest.h>

using namespace deflab;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

EventTree one_step(int branches) {
  const std::vector<int> counts{branches};
  return EventTree::from_child_counts(1, 1, counts);
}

}  // namespace

TEST(EventTree, LayersAndAncestors) {
  const EventTree t = EventTree::uniform(1, 2, 2);
  EXPECT_EQ(t.size(), 7u);
  EXPECT_EQ(t.leaf_count(), 4u);
  EXPECT_EQ(t.decision_count(), 3u);
  EXPECT_EQ(t.ancestor_at(5, 1), 2);
  EXPECT_EQ(t.ancestor_at(5, 0), 0);
  EXPECT_TRUE(t.is_ancestor_or_self(1, 4));
  EXPECT_FALSE(t.is_ancestor_or_self(1, 5));
  EXPECT_EQ(t.leaves_below(2), std::make_pair(NodeId{5}, NodeId{7}));
  EXPECT_EQ(t.leaf_index(6), 3u);
}

TEST(EventTree, RejectsBrokenRecords) {
  EXPECT_THROW(EventTree(1, {}), ValidationError);
  EXPECT_THROW(EventTree(1, {{0, 0, std::nullopt}, {1, 1, std::nullopt}}), ValidationError);
  EXPECT_THROW(EventTree(1, {{0, 0, std::nullopt}, {1, 2, 0}}), ValidationError);
  EXPECT_THROW(EventTree(1, {{0, 0, std::nullopt}, {2, 1, 0}}), ValidationError);
  // a time-1 node without children while another reaches time 2
  EXPECT_THROW(EventTree(1, {{0, 0, std::nullopt}, {1, 1, 0}, {2, 1, 0}, {3, 2, 1}}), ValidationError);
  EXPECT_THROW(EventTree(0, {{0, 0, std::nullopt}, {1, 1, 0}}), ValidationError);
}

TEST(ProbMeasure, ValidatesMasses) {
  const EventTree t = one_step(2);
  EXPECT_THROW(ProbMeasure(t, {q(1, 2)}), ValidationError);
  EXPECT_THROW(ProbMeasure(t, {q(3, 2), q(-1, 2)}), ValidationError);
  EXPECT_THROW(ProbMeasure(t, {q(1, 2), q(1, 3)}), ValidationError);
  const ProbMeasure P(t, {q(1, 4), q(3, 4)});
  EXPECT_EQ(P.atom_mass(0), 1);
  EXPECT_EQ(P.atom_mass(2), q(3, 4));
  EXPECT_TRUE(P.strictly_positive());
  EXPECT_FALSE(ProbMeasure(t, {q(0), q(1)}).strictly_positive());
}

TEST(ConditionalExpectation, TwoLeafAverage) {
  const EventTree t = one_step(2);
  const ProbMeasure P = ProbMeasure::uniform(t);
  const AdaptedProcess X = AdaptedProcess::scalar(t, {q(0), q(2), q(1, 2)});
  const auto e = conditional_expectation(t, P, X, 1, 0);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0][0], q(5, 4));
}

TEST(ConditionalExpectation, ConstantAndIndicator) {
  const EventTree t = EventTree::uniform(1, 2, 3);
  const ProbMeasure P = ProbMeasure::uniform(t);
  const AdaptedProcess c = AdaptedProcess::constant(t, {q(7, 3)});
  for (int k = 0; k <= 2; ++k) {
    for (const auto& v : conditional_expectation(t, P, c, 2, k)) EXPECT_EQ(v[0], q(7, 3));
  }
  const NodeId leaf = t.leaves()[4];
  const AdaptedProcess ind = AdaptedProcess::from_function(
      t, 1, [&](NodeId v) { return RationalVector{Rational(v == leaf ? 1 : 0)}; });
  EXPECT_EQ(conditional_expectation(t, P, ind, 2, 0)[0][0], P.leaf_mass(4));
}

TEST(ConditionalExpectation, TowerPropertyOnRandomTrees) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto m = testkit::random_model(seed);
    const int n = m.tree.horizon();
    for (int j = 0; j < n; ++j) {
      for (int mid = j; mid <= n; ++mid) {
        const auto inner = conditional_expectation(m.tree, m.P, m.S, n, mid);
        std::vector<RationalVector> values(m.tree.size(), RationalVector{Rational(0)});
        const auto layer = m.tree.layer(mid);
        for (std::size_t i = 0; i < layer.size(); ++i) values[static_cast<std::size_t>(layer[i])] = inner[i];
        const AdaptedProcess Y(m.tree, 1, values);
        EXPECT_EQ(conditional_expectation(m.tree, m.P, Y, mid, j), conditional_expectation(m.tree, m.P, m.S, n, j));
      }
    }
  }
}

TEST(ConditionalMean, NullAtom) {
  const EventTree t = EventTree::uniform(1, 2, 2);
  const ProbMeasure P(t, {q(1, 2), q(1, 2), q(0), q(0)});
  EXPECT_EQ(conditional_mean(t, P, 2, 2, [](NodeId) -> Rational { return Rational(0); }), 0);
  EXPECT_THROW(conditional_mean(t, P, 2, 2, [](NodeId) -> Rational { return Rational(1); }), NullAtomError);
}

TEST(StochasticIntegral, Examples) {
  const EventTree t = one_step(2);
  const AdaptedProcess S = AdaptedProcess::scalar(t, {q(1), q(2), q(1, 2)});
  const AdaptedProcess zero = stochastic_integral(t, S, Strategy::zero(t, 1));
  for (NodeId v = 0; v < 3; ++v) EXPECT_EQ(zero.scalar_at(v), 0);
  const AdaptedProcess g = stochastic_integral(t, S, Strategy::constant(t, {q(1)}));
  EXPECT_EQ(g.scalar_at(1), q(1));
  EXPECT_EQ(g.scalar_at(2), q(-1, 2));

  const EventTree t2 = EventTree::uniform(1, 2, 2);
  const AdaptedProcess S2 = AdaptedProcess::scalar(t2, {q(1), q(2), q(1, 2), q(4), q(1), q(1), q(1, 4)});
  const AdaptedProcess g2 = stochastic_integral(t2, S2, Strategy::constant(t2, {q(1)}));
  for (NodeId leaf : t2.leaves()) EXPECT_EQ(g2.scalar_at(leaf), S2.scalar_at(leaf) - S2.scalar_at(0));
}

TEST(Doob, SingletonPath) {
  const EventTree t = one_step(1);
  const ProbMeasure P = ProbMeasure::uniform(t);
  const auto d = doob_decomposition(t, P, AdaptedProcess::scalar(t, {q(1), q(1, 2)}));
  EXPECT_EQ(d.compensator_increment.scalar_at(0), q(1, 2));
  EXPECT_EQ(d.martingale.scalar_at(1), 0);
  EXPECT_TRUE(d.nondecreasing());
}

TEST(Doob, OneStepSupermartingale) {
  const EventTree t = one_step(2);
  const ProbMeasure P = ProbMeasure::uniform(t);
  const AdaptedProcess Z = AdaptedProcess::scalar(t, {q(1), q(3, 2), q(1, 4)});
  const auto d = doob_decomposition(t, P, Z);
  EXPECT_EQ(d.compensator_increment.scalar_at(0), q(1, 8));
  EXPECT_TRUE(is_supermartingale(t, P, Z));
  EXPECT_FALSE(is_martingale(t, P, Z));
  for (NodeId v : t.leaves()) {
    EXPECT_EQ(Z.scalar_at(v), Z.scalar_at(0) + d.martingale.scalar_at(v) - d.compensator.scalar_at(v));
  }
}

TEST(Doob, MartingaleHasNoCompensator) {
  const EventTree t = EventTree::uniform(1, 2, 2);
  const ProbMeasure P = ProbMeasure::uniform(t);
  const AdaptedProcess Z = AdaptedProcess::scalar(t, {q(1), q(3, 2), q(1, 2), q(2), q(1), q(1), q(0)});
  const auto d = doob_decomposition(t, P, Z);
  for (NodeId v : t.leaves()) EXPECT_EQ(d.compensator.scalar_at(v), 0);
  for (NodeId v = 0; v < 7; ++v) EXPECT_EQ(d.martingale.scalar_at(v), Z.scalar_at(v) - 1);
}

TEST(StoppingTime, HittingTimeAndValidation) {
  const EventTree t = EventTree::uniform(1, 2, 2);
  const StoppingTime tau = StoppingTime::hitting_time(t, [](NodeId v) { return v == 1 || v == 6; });
  EXPECT_EQ(tau.determination(3), NodeId{1});
  EXPECT_EQ(tau.determination(4), NodeId{1});
  EXPECT_EQ(tau.determination(5), std::nullopt);
  EXPECT_EQ(tau.determination(6), NodeId{6});
  EXPECT_THROW(StoppingTime(t, {1, 3}), ValidationError);
  EXPECT_EQ(StoppingTime::deterministic(t, 1).stopped_nodes(), (std::vector<NodeId>{1, 2}));
}
