#include "../support/models.hpp"

#include <deflab/deflator.hpp>
#include <deflab/error.hpp>
#include <deflab/fixtures.hpp>
#include <deflab/kunita_yoeurp.hpp>

#include <gtest/gtest.h>

using namespace deflab;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

}  // namespace

TEST(DominatingMeasure, SingletonSupermartingale) {
  const auto f = fixtures::make("singleton-supermartingale");
  const TreeFile& file = *f.file;
  const DominatingMeasure dm = build_dominating_measure(file.tree, file.measure(), file.process("Z"));
  EXPECT_EQ(dm.mass(0, 1), q(1, 2));
  EXPECT_EQ(dm.mass(0, kNever), q(1, 2));
  EXPECT_EQ(dm.total_mass(), 1);
  EXPECT_EQ(dm.survival_mass(0), 1);
  EXPECT_EQ(dm.survival_mass(1), q(1, 2));
  EXPECT_EQ(dm.death_mass(1, 1), q(1, 2));
  EXPECT_EQ(dm.gamma_survival(1), Rational(2));
  EXPECT_EQ(dm.gamma_dead(1, 1), Rational(0));
  const KyReport r = verify_ky(dm);
  EXPECT_TRUE(r.ok());
  EXPECT_FALSE(r.no_death);
}

TEST(DominatingMeasure, UnitDensityGivesPbar) {
  const auto m = testkit::random_model(7, {3, 3, 1, 4});
  const AdaptedProcess one = AdaptedProcess::constant(m.tree, {q(1)});
  const DominatingMeasure dm = build_dominating_measure(m.tree, m.P, one);
  for (std::size_t l = 0; l < m.tree.leaf_count(); ++l) {
    EXPECT_EQ(dm.mass(l, kNever), m.P.leaf_mass(l));
    for (int z = 1; z <= m.tree.horizon(); ++z) EXPECT_EQ(dm.mass(l, z), 0);
  }
  const KyReport r = verify_ky(dm);
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.no_death);
  EXPECT_TRUE(check_domination(dm).dominated);
}

TEST(DominatingMeasure, CorruptedMassFailsSurvivalProperty) {
  const auto f = fixtures::make("exponential-death");
  const TreeFile& file = *f.file;
  DominatingMeasure dm = build_dominating_measure(file.tree, file.measure(), file.process("Z"));
  EXPECT_TRUE(verify_ky(dm).ok());
  // move mass from death at 2 to death at 1; the total is unchanged
  const std::size_t slot1 = dm.space.slot(1);
  const std::size_t slot2 = dm.space.slot(2);
  dm.q[0][slot1] += q(1, 8);
  dm.q[0][slot2] -= q(1, 8);
  const KyReport r = verify_ky(dm);
  EXPECT_TRUE(r.mass_ok);
  EXPECT_FALSE(r.property3);
  EXPECT_FALSE(r.ok());
  ASSERT_FALSE(r.failures.empty());
}

TEST(DominatingMeasure, Preconditions) {
  const auto f = fixtures::make("binomial");
  const TreeFile& file = *f.file;
  const ProbMeasure P = file.measure();
  EXPECT_THROW(build_dominating_measure(file.tree, P, AdaptedProcess::scalar(file.tree, {q(2), q(2), q(2)})),
               PreconditionError);
  EXPECT_THROW(build_dominating_measure(file.tree, P, AdaptedProcess::scalar(file.tree, {q(1), q(3), q(-1)})),
               PreconditionError);
  // a submartingale step
  EXPECT_THROW(build_dominating_measure(file.tree, P, AdaptedProcess::scalar(file.tree, {q(1), q(2), q(1)})),
               PreconditionError);
  const ProbMeasure degenerate(file.tree, {q(1), q(0)});
  EXPECT_THROW(build_dominating_measure(file.tree, degenerate, AdaptedProcess::constant(file.tree, {q(1)})),
               PreconditionError);
}

TEST(Yoeurp, ConstantIntegrandGivesTheConstant) {
  const auto f = fixtures::make("exponential-death");
  const TreeFile& file = *f.file;
  const DominatingMeasure dm = build_dominating_measure(file.tree, file.measure(), file.process("Z"));
  const YoeurpResult r = yoeurp_expectation(dm, Strategy::constant(file.tree, {q(7, 3)}));
  EXPECT_EQ(r.q_side, q(7, 3));
  EXPECT_EQ(r.p_side, q(7, 3));
}

TEST(Yoeurp, SingletonValues) {
  const auto f = fixtures::make("singleton-supermartingale");
  const TreeFile& file = *f.file;
  const DominatingMeasure dm = build_dominating_measure(file.tree, file.measure(), file.process("Z"));
  const Strategy y(file.tree, 1, {{q(3)}});
  const YoeurpResult r = yoeurp_expectation(dm, y, RationalVector{q(-1)});
  EXPECT_EQ(r.q_side, q(3, 2) - q(1, 2));
  EXPECT_EQ(r.p_side, r.q_side);
}

TEST(Yoeurp, DeathIndicator) {
  const auto f = fixtures::make("singleton-supermartingale");
  const TreeFile& file = *f.file;
  const DominatingMeasure dm = build_dominating_measure(file.tree, file.measure(), file.process("Z"));
  const YoeurpResult r = yoeurp_expectation(dm, Strategy::constant(file.tree, {q(1)}), RationalVector{q(0)});
  EXPECT_EQ(r.q_side, q(1, 2));
}

TEST(Yoeurp, LeftLimitFormOnRandomDeflators) {
  int used = 0;
  for (std::uint64_t seed = 1; seed <= 40 && used < 10; ++seed) {
    const auto m = testkit::random_model(seed);
    Deflator d;
    try {
      d = construct_deflator(WealthProblem{m.tree, m.P, m.S});
    } catch (const NA1FailureError&) {
      continue;
    }
    const AdaptedProcess Z = normalize_deflator(m.tree, m.P, d.Z);
    const DominatingMeasure dm = build_dominating_measure(m.tree, m.P, Z);
    const YoeurpResult r = yoeurp_expectation_left(dm, m.S);
    EXPECT_EQ(r.q_side, r.p_side);
    ++used;
  }
  EXPECT_GT(used, 0);
}

TEST(StoppedPrice, MartingaleDensityKeepsThePriceMartingale) {
  const auto m = testkit::fixture_model("binomial");
  // dQ*/dP with Q* = (1/3, 2/3)
  const AdaptedProcess Z = AdaptedProcess::scalar(m.tree, {q(1), q(2, 3), q(4, 3)});
  ASSERT_TRUE(is_martingale(m.tree, m.P, Z));
  const DominatingMeasure dm = build_dominating_measure(m.tree, m.P, Z);
  const StoppedPriceReport r = check_stopped_price(dm, m.S);
  EXPECT_TRUE(r.martingale);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_TRUE(r.converse_deflator);
}

TEST(StoppedPrice, DeathAddsDrift) {
  const auto f = fixtures::make("exponential-death");
  const TreeFile& file = *f.file;
  const DominatingMeasure dm = build_dominating_measure(file.tree, file.measure(), file.process("Z"));
  const StoppedPriceReport r = check_stopped_price(dm, file.process("S"));
  EXPECT_FALSE(r.martingale);
  ASSERT_EQ(r.violations.size(), 2u);
  EXPECT_EQ(r.violations[0].drift[0], q(1, 2));
  EXPECT_EQ(r.violations[1].drift[0], q(1));
  EXPECT_TRUE(check_domination(dm).dominated);
}

TEST(EnlargedSpace, SlotEncoding) {
  const EventTree t = EventTree::uniform(1, 3, 1);
  const EnlargedSpace s{&t};
  EXPECT_EQ(s.slots(), 4u);
  EXPECT_EQ(s.slot(1), 0u);
  EXPECT_EQ(s.slot(kNever), 3u);
  EXPECT_EQ(s.zeta(3), kNever);
  EXPECT_THROW(s.slot(4), ValidationError);
}
