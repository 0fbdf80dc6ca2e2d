#include <deflab/lp.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace deflab;
using namespace deflab::lp;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

// Brute force for two variables: maximize over all pairwise intersections
// of constraint lines (sign bounds included) that are feasible.
std::optional<Rational> brute_force_2d(const Problem& p) {
  std::vector<Row> lines = p.rows;
  for (std::size_t j = 0; j < 2; ++j) {
    if (p.kinds[j] != VarKind::NonNegative) continue;
    RationalVector c(2, Rational(0));
    c[j] = 1;
    lines.push_back({c, Sense::GreaterEq, Rational(0)});
  }
  std::optional<Rational> best;
  for (std::size_t a = 0; a < lines.size(); ++a) {
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      const auto& r = lines[a].coeffs;
      const auto& s = lines[b].coeffs;
      const Rational det = r[0] * s[1] - r[1] * s[0];
      if (det == 0) continue;
      const RationalVector x{(lines[a].rhs * s[1] - r[1] * lines[b].rhs) / det,
                             (r[0] * lines[b].rhs - lines[a].rhs * s[0]) / det};
      if (!verify_feasible(p, x)) continue;
      const Rational v = dot(p.objective, x);
      if (!best || v > *best) best = v;
    }
  }
  return best;
}

}  // namespace

TEST(Simplex, TextbookOptimum) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
  Problem p(2);
  p.objective = {q(3), q(5)};
  p.add_row({q(1), q(0)}, Sense::LessEq, q(4));
  p.add_row({q(0), q(2)}, Sense::LessEq, q(12));
  p.add_row({q(3), q(2)}, Sense::LessEq, q(18));
  for (PivotRule rule : {PivotRule::Bland, PivotRule::Dantzig}) {
    const Result r = solve(p, rule);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_EQ(r.value, 36);
    EXPECT_EQ(r.x, (RationalVector{q(2), q(6)}));
    EXPECT_TRUE(verify_optimal(p, r.x, r.dual));
  }
}

TEST(Simplex, UnboundedWithRay) {
  Problem p(2, VarKind::Free);
  p.objective = {q(1), q(1)};
  p.add_row({q(1), q(-1)}, Sense::LessEq, q(1));
  const Result r = solve(p);
  ASSERT_EQ(r.status, Status::Unbounded);
  EXPECT_TRUE(verify_ray(p, r.ray));
  EXPECT_TRUE(verify_feasible(p, r.x));
}

TEST(Simplex, InfeasibleWithFarkas) {
  Problem p(2);
  p.add_row({q(1), q(1)}, Sense::LessEq, q(1));
  p.add_row({q(1), q(1)}, Sense::GreaterEq, q(2));
  const Result r = solve(p);
  ASSERT_EQ(r.status, Status::Infeasible);
  EXPECT_TRUE(verify_farkas(p, r.farkas));
  EXPECT_FALSE(verify_farkas(p, RationalVector{q(0), q(0)}));
}

TEST(Simplex, EqualityAndFreeVariables) {
  // max x - y, x + y = 1, x - y <= 1/2, x, y free -> 1/2
  Problem p(2, VarKind::Free);
  p.objective = {q(1), q(-1)};
  p.add_row({q(1), q(1)}, Sense::Equal, q(1));
  p.add_row({q(1), q(-1)}, Sense::LessEq, q(1, 2));
  const Result r = solve(p);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_EQ(r.value, q(1, 2));
  EXPECT_TRUE(verify_optimal(p, r.x, r.dual));
}

TEST(Simplex, DegenerateCyclingExample) {
  // Beale's cycling example; Bland's rule must terminate at 1/20
  Problem p(4);
  p.objective = {q(3, 4), q(-150), q(1, 50), q(-6)};
  p.add_row({q(1, 4), q(-60), q(-1, 25), q(9)}, Sense::LessEq, q(0));
  p.add_row({q(1, 2), q(-90), q(-1, 50), q(3)}, Sense::LessEq, q(0));
  p.add_row({q(0), q(0), q(1), q(0)}, Sense::LessEq, q(1));
  for (PivotRule rule : {PivotRule::Bland, PivotRule::Dantzig}) {
    const Result r = solve(p, rule);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_EQ(r.value, q(1, 20));
  }
}

TEST(Simplex, RandomTwoVariableProblemsMatchVertexEnumeration) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<long> coef(-5, 5);
  int optimal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Problem p(2);
    p.objective = {q(coef(rng)), q(coef(rng))};
    const int rows = 2 + trial % 4;
    for (int i = 0; i < rows; ++i) p.add_row({q(coef(rng)), q(coef(rng))}, Sense::LessEq, q(coef(rng) + 5));
    // box keeps the problem bounded so the vertex oracle applies
    p.add_row({q(1), q(0)}, Sense::LessEq, q(10));
    p.add_row({q(0), q(1)}, Sense::LessEq, q(10));
    const Result bland = solve(p, PivotRule::Bland);
    const Result dantzig = solve(p, PivotRule::Dantzig);
    const auto oracle = brute_force_2d(p);
    ASSERT_EQ(bland.status, dantzig.status);
    if (!oracle) {
      EXPECT_EQ(bland.status, Status::Infeasible);
      EXPECT_TRUE(verify_farkas(p, bland.farkas));
      continue;
    }
    ASSERT_EQ(bland.status, Status::Optimal);
    EXPECT_EQ(bland.value, *oracle);
    EXPECT_EQ(dantzig.value, *oracle);
    EXPECT_TRUE(verify_optimal(p, bland.x, bland.dual));
    ++optimal;
  }
  EXPECT_GT(optimal, 100);
}

TEST(Simplex, StatusNames) {
  EXPECT_EQ(to_string(Status::Optimal), "optimal");
  EXPECT_EQ(to_string(Status::Unbounded), "unbounded");
  EXPECT_EQ(to_string(Status::Infeasible), "infeasible");
}
