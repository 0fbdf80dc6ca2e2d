#include <deflab/arbitrage.hpp>
#include <deflab/error.hpp>

#include <string>

namespace deflab {

void WealthProblem::validate() const {
  if (S.size() != tree.size()) throw ValidationError("price process does not match the tree");
  if (S.dim() != tree.asset_dim()) {
    throw ValidationError("price process has dimension " + std::to_string(S.dim()) + " but the tree declares " +
                          std::to_string(tree.asset_dim()) + " assets");
  }
  if (P.leaf_masses().size() != tree.leaf_count()) throw ValidationError("measure does not match the tree");
  if (!P.strictly_positive()) {
    throw ValidationError("arbitrage checks require a strictly positive measure (null leaves change the constraint set)");
  }
}

GainMap::GainMap(const EventTree& tree, const AdaptedProcess& S) : dim_(S.dim()) {
  if (S.size() != tree.size()) throw ValidationError("price process does not match the tree");
  const auto d = static_cast<std::size_t>(dim_);
  vars_ = tree.decision_count() * d;
  rows_.resize(tree.size());
  for (std::size_t i = 1; i < tree.size(); ++i) {
    const NodeId v = static_cast<NodeId>(i);
    const NodeId p = *tree.parent(v);
    auto row = rows_[static_cast<std::size_t>(p)];
    for (std::size_t c = 0; c < d; ++c) {
      Rational delta = S.at(v)[c] - S.at(p)[c];
      if (delta != 0) row.emplace_back(static_cast<std::size_t>(p) * d + c, std::move(delta));
    }
    rows_[i] = std::move(row);
  }
}

RationalVector GainMap::row(NodeId v) const {
  RationalVector dense(vars_, Rational(0));
  for (const auto& [j, a] : rows_[static_cast<std::size_t>(v)]) dense[j] = a;
  return dense;
}

Strategy GainMap::to_strategy(const EventTree& tree, const RationalVector& x) const {
  const auto d = static_cast<std::size_t>(dim_);
  std::vector<RationalVector> steps(tree.decision_count(), RationalVector(d));
  for (std::size_t v = 0; v < steps.size(); ++v) {
    for (std::size_t c = 0; c < d; ++c) steps[v][c] = x[v * d + c];
  }
  return Strategy(tree, dim_, std::move(steps));
}

namespace {

RationalVector expected_terminal_row(const WealthProblem& problem, const GainMap& gains) {
  RationalVector obj(gains.num_vars(), Rational(0));
  for (NodeId leaf : problem.tree.leaves()) {
    const Rational& p = problem.P.atom_mass(leaf);
    const RationalVector r = gains.row(leaf);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (r[j] != 0) obj[j] += p * r[j];
    }
  }
  return obj;
}

}  // namespace

ArbitrageReport check_na(const WealthProblem& problem, lp::PivotRule rule) {
  problem.validate();
  const EventTree& tree = problem.tree;
  const GainMap gains(tree, problem.S);
  const std::size_t n = gains.num_vars();

  lp::Problem lp(n, lp::VarKind::Free);
  for (NodeId leaf : tree.leaves()) {
    const RationalVector r = gains.row(leaf);
    for (std::size_t j = 0; j < n; ++j) lp.objective[j] += r[j];
  }
  for (std::size_t i = 1; i < tree.size(); ++i) lp.add_row(gains.row(static_cast<NodeId>(i)), lp::Sense::GreaterEq, 0);
  for (std::size_t j = 0; j < n; ++j) {
    RationalVector e(n, Rational(0));
    e[j] = 1;
    lp.add_row(e, lp::Sense::LessEq, 1);
    lp.add_row(std::move(e), lp::Sense::GreaterEq, -1);
  }

  const lp::Result res = lp::solve(lp, rule);
  if (res.status != lp::Status::Optimal) throw Error("NA linear program is not bounded; solver bug");
  ArbitrageReport report;
  report.na_checked = true;
  report.pivots = res.pivots;
  report.na_optimum = res.value;
  report.na_holds = res.value == 0;
  if (!report.na_holds) {
    report.arbitrage = gains.to_strategy(tree, res.x);
    if (!is_arbitrage(problem, *report.arbitrage)) throw Error("NA witness failed verification");
  }
  return report;
}

ArbitrageReport check_na1(const WealthProblem& problem, lp::PivotRule rule) {
  problem.validate();
  const EventTree& tree = problem.tree;
  const GainMap gains(tree, problem.S);

  lp::Problem lp(gains.num_vars(), lp::VarKind::Free);
  lp.objective = expected_terminal_row(problem, gains);
  for (std::size_t i = 1; i < tree.size(); ++i) lp.add_row(gains.row(static_cast<NodeId>(i)), lp::Sense::GreaterEq, -1);

  const lp::Result res = lp::solve(lp, rule);
  ArbitrageReport report;
  report.na1_checked = true;
  report.pivots = res.pivots;
  if (res.status == lp::Status::Infeasible) throw Error("NA1 linear program infeasible although H = 0 is feasible");
  if (res.status == lp::Status::Unbounded) {
    report.na1_holds = false;
    report.unbounded_ray = gains.to_strategy(tree, res.ray);
    if (!is_unbounded_ray(problem, *report.unbounded_ray)) throw Error("NA1 ray failed verification");
    return report;
  }
  if (!lp::verify_optimal(lp, res.x, res.dual)) throw Error("NA1 optimum failed its dual certificate");
  report.na1_holds = true;
  report.optimal_value = 1 + res.value;
  report.optimal_strategy = gains.to_strategy(tree, res.x);
  return report;
}

ArbitrageReport check_both(const WealthProblem& problem, lp::PivotRule rule) {
  ArbitrageReport a = check_na(problem, rule);
  ArbitrageReport b = check_na1(problem, rule);
  b.na_checked = true;
  b.na_holds = a.na_holds;
  b.na_optimum = a.na_optimum;
  b.arbitrage = std::move(a.arbitrage);
  b.pivots += a.pivots;
  return b;
}

bool is_admissible(const EventTree& tree, const AdaptedProcess& S, const Strategy& H) {
  const AdaptedProcess g = stochastic_integral(tree, S, H);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (g.scalar_at(static_cast<NodeId>(i)) < -1) return false;
  }
  return true;
}

bool is_arbitrage(const WealthProblem& problem, const Strategy& H) {
  const AdaptedProcess g = stochastic_integral(problem.tree, problem.S, H);
  bool strict = false;
  for (std::size_t i = 0; i < problem.tree.size(); ++i) {
    if (g.scalar_at(static_cast<NodeId>(i)) < 0) return false;
  }
  for (NodeId leaf : problem.tree.leaves()) {
    if (g.scalar_at(leaf) > 0 && problem.P.atom_mass(leaf) > 0) strict = true;
  }
  return strict;
}

bool is_unbounded_ray(const WealthProblem& problem, const Strategy& d) {
  const AdaptedProcess g = stochastic_integral(problem.tree, problem.S, d);
  for (std::size_t i = 0; i < problem.tree.size(); ++i) {
    if (g.scalar_at(static_cast<NodeId>(i)) < 0) return false;
  }
  Rational mean = 0;
  for (NodeId leaf : problem.tree.leaves()) mean += problem.P.atom_mass(leaf) * g.scalar_at(leaf);
  return mean > 0;
}

PiecewiseLinearUtility::PiecewiseLinearUtility(RationalVector breaks, RationalVector slopes)
    : breaks_(std::move(breaks)), slopes_(std::move(slopes)) {
  if (breaks_.empty() || breaks_.size() != slopes_.size()) {
    throw ValidationError("utility needs one slope per break point");
  }
  if (breaks_[0] != 0) throw ValidationError("utility break points must start at 0");
  intercepts_.resize(slopes_.size());
  Rational value_at_break = 0;
  for (std::size_t j = 0; j < slopes_.size(); ++j) {
    if (slopes_[j] < 0) throw ValidationError("utility slopes must be nonnegative");
    if (j > 0) {
      if (breaks_[j] <= breaks_[j - 1]) throw ValidationError("utility break points must increase");
      if (slopes_[j] > slopes_[j - 1]) throw ValidationError("utility slopes must be nonincreasing (concavity)");
      value_at_break += slopes_[j - 1] * (breaks_[j] - breaks_[j - 1]);
    }
    intercepts_[j] = value_at_break - slopes_[j] * breaks_[j];
  }
}

PiecewiseLinearUtility PiecewiseLinearUtility::unit_steps(RationalVector slopes) {
  RationalVector breaks(slopes.size());
  for (std::size_t j = 0; j < breaks.size(); ++j) breaks[j] = static_cast<long>(j);
  return PiecewiseLinearUtility(std::move(breaks), std::move(slopes));
}

Rational PiecewiseLinearUtility::operator()(const Rational& x) const {
  if (x < 0) throw ValidationError("utility evaluated at a negative wealth");
  Rational best = intercepts_[0] + slopes_[0] * x;
  for (std::size_t j = 1; j < slopes_.size(); ++j) {
    Rational v = intercepts_[j] + slopes_[j] * x;
    if (v < best) best = std::move(v);
  }
  return best;
}

UtilityValue finite_utility_check(const WealthProblem& problem, const PiecewiseLinearUtility& U, lp::PivotRule rule) {
  problem.validate();
  const EventTree& tree = problem.tree;
  const GainMap gains(tree, problem.S);
  const std::size_t h = gains.num_vars();
  const std::size_t leaves = tree.leaf_count();
  const std::size_t n = h + leaves;

  lp::Problem lp(n, lp::VarKind::Free);
  for (std::size_t l = 0; l < leaves; ++l) lp.objective[h + l] = problem.P.leaf_mass(l);
  for (std::size_t i = 1; i < tree.size(); ++i) {
    RationalVector row = gains.row(static_cast<NodeId>(i));
    row.resize(n, Rational(0));
    lp.add_row(std::move(row), lp::Sense::GreaterEq, -1);
  }
  for (std::size_t l = 0; l < leaves; ++l) {
    const RationalVector g = gains.row(tree.first_leaf() + static_cast<NodeId>(l));
    for (std::size_t j = 0; j < U.slopes().size(); ++j) {
      const Rational& s = U.slopes()[j];
      RationalVector row(n, Rational(0));
      for (std::size_t k = 0; k < h; ++k) {
        if (g[k] != 0) row[k] = -s * g[k];
      }
      row[h + l] = 1;
      lp.add_row(std::move(row), lp::Sense::LessEq, U.intercepts()[j] + s);
    }
  }

  const lp::Result res = lp::solve(lp, rule);
  UtilityValue out;
  if (res.status == lp::Status::Unbounded) return out;
  if (res.status != lp::Status::Optimal) throw Error("utility linear program infeasible; solver bug");
  if (!lp::verify_optimal(lp, res.x, res.dual)) throw Error("utility optimum failed its dual certificate");
  out.value = res.value;
  out.strategy = gains.to_strategy(tree, RationalVector(res.x.begin(), res.x.begin() + static_cast<long>(h)));
  return out;
}

}  // namespace deflab
