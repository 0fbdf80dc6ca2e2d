#pragma once

#include <deflab/filtered_space.hpp>
#include <deflab/lp.hpp>

#include <optional>
#include <vector>

namespace deflab {

/// A price process on a tree under a strictly positive measure. The wealth
/// family is W1 = {1 + (H.S) : 1 + (H.S)_k >= 0 at every node}.
struct WealthProblem {
  const EventTree& tree;
  const ProbMeasure& P;
  const AdaptedProcess& S;

  /// Throws ValidationError on shape mismatch or a non-strictly-positive P.
  void validate() const;
};

struct ArbitrageReport {
  bool na_checked = false;
  bool na_holds = false;
  Rational na_optimum;               // sum of terminal gains at the LP optimum
  std::optional<Strategy> arbitrage;  // gains >= 0 everywhere, > 0 on some leaf

  bool na1_checked = false;
  bool na1_holds = false;
  std::optional<Rational> optimal_value;  // sup E[1 + (H.S)_n]; empty means +infinity
  std::optional<Strategy> optimal_strategy;
  std::optional<Strategy> unbounded_ray;  // admissible direction with E[(d.S)_n] > 0

  std::size_t pivots = 0;
};

/// Linear map from strategy coordinates to gains: (H.S)(v) = row(v) . x where
/// x[v * d + c] = H(v)[c] for decision nodes v.
class GainMap {
 public:
  GainMap(const EventTree& tree, const AdaptedProcess& S);

  std::size_t num_vars() const { return vars_; }
  RationalVector row(NodeId v) const;
  Strategy to_strategy(const EventTree& tree, const RationalVector& x) const;

 private:
  std::size_t vars_ = 0;
  int dim_ = 1;
  std::vector<std::vector<std::pair<std::size_t, Rational>>> rows_;
};

/// maximize sum over leaves of (H.S)_n s.t. (H.S)_k >= 0 everywhere, |H| <= 1.
ArbitrageReport check_na(const WealthProblem& problem, lp::PivotRule rule = lp::PivotRule::Bland);

/// maximize E[1 + (H.S)_n] over 1-admissible H (free holdings).
ArbitrageReport check_na1(const WealthProblem& problem, lp::PivotRule rule = lp::PivotRule::Bland);

ArbitrageReport check_both(const WealthProblem& problem, lp::PivotRule rule = lp::PivotRule::Bland);

/// Independent checks of report witnesses.
bool is_admissible(const EventTree& tree, const AdaptedProcess& S, const Strategy& H);
bool is_arbitrage(const WealthProblem& problem, const Strategy& H);
bool is_unbounded_ray(const WealthProblem& problem, const Strategy& d);

/// Concave piecewise-linear utility on [0, inf) with U(0) = 0: slope
/// slopes[j] on [breaks[j], breaks[j+1]), the last slope continuing to
/// infinity. breaks[0] must be 0 and slopes must be nonincreasing.
class PiecewiseLinearUtility {
 public:
  PiecewiseLinearUtility(RationalVector breaks, RationalVector slopes);

  /// Unit-spaced breaks 0, 1, 2, ... with the given slopes.
  static PiecewiseLinearUtility unit_steps(RationalVector slopes);

  Rational operator()(const Rational& x) const;

  /// U(x) = min_j (intercept_j + slope_j x) on x >= 0.
  const RationalVector& intercepts() const { return intercepts_; }
  const RationalVector& slopes() const { return slopes_; }
  const RationalVector& breaks() const { return breaks_; }

 private:
  RationalVector breaks_;
  RationalVector slopes_;
  RationalVector intercepts_;
};

struct UtilityValue {
  std::optional<Rational> value;  // empty means +infinity
  std::optional<Strategy> strategy;
};

/// sup E[U(X)] over X in K1, solved exactly as one LP over (H, u_leaf) with
/// u_leaf <= intercept_j + slope_j X_leaf.
UtilityValue finite_utility_check(const WealthProblem& problem, const PiecewiseLinearUtility& U,
                                  lp::PivotRule rule = lp::PivotRule::Bland);

}  // namespace deflab
