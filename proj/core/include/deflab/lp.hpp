#pragma once

#include <deflab/rational.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace deflab::lp {

enum class Sense { LessEq, GreaterEq, Equal };
enum class VarKind { NonNegative, Free };
enum class Status { Optimal, Unbounded, Infeasible };

enum class PivotRule {
  Bland,    // smallest eligible index; never cycles
  Dantzig,  // largest reduced profit, falls back to Bland on degenerate stalls
};

struct Row {
  RationalVector coeffs;
  Sense sense = Sense::LessEq;
  Rational rhs;
};

/// maximize c.x subject to rows, with per-variable sign restrictions.
struct Problem {
  std::vector<VarKind> kinds;
  RationalVector objective;
  std::vector<Row> rows;

  explicit Problem(std::size_t num_vars, VarKind kind = VarKind::NonNegative);

  std::size_t num_vars() const { return kinds.size(); }
  void add_row(RationalVector coeffs, Sense sense, Rational rhs);
};

struct Result {
  Status status = Status::Infeasible;
  Rational value;        // optimum (Optimal only)
  RationalVector x;      // optimal point, or a feasible point when Unbounded
  RationalVector dual;   // optimal dual multipliers, one per row (Optimal only)
  RationalVector ray;    // improving recession direction (Unbounded only)
  RationalVector farkas; // infeasibility certificate, one per row (Infeasible only)
  std::size_t pivots = 0;
};

/// Exact two-phase dense simplex.
Result solve(const Problem& problem, PivotRule rule = PivotRule::Bland);

std::string to_string(Status status);

// Independent certificate checks; none of them reuse solver state.

/// x satisfies every row and sign restriction.
bool verify_feasible(const Problem& problem, const RationalVector& x);

/// x feasible, y dual feasible, and c.x == y.b.
bool verify_optimal(const Problem& problem, const RationalVector& x, const RationalVector& y);

/// d is a recession direction of the feasible set with c.d > 0.
bool verify_ray(const Problem& problem, const RationalVector& d);

/// y proves the row system has no solution: y.A_j >= 0 on nonnegative
/// columns, y.A_j == 0 on free columns, y_i >= 0 on <= rows, y_i <= 0 on >=
/// rows, and y.b < 0.
bool verify_farkas(const Problem& problem, const RationalVector& y);

}  // namespace deflab::lp
