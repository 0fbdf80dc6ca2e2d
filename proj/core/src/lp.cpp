#include <deflab/error.hpp>
#include <deflab/lp.hpp>

#include <optional>

namespace deflab::lp {

Problem::Problem(std::size_t num_vars, VarKind kind) : kinds(num_vars, kind), objective(num_vars, Rational(0)) {}

void Problem::add_row(RationalVector coeffs, Sense sense, Rational rhs) {
  if (coeffs.size() != num_vars()) throw ValidationError("lp: row has wrong number of coefficients");
  rows.push_back({std::move(coeffs), sense, std::move(rhs)});
}

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Unbounded: return "unbounded";
    case Status::Infeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

class Tableau {
 public:
  Tableau(const Problem& p, PivotRule rule) : problem_(p), rule_(rule) {
    const std::size_t n = p.num_vars();
    m_ = p.rows.size();
    pos_col_.resize(n);
    neg_col_.assign(n, -1);
    int cols = 0;
    for (std::size_t j = 0; j < n; ++j) {
      pos_col_[j] = cols++;
      if (p.kinds[j] == VarKind::Free) neg_col_[j] = cols++;
    }
    structural_ = cols;

    negated_.assign(m_, false);
    std::vector<Sense> sense(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      sense[i] = p.rows[i].sense;
      if (p.rows[i].rhs < 0) {
        negated_[i] = true;
        if (sense[i] == Sense::LessEq) sense[i] = Sense::GreaterEq;
        else if (sense[i] == Sense::GreaterEq) sense[i] = Sense::LessEq;
      }
    }
    // slack or surplus columns, then artificials
    std::vector<int> slack(m_, -1);
    for (std::size_t i = 0; i < m_; ++i) {
      if (sense[i] != Sense::Equal) slack[i] = cols++;
    }
    init_col_.assign(m_, -1);
    for (std::size_t i = 0; i < m_; ++i) {
      if (sense[i] == Sense::LessEq) init_col_[i] = slack[i];
    }
    first_art_ = cols;
    for (std::size_t i = 0; i < m_; ++i) {
      if (sense[i] != Sense::LessEq) init_col_[i] = cols++;
    }
    ncols_ = cols;

    t_.assign(m_, RationalVector(static_cast<std::size_t>(ncols_), Rational(0)));
    b_.resize(m_);
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const Rational sign = negated_[i] ? -1 : 1;
      auto& row = t_[i];
      for (std::size_t j = 0; j < n; ++j) {
        const Rational& a = p.rows[i].coeffs[j];
        if (a == 0) continue;
        row[static_cast<std::size_t>(pos_col_[j])] = sign * a;
        if (neg_col_[j] >= 0) row[static_cast<std::size_t>(neg_col_[j])] = -sign * a;
      }
      if (slack[i] >= 0) row[static_cast<std::size_t>(slack[i])] = sense[i] == Sense::LessEq ? 1 : -1;
      row[static_cast<std::size_t>(init_col_[i])] = 1;
      b_[i] = sign * p.rows[i].rhs;
      basis_[i] = init_col_[i];
    }
  }

  Result run() {
    Result result;
    // phase I: maximize -sum(artificials)
    z_.assign(static_cast<std::size_t>(ncols_), Rational(0));
    zval_ = 0;
    bool any_art = false;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!is_art(basis_[i])) continue;
      any_art = true;
      for (int j = 0; j < first_art_; ++j) z_[static_cast<std::size_t>(j)] += t_[i][static_cast<std::size_t>(j)];
      zval_ -= b_[i];
    }
    if (any_art) {
      simplex(true);
      if (zval_ < 0) {
        result.status = Status::Infeasible;
        result.farkas.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
          const int c = init_col_[i];
          const Rational cost = is_art(c) ? Rational(-1) : Rational(0);
          Rational y = cost - z_[static_cast<std::size_t>(c)];
          result.farkas[i] = negated_[i] ? Rational(-y) : y;
        }
        result.pivots = pivots_;
        return result;
      }
      drive_out_artificials();
    }

    // phase II
    std::vector<Rational> cost(static_cast<std::size_t>(ncols_), Rational(0));
    for (std::size_t j = 0; j < problem_.num_vars(); ++j) {
      cost[static_cast<std::size_t>(pos_col_[j])] = problem_.objective[j];
      if (neg_col_[j] >= 0) cost[static_cast<std::size_t>(neg_col_[j])] = -problem_.objective[j];
    }
    z_ = cost;
    zval_ = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      const Rational& cb = cost[static_cast<std::size_t>(basis_[i])];
      if (cb == 0) continue;
      for (int j = 0; j < ncols_; ++j) {
        const Rational& a = t_[i][static_cast<std::size_t>(j)];
        if (a != 0) z_[static_cast<std::size_t>(j)] -= cb * a;
      }
      zval_ += cb * b_[i];
    }
    const std::optional<int> unbounded_col = simplex(false);
    result.x = primal();
    result.pivots = pivots_;
    if (unbounded_col) {
      result.status = Status::Unbounded;
      std::vector<Rational> d(static_cast<std::size_t>(ncols_), Rational(0));
      d[static_cast<std::size_t>(*unbounded_col)] = 1;
      for (std::size_t i = 0; i < m_; ++i) {
        d[static_cast<std::size_t>(basis_[i])] = -t_[i][static_cast<std::size_t>(*unbounded_col)];
      }
      result.ray = to_original(d);
      return result;
    }
    result.status = Status::Optimal;
    result.value = zval_;
    result.dual.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      Rational y = -z_[static_cast<std::size_t>(init_col_[i])];
      result.dual[i] = negated_[i] ? Rational(-y) : y;
    }
    return result;
  }

 private:
  bool is_art(int col) const { return col >= first_art_; }

  void pivot(std::size_t r, int e) {
    const auto ec = static_cast<std::size_t>(e);
    auto& prow = t_[r];
    const Rational inv = 1 / prow[ec];
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j < prow.size(); ++j) {
      if (prow[j] != 0) {
        prow[j] *= inv;
        nz.push_back(j);
      }
    }
    b_[r] *= inv;
    Rational f;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || t_[i][ec] == 0) continue;
      f = t_[i][ec];
      auto& row = t_[i];
      for (std::size_t j : nz) row[j] -= f * prow[j];
      b_[i] -= f * b_[r];
    }
    if (z_[ec] != 0) {
      f = z_[ec];
      for (std::size_t j : nz) z_[j] -= f * prow[j];
      zval_ += f * b_[r];
    }
    basis_[r] = e;
    ++pivots_;
  }

  // Returns the entering column of an unbounded direction, if any.
  std::optional<int> simplex(bool phase_one) {
    const int limit = phase_one ? ncols_ : first_art_;
    bool bland = rule_ == PivotRule::Bland;
    std::size_t degenerate_streak = 0;
    const std::size_t stall_limit = 2 * (m_ + static_cast<std::size_t>(ncols_)) + 8;
    for (;;) {
      int e = -1;
      for (int j = 0; j < limit; ++j) {
        const Rational& rj = z_[static_cast<std::size_t>(j)];
        if (rj <= 0) continue;
        if (bland) {
          e = j;
          break;
        }
        if (e < 0 || rj > z_[static_cast<std::size_t>(e)]) e = j;
      }
      if (e < 0) return std::nullopt;

      const auto ec = static_cast<std::size_t>(e);
      std::optional<std::size_t> leave;
      Rational best;
      Rational ratio;
      for (std::size_t i = 0; i < m_; ++i) {
        const Rational& a = t_[i][ec];
        if (a <= 0) continue;
        ratio = b_[i] / a;
        if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) return e;
      if (best == 0) {
        if (++degenerate_streak > stall_limit) bland = true;
      } else {
        degenerate_streak = 0;
      }
      pivot(*leave, e);
    }
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!is_art(basis_[i])) continue;
      for (int j = 0; j < first_art_; ++j) {
        if (t_[i][static_cast<std::size_t>(j)] != 0) {
          pivot(i, j);
          break;
        }
      }
      // a row with no structural entry left is redundant and stays at zero
    }
  }

  RationalVector primal() const {
    std::vector<Rational> v(static_cast<std::size_t>(ncols_), Rational(0));
    for (std::size_t i = 0; i < m_; ++i) v[static_cast<std::size_t>(basis_[i])] = b_[i];
    return to_original(v);
  }

  RationalVector to_original(const std::vector<Rational>& v) const {
    RationalVector x(problem_.num_vars());
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] = v[static_cast<std::size_t>(pos_col_[j])];
      if (neg_col_[j] >= 0) x[j] -= v[static_cast<std::size_t>(neg_col_[j])];
    }
    return x;
  }

  const Problem& problem_;
  PivotRule rule_;
  std::size_t m_ = 0;
  int structural_ = 0;
  int first_art_ = 0;
  int ncols_ = 0;
  std::vector<int> pos_col_;
  std::vector<int> neg_col_;
  std::vector<bool> negated_;
  std::vector<int> init_col_;
  std::vector<RationalVector> t_;
  RationalVector b_;
  std::vector<int> basis_;
  RationalVector z_;
  Rational zval_;
  std::size_t pivots_ = 0;
};

void check_shape(const Problem& p) {
  if (p.objective.size() != p.num_vars()) throw ValidationError("lp: objective has wrong length");
  for (const auto& row : p.rows) {
    if (row.coeffs.size() != p.num_vars()) throw ValidationError("lp: row has wrong number of coefficients");
  }
}

Rational row_dot(const Row& row, const RationalVector& x) {
  Rational s = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (row.coeffs[j] != 0) s += row.coeffs[j] * x[j];
  }
  return s;
}

bool sign_ok(Sense sense, const Rational& y) {
  switch (sense) {
    case Sense::LessEq: return y >= 0;
    case Sense::GreaterEq: return y <= 0;
    case Sense::Equal: return true;
  }
  return false;
}

Rational column_dot(const Problem& p, const RationalVector& y, std::size_t j) {
  Rational s = 0;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    if (y[i] != 0) s += y[i] * p.rows[i].coeffs[j];
  }
  return s;
}

}  // namespace

Result solve(const Problem& problem, PivotRule rule) {
  check_shape(problem);
  Tableau tableau(problem, rule);
  return tableau.run();
}

bool verify_feasible(const Problem& p, const RationalVector& x) {
  if (x.size() != p.num_vars()) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (p.kinds[j] == VarKind::NonNegative && x[j] < 0) return false;
  }
  for (const auto& row : p.rows) {
    const Rational lhs = row_dot(row, x);
    switch (row.sense) {
      case Sense::LessEq:
        if (lhs > row.rhs) return false;
        break;
      case Sense::GreaterEq:
        if (lhs < row.rhs) return false;
        break;
      case Sense::Equal:
        if (lhs != row.rhs) return false;
        break;
    }
  }
  return true;
}

bool verify_optimal(const Problem& p, const RationalVector& x, const RationalVector& y) {
  if (!verify_feasible(p, x) || y.size() != p.rows.size()) return false;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!sign_ok(p.rows[i].sense, y[i])) return false;
  }
  Rational yb = 0;
  for (std::size_t i = 0; i < y.size(); ++i) yb += y[i] * p.rows[i].rhs;
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    const Rational ya = column_dot(p, y, j);
    if (p.kinds[j] == VarKind::Free ? ya != p.objective[j] : ya < p.objective[j]) return false;
  }
  return dot(p.objective, x) == yb;
}

bool verify_ray(const Problem& p, const RationalVector& d) {
  if (d.size() != p.num_vars()) return false;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (p.kinds[j] == VarKind::NonNegative && d[j] < 0) return false;
  }
  for (const auto& row : p.rows) {
    const Rational lhs = row_dot(row, d);
    if (row.sense == Sense::LessEq && lhs > 0) return false;
    if (row.sense == Sense::GreaterEq && lhs < 0) return false;
    if (row.sense == Sense::Equal && lhs != 0) return false;
  }
  return dot(p.objective, d) > 0;
}

bool verify_farkas(const Problem& p, const RationalVector& y) {
  if (y.size() != p.rows.size()) return false;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!sign_ok(p.rows[i].sense, y[i])) return false;
  }
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    const Rational ya = column_dot(p, y, j);
    if (p.kinds[j] == VarKind::Free ? ya != 0 : ya < 0) return false;
  }
  Rational yb = 0;
  for (std::size_t i = 0; i < y.size(); ++i) yb += y[i] * p.rows[i].rhs;
  return yb < 0;
}

}  // namespace deflab::lp
