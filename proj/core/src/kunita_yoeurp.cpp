#include <deflab/error.hpp>
#include <deflab/kunita_yoeurp.hpp>

#include <string>

namespace deflab {

std::size_t EnlargedSpace::slot(int zeta) const {
  if (zeta == kNever) return static_cast<std::size_t>(horizon());
  if (zeta < 1 || zeta > horizon()) throw ValidationError("death index outside {1..n, inf}");
  return static_cast<std::size_t>(zeta - 1);
}

int EnlargedSpace::zeta(std::size_t s) const {
  return s == static_cast<std::size_t>(horizon()) ? kNever : static_cast<int>(s) + 1;
}

const Rational& DominatingMeasure::mass(std::size_t leaf_index, int zeta) const {
  return q.at(leaf_index)[space.slot(zeta)];
}

Rational DominatingMeasure::total_mass() const {
  Rational total = 0;
  for (const auto& row : q) {
    for (const auto& m : row) total += m;
  }
  return total;
}

Rational DominatingMeasure::survival_mass(NodeId v) const {
  const EventTree& t = tree();
  const int k = t.time(v);
  const auto [lo, hi] = t.leaves_below(v);
  Rational m = 0;
  for (NodeId leaf = lo; leaf < hi; ++leaf) {
    const auto& row = q[t.leaf_index(leaf)];
    for (std::size_t s = static_cast<std::size_t>(k); s < row.size(); ++s) m += row[s];
  }
  return m;
}

Rational DominatingMeasure::death_mass(NodeId v, int j) const {
  const EventTree& t = tree();
  if (j < 1 || j > t.time(v)) throw ValidationError("death_mass: need 1 <= j <= time(v)");
  const auto [lo, hi] = t.leaves_below(v);
  Rational m = 0;
  for (NodeId leaf = lo; leaf < hi; ++leaf) m += q[t.leaf_index(leaf)][static_cast<std::size_t>(j - 1)];
  return m;
}

std::optional<Rational> DominatingMeasure::gamma_survival(NodeId v) const {
  const Rational m = survival_mass(v);
  if (m == 0) return std::nullopt;
  return P.atom_mass(v) / m;
}

std::optional<Rational> DominatingMeasure::gamma_dead(NodeId v, int j) const {
  if (death_mass(v, j) == 0) return std::nullopt;
  return Rational(0);
}

DominatingMeasure build_dominating_measure(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& Z) {
  if (!P.strictly_positive()) throw PreconditionError("dominating measure requires a strictly positive P");
  if (Z.dim() != 1 || Z.size() != tree.size()) throw ValidationError("deflator must be a scalar process on the tree");
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (Z.scalar_at(static_cast<NodeId>(i)) < 0) {
      throw PreconditionError("deflator is negative at node " + std::to_string(i));
    }
  }
  Rational mean0 = 0;
  for (NodeId v : tree.layer(0)) mean0 += P.atom_mass(v) * Z.scalar_at(v);
  if (mean0 != 1) {
    throw PreconditionError("normalization error: E[Z_0] = " + format_rational(mean0) + ", expected 1");
  }
  DoobDecomposition doob = doob_decomposition(tree, P, Z);
  for (std::size_t i = 0; i < tree.decision_count(); ++i) {
    if (doob.compensator_increment.scalar_at(static_cast<NodeId>(i)) < 0) {
      throw PreconditionError("not a supermartingale: negative compensator increment at node " + std::to_string(i));
    }
  }

  EnlargedSpace space{&tree};
  const int n = tree.horizon();
  std::vector<RationalVector> q(tree.leaf_count(), RationalVector(space.slots(), Rational(0)));
  for (NodeId leaf : tree.leaves()) {
    auto& row = q[tree.leaf_index(leaf)];
    const Rational& p = P.atom_mass(leaf);
    for (int j = 1; j <= n; ++j) {
      row[static_cast<std::size_t>(j - 1)] = p * doob.compensator_increment.scalar_at(tree.ancestor_at(leaf, j - 1));
    }
    row[static_cast<std::size_t>(n)] = p * Z.scalar_at(leaf);
  }
  return DominatingMeasure{space, P, Z, std::move(doob), std::move(q)};
}

KyReport verify_ky(const DominatingMeasure& dm, const std::vector<StoppingTime>& stopping_times) {
  const EventTree& tree = dm.tree();
  const int n = tree.horizon();
  KyReport r;
  r.no_death = true;
  for (NodeId v = 0; v < static_cast<NodeId>(tree.decision_count()); ++v) {
    r.no_death = r.no_death && dm.doob.compensator_increment.scalar_at(v) == 0;
  }

  const Rational total = dm.total_mass();
  r.mass_ok = total == 1;
  if (!r.mass_ok) r.failures.push_back({"mass", 0, 0, "sum of Q is " + format_rational(total)});

  // Pbar = P (x) delta_inf, materialized point by point
  std::vector<RationalVector> pbar(tree.leaf_count(), RationalVector(dm.space.slots(), Rational(0)));
  for (std::size_t l = 0; l < pbar.size(); ++l) pbar[l][static_cast<std::size_t>(n)] = dm.P.leaf_mass(l);

  Rational never = 0;
  for (const auto& row : pbar) never += row[static_cast<std::size_t>(n)];
  r.property1 = never == 1;
  if (!r.property1) r.failures.push_back({"1", 0, n, "Pbar(T = inf) = " + format_rational(never)});

  r.property2 = true;
  Rational expected_dead = 0;  // E_P[A_t]
  for (int t = 0; t <= n; ++t) {
    if (t >= 1) {
      for (NodeId v : tree.layer(t - 1)) {
        expected_dead += dm.P.atom_mass(v) * dm.doob.compensator_increment.scalar_at(v);
      }
    }
    Rational pbar_dead = 0;
    Rational q_dead = 0;
    for (std::size_t l = 0; l < pbar.size(); ++l) {
      for (int s = 0; s < t; ++s) {
        pbar_dead += pbar[l][static_cast<std::size_t>(s)];
        q_dead += dm.q[l][static_cast<std::size_t>(s)];
      }
    }
    if (pbar_dead != 0) {
      r.property2 = false;
      r.failures.push_back({"2", 0, t, "Pbar(zeta <= t) = " + format_rational(pbar_dead)});
    }
    if (q_dead != expected_dead) {
      r.property2 = false;
      r.failures.push_back({"2", 0, t,
                            "Q(T <= t) = " + format_rational(q_dead) + " but E_P[A_t] = " + format_rational(expected_dead)});
    }
  }

  r.property3 = true;
  for (int t = 0; t <= n; ++t) {
    for (NodeId v : tree.layer(t)) {
      const Rational lhs = dm.survival_mass(v);
      const Rational rhs = dm.P.atom_mass(v) * dm.Z.scalar_at(v);
      if (lhs != rhs) {
        r.property3 = false;
        r.failures.push_back({"3", v, t, "Q(A x {zeta > t}) = " + format_rational(lhs) + " but E_P[1_A Z_t] = " +
                                             format_rational(rhs)});
      }
    }
  }

  r.stopping_ok = true;
  for (const auto& tau : stopping_times) {
    ++r.stopping_times_checked;
    Rational lhs_total = 0;
    Rational rhs_total = 0;
    for (NodeId v : tau.stopped_nodes()) {
      const Rational lhs = dm.survival_mass(v);
      const Rational rhs = dm.P.atom_mass(v) * dm.Z.scalar_at(v);
      lhs_total += lhs;
      rhs_total += rhs;
      if (lhs != rhs) {
        r.stopping_ok = false;
        r.failures.push_back({"3-stopping", v, tree.time(v),
                              "Q(A, T > tau) = " + format_rational(lhs) + " but E_P[1_A Z_tau] = " + format_rational(rhs)});
      }
    }
    if (lhs_total != rhs_total) r.stopping_ok = false;
  }
  return r;
}

DominationReport check_domination(const DominatingMeasure& dm) {
  const EventTree& tree = dm.tree();
  DominationReport r;
  r.dominated = true;
  for (NodeId leaf : tree.leaves()) {
    const auto l = tree.leaf_index(leaf);
    for (std::size_t s = 0; s < dm.space.slots(); ++s) {
      ++r.atoms_checked;
      const Rational pbar = s == static_cast<std::size_t>(tree.horizon()) ? dm.P.leaf_mass(l) : Rational(0);
      if (dm.q[l][s] == 0 && pbar != 0) {
        r.dominated = false;
        r.offending.emplace_back(leaf, dm.space.zeta(s));
      }
    }
  }
  return r;
}

YoeurpResult yoeurp_expectation(const DominatingMeasure& dm, const Strategy& Y,
                                const std::optional<RationalVector>& survival) {
  const EventTree& tree = dm.tree();
  const int n = tree.horizon();
  if (Y.dim() != 1 || Y.size() != tree.decision_count()) throw ValidationError("Y must be a scalar predictable process");
  if (survival && survival->size() != tree.leaf_count()) throw ValidationError("survival value needs one entry per leaf");

  YoeurpResult out;
  for (NodeId leaf : tree.leaves()) {
    const auto l = tree.leaf_index(leaf);
    const Rational y_inf = survival ? (*survival)[l] : Y.scalar_at(tree.ancestor_at(leaf, n - 1));
    out.q_side += dm.q[l][static_cast<std::size_t>(n)] * y_inf;
    Rational integral = 0;
    for (int j = 1; j <= n; ++j) {
      const NodeId a = tree.ancestor_at(leaf, j - 1);
      out.q_side += dm.q[l][static_cast<std::size_t>(j - 1)] * Y.scalar_at(a);
      integral += Y.scalar_at(a) * dm.doob.compensator_increment.scalar_at(a);
    }
    out.p_side += dm.P.leaf_mass(l) * (y_inf * dm.Z.scalar_at(leaf) + integral);
  }
  if (out.q_side != out.p_side) {
    throw Error("Yoeurp identity mismatch: Q side " + format_rational(out.q_side) + ", P side " +
                format_rational(out.p_side));
  }
  return out;
}

YoeurpResult yoeurp_expectation_left(const DominatingMeasure& dm, const AdaptedProcess& Y) {
  const EventTree& tree = dm.tree();
  const int n = tree.horizon();
  if (Y.dim() != 1 || Y.size() != tree.size()) throw ValidationError("Y must be a scalar adapted process");

  YoeurpResult out;
  for (NodeId leaf : tree.leaves()) {
    const auto l = tree.leaf_index(leaf);
    out.q_side += dm.q[l][static_cast<std::size_t>(n)] * Y.scalar_at(leaf);
    Rational integral = 0;
    for (int j = 1; j <= n; ++j) {
      const NodeId a = tree.ancestor_at(leaf, j - 1);
      out.q_side += dm.q[l][static_cast<std::size_t>(j - 1)] * Y.scalar_at(a);
      integral += Y.scalar_at(a) * dm.doob.compensator_increment.scalar_at(a);
    }
    out.p_side += dm.P.leaf_mass(l) * (Y.scalar_at(leaf) * dm.Z.scalar_at(leaf) + integral);
  }
  if (out.q_side != out.p_side) {
    throw Error("Yoeurp identity mismatch: Q side " + format_rational(out.q_side) + ", P side " +
                format_rational(out.p_side));
  }
  return out;
}

StoppedPriceReport check_stopped_price(const DominatingMeasure& dm, const AdaptedProcess& S) {
  const EventTree& tree = dm.tree();
  if (S.size() != tree.size()) throw ValidationError("price process does not match the tree");
  const auto d = static_cast<std::size_t>(S.dim());
  StoppedPriceReport r;
  r.martingale = true;
  for (int k = 0; k < tree.horizon(); ++k) {
    for (NodeId v : tree.layer(k)) {
      // dead atoms: S^{T-} is frozen, zero increment
      for (int j = 1; j <= k; ++j) {
        if (dm.death_mass(v, j) > 0) ++r.atoms_checked;
      }
      const Rational m = dm.survival_mass(v);
      if (m == 0) continue;
      ++r.atoms_checked;
      RationalVector drift(d, Rational(0));
      for (NodeId c : tree.children(v)) {
        const Rational mc = dm.survival_mass(c);
        if (mc == 0) continue;
        for (std::size_t i = 0; i < d; ++i) drift[i] += mc * (S.at(c)[i] - S.at(v)[i]);
      }
      bool zero = true;
      for (auto& x : drift) {
        x /= m;
        if (x != 0) zero = false;
      }
      if (!zero) {
        r.martingale = false;
        r.violations.push_back({v, k, std::move(drift)});
      }
    }
  }

  RationalVector ztilde(tree.size(), Rational(0));
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto g = dm.gamma_survival(static_cast<NodeId>(i));
    if (g && *g != 0) ztilde[i] = 1 / *g;
  }
  const AdaptedProcess Zt = AdaptedProcess::scalar(tree, std::move(ztilde));
  const WealthProblem problem{tree, dm.P, S};
  r.converse = verify_deflation(problem, Zt, 16, 0x5eed);
  r.converse_deflator = r.converse.ok();
  return r;
}

}  // namespace deflab
