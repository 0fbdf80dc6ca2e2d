#include <deflab/enlargement.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

namespace deflab {

EnlargementSpec::EnlargementSpec(const EventTree& base, const ProbMeasure& P, std::vector<std::string> leaf_labels)
    : base_(&base), P_(&P) {
  if (leaf_labels.size() != base.leaf_count()) {
    throw ValidationError("label map must give one label per leaf (" + std::to_string(base.leaf_count()) +
                          " leaves, " + std::to_string(leaf_labels.size()) + " labels)");
  }
  names_ = leaf_labels;
  std::sort(names_.begin(), names_.end());
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
  for (const auto& label : leaf_labels) {
    if (label.empty()) throw ValidationError("label map: empty label");
    leaf_label_.push_back(static_cast<int>(std::lower_bound(names_.begin(), names_.end(), label) - names_.begin()));
  }

  const std::size_t m = names_.size();
  joint_.assign(base.size(), RationalVector(m, Rational(0)));
  present_.assign(base.size(), std::vector<bool>(m, false));
  for (std::size_t i = 0; i < base.leaf_count(); ++i) {
    const NodeId leaf = base.first_leaf() + static_cast<NodeId>(i);
    const auto l = static_cast<std::size_t>(leaf_label_[i]);
    for (int k = 0; k <= base.horizon(); ++k) {
      const auto a = static_cast<std::size_t>(base.ancestor_at(leaf, k));
      joint_[a][l] += P.leaf_mass(i);
      present_[a][l] = true;
    }
  }
}

const Rational& EnlargementSpec::joint_mass(NodeId v, int label) const {
  return joint_[static_cast<std::size_t>(v)][static_cast<std::size_t>(label)];
}

const Rational& EnlargementSpec::label_mass(int label) const { return joint_mass(0, label); }

bool EnlargementSpec::label_present(NodeId v, int label) const {
  return present_[static_cast<std::size_t>(v)][static_cast<std::size_t>(label)];
}

AdaptedProcess GTree::lift(const AdaptedProcess& X) const {
  std::vector<RationalVector> values;
  values.reserve(tree.size());
  for (std::size_t g = 0; g < tree.size(); ++g) values.push_back(X.at(f_node[g]));
  return AdaptedProcess(tree, X.dim(), std::move(values));
}

int GTree::f_time(NodeId g) const { return std::max(0, tree.time(g) - 1); }

GTree build_g_tree(const EnlargementSpec& spec) {
  const EventTree& base = spec.base();
  const int labels = static_cast<int>(spec.label_count());

  std::vector<NodeRecord> records{{0, 0, std::nullopt}};
  std::vector<NodeId> f_node{0};
  std::vector<int> label{-1};
  for (int l = 0; l < labels; ++l) {
    if (spec.joint_mass(0, l) > 0) {
      records.push_back({static_cast<NodeId>(records.size()), 1, NodeId{0}});
      f_node.push_back(0);
      label.push_back(l);
    }
  }
  std::size_t begin = 1;
  for (int t = 1; t <= base.horizon(); ++t) {
    const std::size_t end = records.size();
    for (std::size_t g = begin; g < end; ++g) {
      for (NodeId c : base.children(f_node[g])) {
        if (spec.joint_mass(c, label[g]) > 0) {
          records.push_back({static_cast<NodeId>(records.size()), t + 1, static_cast<NodeId>(g)});
          f_node.push_back(c);
          label.push_back(label[g]);
        }
      }
    }
    begin = end;
  }

  EventTree tree(base.asset_dim(), std::move(records));
  RationalVector leaf_mass;
  std::vector<NodeId> base_leaf_of;
  for (NodeId g : tree.leaves()) {
    const auto gi = static_cast<std::size_t>(g);
    leaf_mass.push_back(spec.joint_mass(f_node[gi], label[gi]));
    base_leaf_of.push_back(f_node[gi]);
  }
  ProbMeasure P(tree, std::move(leaf_mass));
  return GTree{std::move(tree), std::move(P), std::move(f_node), std::move(label), std::move(base_leaf_of)};
}

JacodReport jacod_check(const EnlargementSpec& spec) {
  const EventTree& base = spec.base();
  const std::size_t m = spec.label_count();
  JacodReport r;
  for (std::size_t l = 0; l < m; ++l) r.P_L.push_back(spec.label_mass(static_cast<int>(l)));
  for (std::size_t i = 0; i < base.size(); ++i) {
    const NodeId v = static_cast<NodeId>(i);
    const Rational& mass = spec.P().atom_mass(v);
    RationalVector row(m), y(m);
    for (std::size_t l = 0; l < m; ++l) {
      // null atoms take P_L as their regular version
      row[l] = mass > 0 ? spec.joint_mass(v, static_cast<int>(l)) / mass : r.P_L[l];
      y[l] = r.P_L[l] > 0 ? row[l] / r.P_L[l] : Rational(0);
      if (row[l] > 0 && r.P_L[l] == 0) r.offending.emplace_back(v, static_cast<int>(l));
      if (r.P_L[l] > 0 && row[l] == 0) r.reverse_offending.emplace_back(v, static_cast<int>(l));
    }
    r.P_t.push_back(std::move(row));
    r.Y.push_back(std::move(y));
  }
  r.holds = r.offending.empty();
  r.reverse_holds = r.reverse_offending.empty();
  r.equivalent = r.holds && r.reverse_holds;
  return r;
}

UniversalDensity universal_density(const EnlargementSpec& spec) {
  const JacodReport jacod = jacod_check(spec);
  if (!jacod.holds) throw PreconditionError("Jacod's condition fails; no universal density");
  GTree g = build_g_tree(spec);
  RationalVector z(g.tree.size(), Rational(1));
  bool positive = true;
  for (std::size_t i = 1; i < g.tree.size(); ++i) {
    const NodeId f = g.f_node[i];
    const Rational& y = jacod.Y[static_cast<std::size_t>(f)][static_cast<std::size_t>(g.label[i])];
    if (y > 0) {
      z[i] = 1 / y;
    } else {
      z[i] = 0;
      positive = false;
    }
  }
  AdaptedProcess Z = AdaptedProcess::scalar(g.tree, std::move(z));
  return UniversalDensity{std::move(g), std::move(Z), positive};
}

UniversalCheckReport check_universal(const UniversalDensity& ud, const std::vector<AdaptedProcess>& family) {
  const EventTree& tree = ud.g.tree;
  UniversalCheckReport r;
  for (std::size_t p = 0; p < family.size(); ++p) {
    if (family[p].dim() != 1) throw ValidationError("check_universal: processes must be scalar");
    const AdaptedProcess M = ud.g.lift(family[p]);
    for (std::size_t i = 0; i < tree.decision_count(); ++i) {
      const NodeId v = static_cast<NodeId>(i);
      if (ud.g.P.atom_mass(v) == 0) continue;
      const Rational next = conditional_mean(tree, ud.g.P, v, tree.time(v) + 1, [&](NodeId c) -> Rational {
        return ud.Z.scalar_at(c) * M.scalar_at(c);
      });
      Rational slack = ud.Z.scalar_at(v) * M.scalar_at(v) - next;
      ++r.inequalities_checked;
      if (slack < 0) r.violations.push_back({p, v, std::move(slack)});
    }
    ++r.processes_checked;
  }
  r.ok = r.violations.empty();
  return r;
}

std::vector<AdaptedProcess> indicator_martingales(const EventTree& tree, const ProbMeasure& P) {
  std::vector<AdaptedProcess> out;
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    const NodeId w = tree.first_leaf() + static_cast<NodeId>(i);
    RationalVector values(tree.size(), Rational(0));
    for (int k = 0; k <= tree.horizon(); ++k) {
      const NodeId a = tree.ancestor_at(w, k);
      if (P.atom_mass(a) > 0) values[static_cast<std::size_t>(a)] = P.leaf_mass(i) / P.atom_mass(a);
    }
    out.push_back(AdaptedProcess::scalar(tree, std::move(values)));
  }
  return out;
}

AdaptedProcess random_supermartingale(const EventTree& tree, const ProbMeasure& P, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RationalVector values(tree.size());
  for (NodeId leaf : tree.leaves()) values[static_cast<std::size_t>(leaf)] = Rational(static_cast<long>(rng() % 9), 4);
  for (int k = tree.horizon() - 1; k >= 0; --k) {
    for (NodeId v : tree.layer(k)) {
      Rational mean = 0;
      const auto children = tree.children(v);
      if (P.atom_mass(v) > 0) {
        for (NodeId c : children) mean += P.atom_mass(c) * values[static_cast<std::size_t>(c)];
        mean /= P.atom_mass(v);
      } else {
        for (NodeId c : children) mean += values[static_cast<std::size_t>(c)];
        mean /= static_cast<long>(children.size());
      }
      values[static_cast<std::size_t>(v)] = mean + Rational(static_cast<long>(rng() % 5), 4);
    }
  }
  return AdaptedProcess::scalar(tree, std::move(values));
}

GeneralizedJacodReport generalized_jacod_check(const EventTree& tree, const ProbMeasure& P,
                                               const std::vector<std::vector<int>>& partitions) {
  const int n = tree.horizon();
  const std::size_t leaves = tree.leaf_count();
  if (partitions.size() != static_cast<std::size_t>(n) + 1) {
    throw ValidationError("G filtration needs one partition per time 0.." + std::to_string(n));
  }
  for (int t = 0; t <= n; ++t) {
    const auto& part = partitions[static_cast<std::size_t>(t)];
    if (part.size() != leaves) {
      throw ValidationError("G partition at time " + std::to_string(t) + " must label every leaf");
    }
    std::map<int, NodeId> f_atom;
    std::map<int, int> earlier;
    for (std::size_t i = 0; i < leaves; ++i) {
      const NodeId a = tree.ancestor_at(tree.first_leaf() + static_cast<NodeId>(i), t);
      const auto [it, fresh] = f_atom.emplace(part[i], a);
      if (!fresh && it->second != a) {
        throw ValidationError("G partition at time " + std::to_string(t) + " does not refine F");
      }
      if (t > 0) {
        const int prev = partitions[static_cast<std::size_t>(t) - 1][i];
        const auto [jt, new_cell] = earlier.emplace(part[i], prev);
        if (!new_cell && jt->second != prev) {
          throw ValidationError("G partitions are not nested at time " + std::to_string(t));
        }
      }
    }
  }

  GeneralizedJacodReport r;
  r.holds = true;
  for (int t = 0; t < n && !r.failure; ++t) {
    const auto& cells = partitions[static_cast<std::size_t>(t)];
    for (int s = 1; t + s <= n && !r.failure; ++s) {
      for (NodeId b : tree.layer(t + s)) {
        if (P.atom_mass(b) == 0) continue;
        const NodeId a = tree.ancestor_at(b, t);
        std::map<int, Rational> on_a, on_b;
        const auto [a_first, a_last] = tree.leaves_below(a);
        for (NodeId w = a_first; w < a_last; ++w) {
          const std::size_t i = tree.leaf_index(w);
          on_a[cells[i]] += P.leaf_mass(i);
          if (tree.is_ancestor_or_self(b, w)) on_b[cells[i]] += P.leaf_mass(i);
        }
        for (const auto& [cell, mass] : on_b) {
          ++r.comparisons;
          if (mass > 0 && on_a[cell] == 0) {
            r.holds = false;
            r.failure = GeneralizedJacodReport::Failure{t, s, b, cell};
            break;
          }
        }
        if (r.failure) break;
      }
    }
  }
  return r;
}

std::vector<std::vector<int>> initial_enlargement_partitions(const EnlargementSpec& spec) {
  const EventTree& tree = spec.base();
  const int m = static_cast<int>(spec.label_count());
  std::vector<std::vector<int>> out;
  for (int t = 0; t <= tree.horizon(); ++t) {
    std::vector<int> part;
    for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
      const NodeId a = tree.ancestor_at(tree.first_leaf() + static_cast<NodeId>(i), t);
      part.push_back(a * m + spec.label_of_leaf(i));
    }
    out.push_back(std::move(part));
  }
  return out;
}

namespace {

// Unique solution of A x = b, or nullopt when the system is inconsistent or
// underdetermined.
std::optional<RationalVector> solve_unique(std::vector<RationalVector> A, RationalVector b) {
  const std::size_t rows = A.size();
  const std::size_t cols = rows ? A[0].size() : 0;
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_col;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t p = rank;
    while (p < rows && A[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(A[p], A[rank]);
    std::swap(b[p], b[rank]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || A[r][c] == 0) continue;
      const Rational f = A[r][c] / A[rank][c];
      for (std::size_t k = c; k < cols; ++k) A[r][k] -= f * A[rank][k];
      b[r] -= f * b[rank];
    }
    pivot_col.push_back(c);
    ++rank;
  }
  for (std::size_t r = rank; r < rows; ++r) {
    if (b[r] != 0) return std::nullopt;
  }
  if (rank != cols) return std::nullopt;
  RationalVector x(cols);
  for (std::size_t r = 0; r < rank; ++r) x[pivot_col[r]] = b[r] / A[r][pivot_col[r]];
  return x;
}

// Unique one-step martingale weights at v: sum q = 1, sum q dS = 0.
std::optional<RationalVector> one_step_measure(const EventTree& tree, const AdaptedProcess& S, NodeId v) {
  const auto children = tree.children(v);
  const auto d = static_cast<std::size_t>(S.dim());
  std::vector<RationalVector> A(d + 1, RationalVector(children.size()));
  RationalVector b(d + 1, Rational(0));
  b[0] = 1;
  for (std::size_t i = 0; i < children.size(); ++i) {
    A[0][i] = 1;
    for (std::size_t j = 0; j < d; ++j) A[j + 1][i] = S.at(children[i])[j] - S.at(v)[j];
  }
  return solve_unique(std::move(A), std::move(b));
}

void require_complete(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& S) {
  if (!is_complete(tree, P, S)) throw PreconditionError("example requires completeness");
}

}  // namespace

bool is_complete(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& S) {
  if (S.size() != tree.size() || S.dim() != tree.asset_dim()) throw ValidationError("price process shape mismatch");
  if (!P.strictly_positive()) return false;
  for (std::size_t i = 0; i < tree.decision_count(); ++i) {
    const auto q = one_step_measure(tree, S, static_cast<NodeId>(i));
    if (!q) return false;
    for (const auto& x : *q) {
      if (x <= 0) return false;
    }
  }
  return true;
}

RationalVector martingale_measure(const EventTree& tree, const AdaptedProcess& S) {
  RationalVector node(tree.size(), Rational(1));
  for (std::size_t i = 0; i < tree.decision_count(); ++i) {
    const NodeId v = static_cast<NodeId>(i);
    const auto q = one_step_measure(tree, S, v);
    if (!q) throw PreconditionError("example requires completeness");
    const auto children = tree.children(v);
    for (std::size_t c = 0; c < children.size(); ++c) {
      node[static_cast<std::size_t>(children[c])] = node[i] * (*q)[c];
    }
  }
  RationalVector out;
  for (NodeId leaf : tree.leaves()) out.push_back(node[static_cast<std::size_t>(leaf)]);
  return out;
}

Replication replicate(const EventTree& tree, const AdaptedProcess& S, const RationalVector& claim) {
  if (claim.size() != tree.leaf_count()) throw ValidationError("claim needs one value per leaf");
  const auto d = static_cast<std::size_t>(S.dim());
  RationalVector value(tree.size());
  for (std::size_t i = 0; i < claim.size(); ++i) value[static_cast<std::size_t>(tree.first_leaf()) + i] = claim[i];
  std::vector<RationalVector> steps(tree.decision_count(), RationalVector(d));
  for (int k = tree.horizon() - 1; k >= 0; --k) {
    for (NodeId v : tree.layer(k)) {
      const auto children = tree.children(v);
      std::vector<RationalVector> A;
      RationalVector b;
      for (NodeId c : children) {
        RationalVector row{Rational(1)};
        for (std::size_t j = 0; j < d; ++j) row.push_back(S.at(c)[j] - S.at(v)[j]);
        A.push_back(std::move(row));
        b.push_back(value[static_cast<std::size_t>(c)]);
      }
      const auto sol = solve_unique(std::move(A), std::move(b));
      if (!sol) throw PreconditionError("example requires completeness");
      value[static_cast<std::size_t>(v)] = (*sol)[0];
      for (std::size_t j = 0; j < d; ++j) steps[static_cast<std::size_t>(v)][j] = (*sol)[j + 1];
    }
  }
  Rational price = value[0];
  return Replication{std::move(price), Strategy(tree, S.dim(), std::move(steps)),
                     AdaptedProcess::scalar(tree, std::move(value))};
}

InsiderReport insider_example(const EnlargementSpec& spec, const AdaptedProcess& S,
                              const std::vector<std::string>& event_labels) {
  const EventTree& base = spec.base();
  const ProbMeasure& P = spec.P();
  require_complete(base, P, S);

  std::size_t charged = 0;
  for (std::size_t l = 0; l < spec.label_count(); ++l) {
    if (spec.label_mass(static_cast<int>(l)) > 0) ++charged;
  }
  if (charged < 2) throw PreconditionError("label is almost surely constant");

  InsiderReport r;
  r.event_labels = event_labels;
  std::vector<bool> in_A(spec.label_count(), false);
  for (const auto& name : event_labels) {
    const auto it = std::find(spec.label_names().begin(), spec.label_names().end(), name);
    if (it == spec.label_names().end()) throw ValidationError("unknown label \"" + name + "\"");
    in_A[static_cast<std::size_t>(it - spec.label_names().begin())] = true;
  }
  RationalVector claim;
  for (std::size_t i = 0; i < base.leaf_count(); ++i) {
    const bool a = in_A[static_cast<std::size_t>(spec.label_of_leaf(i))];
    claim.push_back(a ? Rational(1) : Rational(0));
    if (a) r.P_A += P.leaf_mass(i);
  }
  if (r.P_A == 0 || r.P_A == 1) throw PreconditionError("event must satisfy 0 < P(A) < 1");

  r.replication = replicate(base, S, claim);
  const AdaptedProcess hedge_gains = stochastic_integral(base, S, r.replication.hedge);
  r.replication_exact = true;
  for (std::size_t i = 0; i < base.leaf_count(); ++i) {
    const NodeId leaf = base.first_leaf() + static_cast<NodeId>(i);
    if (r.replication.price + hedge_gains.scalar_at(leaf) != claim[i]) r.replication_exact = false;
  }

  const GTree g = build_g_tree(spec);
  const AdaptedProcess gS = g.lift(S);
  const auto d = static_cast<std::size_t>(S.dim());
  std::vector<RationalVector> steps(g.tree.decision_count(), RationalVector(d, Rational(0)));
  for (std::size_t i = 1; i < g.tree.decision_count(); ++i) {
    if (in_A[static_cast<std::size_t>(g.label[i])]) continue;
    const RationalVector& h = r.replication.hedge.at(g.f_node[i]);
    for (std::size_t j = 0; j < d; ++j) steps[i][j] = -h[j];
  }
  r.insider_strategy = Strategy(g.tree, S.dim(), std::move(steps));
  const WealthProblem g_problem{g.tree, g.P, gS};
  r.insider_arbitrage = is_arbitrage(g_problem, r.insider_strategy);

  // equivalent martingale measure on the G-tree: q_leaf >= 1 (scale free)
  lp::Problem emm(g.tree.leaf_count());
  for (std::size_t i = 0; i < g.tree.leaf_count(); ++i) {
    RationalVector row(g.tree.leaf_count(), Rational(0));
    row[i] = 1;
    emm.add_row(std::move(row), lp::Sense::GreaterEq, 1);
  }
  for (std::size_t i = 0; i < g.tree.decision_count(); ++i) {
    const NodeId v = static_cast<NodeId>(i);
    for (std::size_t j = 0; j < d; ++j) {
      RationalVector row(g.tree.leaf_count(), Rational(0));
      bool nonzero = false;
      for (NodeId c : g.tree.children(v)) {
        const Rational move = gS.at(c)[j] - gS.at(v)[j];
        if (move == 0) continue;
        nonzero = true;
        const auto [first, last] = g.tree.leaves_below(c);
        for (NodeId w = first; w < last; ++w) row[g.tree.leaf_index(w)] = move;
      }
      if (nonzero) emm.add_row(std::move(row), lp::Sense::Equal, 0);
    }
  }
  const lp::Result res = lp::solve(emm);
  if (res.status == lp::Status::Infeasible) {
    r.emm_infeasible = true;
    r.farkas = res.farkas;
    r.farkas_verified = lp::verify_farkas(emm, res.farkas);
  } else {
    RationalVector q = res.x;
    Rational total = 0;
    for (const auto& x : q) total += x;
    for (auto& x : q) x /= total;
    r.emm = std::move(q);
  }

  r.g_market = check_both(g_problem);
  const WealthProblem f_problem{base, P, S};
  r.na1_under_f = check_na1(f_problem).na1_holds;

  const Deflator base_deflator = construct_deflator(f_problem);
  const UniversalDensity ud = universal_density(spec);
  RationalVector product(g.tree.size());
  for (std::size_t i = 0; i < g.tree.size(); ++i) {
    product[i] = ud.Z.scalar_at(static_cast<NodeId>(i)) * base_deflator.Z.scalar_at(g.f_node[i]);
  }
  r.product_deflator =
      verify_deflation(g_problem, AdaptedProcess::scalar(g.tree, std::move(product)), 16, 0x5eedULL);
  return r;
}

LogUtilityReport log_utility_identity(const EnlargementSpec& spec, const AdaptedProcess& S, double tolerance) {
  const EventTree& base = spec.base();
  const ProbMeasure& P = spec.P();
  require_complete(base, P, S);

  LogUtilityReport r;
  r.tolerance = tolerance;
  r.q_star = martingale_measure(base, S);
  for (std::size_t i = 0; i < base.leaf_count(); ++i) {
    r.u_F += to_double(P.leaf_mass(i)) * std::log(to_double(P.leaf_mass(i) / r.q_star[i]));
  }
  r.per_label.assign(spec.label_count(), 0.0);
  for (std::size_t i = 0; i < base.leaf_count(); ++i) {
    const int l = spec.label_of_leaf(i);
    const Rational& pl = spec.label_mass(l);
    const Rational cond = P.leaf_mass(i) / pl;
    r.per_label[static_cast<std::size_t>(l)] += to_double(cond) * std::log(to_double(cond / r.q_star[i]));
    r.mutual_information += to_double(P.leaf_mass(i)) * std::log(to_double(cond / P.leaf_mass(i)));
  }
  for (std::size_t l = 0; l < spec.label_count(); ++l) {
    r.u_G += to_double(spec.label_mass(static_cast<int>(l))) * r.per_label[l];
  }
  r.residual = r.u_G - r.u_F - r.mutual_information;
  r.identity_holds = std::abs(r.residual) <= tolerance;
  return r;
}

}  // namespace deflab
