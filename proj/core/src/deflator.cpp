#include <deflab/deflator.hpp>

#include <random>
#include <string>

namespace deflab {

NA1FailureError::NA1FailureError(NodeId node, RationalVector ray)
    : PreconditionError("NA1 fails on atom (node " + std::to_string(node) + ")"), node_(node), ray_(std::move(ray)) {}

AtomSolution solve_atom(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& S, NodeId v,
                        const std::vector<Rational>* child_weights) {
  const auto children = tree.children(v);
  if (children.empty()) throw ValidationError("solve_atom: node " + std::to_string(v) + " is a leaf");
  if (P.atom_mass(v) == 0) throw NullAtomError(v);
  if (child_weights && child_weights->size() != children.size()) {
    throw ValidationError("solve_atom: one weight per child required");
  }
  const auto d = static_cast<std::size_t>(S.dim());

  // maximize sum_c pi_c w_c (1 + h . dS_c) subject to h . dS_c >= -1
  lp::Problem lp(d, lp::VarKind::Free);
  Rational constant = 0;
  for (std::size_t i = 0; i < children.size(); ++i) {
    const NodeId c = children[i];
    const Rational weight = (P.atom_mass(c) / P.atom_mass(v)) * (child_weights ? (*child_weights)[i] : Rational(1));
    RationalVector delta(d);
    for (std::size_t j = 0; j < d; ++j) delta[j] = S.at(c)[j] - S.at(v)[j];
    constant += weight;
    for (std::size_t j = 0; j < d; ++j) lp.objective[j] += weight * delta[j];
    lp.add_row(std::move(delta), lp::Sense::GreaterEq, -1);
  }

  const lp::Result res = lp::solve(lp);
  AtomSolution out;
  out.node = v;
  if (res.status == lp::Status::Unbounded) {
    if (!lp::verify_ray(lp, res.ray)) throw Error("atom ray failed verification");
    out.ray = res.ray;
    return out;
  }
  if (res.status != lp::Status::Optimal) throw Error("atom program infeasible although h = 0 is feasible");
  if (!lp::verify_optimal(lp, res.x, res.dual)) throw Error("atom optimum failed its dual certificate");
  out.value = constant + res.value;
  out.maximizer = res.x;
  return out;
}

std::vector<AtomSolution> one_period_density(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& S,
                                             int k) {
  if (k < 0 || k >= tree.horizon()) throw ValidationError("one_period_density: k must be in [0, horizon)");
  std::vector<AtomSolution> out;
  for (NodeId v : tree.layer(k)) {
    AtomSolution sol = solve_atom(tree, P, S, v);
    if (!sol.value) throw NA1FailureError(v, sol.ray);
    out.push_back(std::move(sol));
  }
  return out;
}

Deflator construct_deflator(const WealthProblem& problem) {
  problem.validate();
  const EventTree& tree = problem.tree;
  RationalVector z(tree.size(), Rational(1));
  std::vector<RationalVector> steps(tree.decision_count());
  for (int k = tree.horizon() - 1; k >= 0; --k) {
    for (NodeId v : tree.layer(k)) {
      std::vector<Rational> weights;
      for (NodeId c : tree.children(v)) weights.push_back(z[static_cast<std::size_t>(c)]);
      AtomSolution sol = solve_atom(tree, problem.P, problem.S, v, &weights);
      if (!sol.value) throw NA1FailureError(v, sol.ray);
      z[static_cast<std::size_t>(v)] = *sol.value;
      steps[static_cast<std::size_t>(v)] = std::move(sol.maximizer);
    }
  }
  AdaptedProcess Z = AdaptedProcess::scalar(tree, std::move(z));
  DoobDecomposition doob = doob_decomposition(tree, problem.P, Z);
  return Deflator{std::move(Z), std::move(doob), Strategy(tree, problem.S.dim(), std::move(steps))};
}

AdaptedProcess normalize_deflator(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& Z) {
  Rational mean = 0;
  for (NodeId v : tree.layer(0)) mean += P.atom_mass(v) * Z.scalar_at(v);
  if (mean <= 0) throw PreconditionError("cannot normalize a deflator with E[Z_0] <= 0");
  RationalVector values(tree.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = Z.scalar_at(static_cast<NodeId>(i)) / mean;
  return AdaptedProcess::scalar(tree, std::move(values));
}

namespace {

Rational random_fraction(std::mt19937_64& rng, unsigned long denominator) {
  return Rational(static_cast<long>(rng() % (denominator + 1)), denominator);
}

}  // namespace

Strategy random_admissible_strategy(const EventTree& tree, const AdaptedProcess& S, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto d = static_cast<std::size_t>(S.dim());
  RationalVector wealth(tree.size(), Rational(1));
  std::vector<RationalVector> steps(tree.decision_count(), RationalVector(d, Rational(0)));
  for (std::size_t i = 0; i < tree.decision_count(); ++i) {
    const NodeId v = static_cast<NodeId>(i);
    RationalVector u(d);
    for (auto& x : u) x = Rational(static_cast<long>(rng() % 9) - 4, 4);
    std::optional<Rational> t_max;
    for (NodeId c : tree.children(v)) {
      Rational move = 0;
      for (std::size_t j = 0; j < d; ++j) move += u[j] * (S.at(c)[j] - S.at(v)[j]);
      if (move < 0) {
        Rational t = wealth[i] / -move;
        if (!t_max || t < *t_max) t_max = t;
      }
    }
    const Rational t = (t_max ? *t_max : Rational(4) * (wealth[i] + 1)) * random_fraction(rng, 8);
    for (std::size_t j = 0; j < d; ++j) steps[i][j] = t * u[j];
    for (NodeId c : tree.children(v)) {
      Rational w = wealth[i];
      for (std::size_t j = 0; j < d; ++j) w += steps[i][j] * (S.at(c)[j] - S.at(v)[j]);
      wealth[static_cast<std::size_t>(c)] = std::move(w);
    }
  }
  return Strategy(tree, S.dim(), std::move(steps));
}

DeflationReport verify_deflation(const WealthProblem& problem, const AdaptedProcess& Z, std::size_t trials,
                                 std::uint64_t seed) {
  problem.validate();
  const EventTree& tree = problem.tree;
  if (Z.dim() != 1 || Z.size() != tree.size()) throw ValidationError("verify_deflation: Z must be a scalar process");

  DeflationReport report;
  report.certified = true;
  bool first = true;
  for (std::size_t i = 0; i < tree.decision_count(); ++i) {
    const NodeId v = static_cast<NodeId>(i);
    std::vector<Rational> weights;
    for (NodeId c : tree.children(v)) weights.push_back(Z.scalar_at(c));
    AtomSolution sol = solve_atom(tree, problem.P, problem.S, v, &weights);
    if (!sol.value) {
      report.certified = false;
      DeflationViolation viol;
      viol.node = v;
      viol.step = sol.ray;
      viol.unbounded = true;
      report.certificate_violations.push_back(std::move(viol));
      continue;
    }
    Rational slack = Z.scalar_at(v) - *sol.value;
    if (first || slack < report.worst_certificate_slack) report.worst_certificate_slack = slack;
    first = false;
    if (slack < 0) {
      report.certified = false;
      report.certificate_violations.push_back({v, std::nullopt, sol.maximizer, slack, false});
    }
  }

  report.trials = trials;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 master(seq);
  for (std::size_t t = 0; t < trials; ++t) {
    const Strategy H = random_admissible_strategy(tree, problem.S, master());
    const AdaptedProcess gains = stochastic_integral(tree, problem.S, H);
    for (std::size_t i = 0; i < tree.decision_count(); ++i) {
      const NodeId v = static_cast<NodeId>(i);
      const Rational next = conditional_mean(tree, problem.P, v, tree.time(v) + 1, [&](NodeId c) -> Rational {
        return Z.scalar_at(c) * (1 + gains.scalar_at(c));
      });
      Rational slack = Z.scalar_at(v) * (1 + gains.scalar_at(v)) - next;
      if (!report.worst_sampled_slack || slack < *report.worst_sampled_slack) report.worst_sampled_slack = slack;
      if (slack < 0) {
        report.sampled_ok = false;
        if (report.sampled_violations.size() < 16) {
          report.sampled_violations.push_back({v, H, H.at(v), slack, false});
        }
      }
    }
  }
  return report;
}

}  // namespace deflab
