#pragma once

#include <deflab/arbitrage.hpp>
#include <deflab/error.hpp>
#include <deflab/filtered_space.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace deflab {

/// The one-period NA1 program is unbounded on an atom.
class NA1FailureError : public PreconditionError {
 public:
  NA1FailureError(NodeId node, RationalVector ray);
  NodeId node() const { return node_; }
  const RationalVector& ray() const { return ray_; }

 private:
  NodeId node_;
  RationalVector ray_;
};

/// sup over one-step admissible h of E[w (1 + h . dS) | v], where w is the
/// weight on the children of v (all ones when empty).
struct AtomSolution {
  NodeId node = 0;
  std::optional<Rational> value;  // empty when unbounded
  RationalVector maximizer;       // h at the optimum
  RationalVector ray;             // improving direction when unbounded
};

AtomSolution solve_atom(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& S, NodeId v,
                        const std::vector<Rational>* child_weights = nullptr);

/// One-period density Z on the time-k atoms (k = 0 by default): the atom
/// value of sup_h E[1 + h . dS | atom]. Throws NA1FailureError.
std::vector<AtomSolution> one_period_density(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& S,
                                             int k = 0);

struct Deflator {
  AdaptedProcess Z;
  DoobDecomposition doob;
  Strategy maximizers;  // the one-step h attaining each node's sup
};

/// Backward induction from Z_n = 1. Throws NA1FailureError naming the first
/// atom (deepest layer first) whose one-step program is unbounded.
Deflator construct_deflator(const WealthProblem& problem);

/// Z / E[Z_0], so that E[Z_0] = 1.
AdaptedProcess normalize_deflator(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& Z);

struct DeflationViolation {
  NodeId node = 0;
  std::optional<Strategy> strategy;  // the sampled strategy, or empty for the LP certificate
  RationalVector step;               // offending one-step holding (per unit wealth) when known
  Rational slack;                    // Z_k W_k - E[Z_{k+1} W_{k+1} | node]; negative means violation
  bool unbounded = false;            // the one-step sup is infinite at this node
};

struct DeflationReport {
  bool certified = false;           // (a) holds at every node
  std::vector<DeflationViolation> certificate_violations;
  Rational worst_certificate_slack;  // min over nodes of Z_v - sup
  bool sampled_ok = true;           // (b) holds for every sampled strategy
  std::size_t trials = 0;
  std::optional<Rational> worst_sampled_slack;
  std::vector<DeflationViolation> sampled_violations;

  bool ok() const { return certified && sampled_ok; }
};

/// (a) one LP per decision node: sup_h E[Z_{k+1}(1 + h . dS) | v] <= Z_v;
/// (b) `trials` seeded random 1-admissible strategies checked pathwise.
DeflationReport verify_deflation(const WealthProblem& problem, const AdaptedProcess& Z, std::size_t trials,
                                 std::uint64_t seed);

/// Random 1-admissible strategy with holdings drawn from a seeded stream.
Strategy random_admissible_strategy(const EventTree& tree, const AdaptedProcess& S, std::uint64_t seed);

}  // namespace deflab
