#pragma once

#include <deflab/arbitrage.hpp>
#include <deflab/deflator.hpp>
#include <deflab/filtered_space.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace deflab {

/// Initial enlargement G_k = F_k v sigma(L) for a label L given per leaf.
class EnlargementSpec {
 public:
  EnlargementSpec(const EventTree& base, const ProbMeasure& P, std::vector<std::string> leaf_labels);

  const EventTree& base() const { return *base_; }
  const ProbMeasure& P() const { return *P_; }
  const std::vector<std::string>& label_names() const { return names_; }  // sorted, unique
  std::size_t label_count() const { return names_.size(); }
  int label_of_leaf(std::size_t leaf_index) const { return leaf_label_[leaf_index]; }

  /// P(v and L = l), by node and label index.
  const Rational& joint_mass(NodeId v, int label) const;
  /// P(L = l).
  const Rational& label_mass(int label) const;
  /// True when some leaf below v carries label l.
  bool label_present(NodeId v, int label) const;

 private:
  const EventTree* base_;
  const ProbMeasure* P_;
  std::vector<std::string> names_;
  std::vector<int> leaf_label_;
  std::vector<RationalVector> joint_;  // [node][label]
  std::vector<std::vector<bool>> present_;
};

/// The G-filtration as an event tree. A leading step reveals L: the root
/// splits into one node per label, and G-time k + 1 carries the atoms
/// (F_k atom) and {L = l}. Prices do not move over the leading step, so
/// trading verdicts on this tree are verdicts under G.
struct GTree {
  EventTree tree;
  ProbMeasure P;
  std::vector<NodeId> f_node;  // underlying F node (the F root for the first two layers)
  std::vector<int> label;      // label index, -1 at the root
  std::vector<NodeId> base_leaf_of;  // G leaf index -> base leaf id

  /// S_k on the atom (v, l) is S_k(v); the root copies S_0.
  AdaptedProcess lift(const AdaptedProcess& X) const;
  int f_time(NodeId g) const;
};

GTree build_g_tree(const EnlargementSpec& spec);

struct JacodReport {
  bool holds = false;          // P_t(v, l) > 0 implies P_L(l) > 0
  bool reverse_holds = false;  // P_L(l) > 0 implies P_t(v, l) > 0
  bool equivalent = false;
  RationalVector P_L;
  std::vector<RationalVector> P_t;  // [node][label]
  std::vector<RationalVector> Y;    // [node][label], 0/0 := 0
  std::vector<std::pair<NodeId, int>> offending;
  std::vector<std::pair<NodeId, int>> reverse_offending;
};

JacodReport jacod_check(const EnlargementSpec& spec);

/// Z on the G-tree: 1 at the root and 1/Y_t(v, l) on the atom (v, l).
struct UniversalDensity {
  GTree g;
  AdaptedProcess Z;
  bool strictly_positive = false;  // every positive-mass G-atom has 0 < Z < inf
};

UniversalDensity universal_density(const EnlargementSpec& spec);

struct SupermartingaleViolation {
  std::size_t process = 0;  // index into the tested family
  NodeId g_node = 0;
  Rational slack;  // Z_k M_k - E[Z_{k+1} M_{k+1} | atom]
};

struct UniversalCheckReport {
  bool ok = false;
  std::size_t processes_checked = 0;
  std::size_t inequalities_checked = 0;
  std::vector<SupermartingaleViolation> violations;
};

/// E[Z_{k+1} M_{k+1} | G atom] <= Z_k M_k for every family member and every
/// positive-mass G decision atom, exactly.
UniversalCheckReport check_universal(const UniversalDensity& ud, const std::vector<AdaptedProcess>& family);

/// M^w_t = P(w | F_t) for every leaf w.
std::vector<AdaptedProcess> indicator_martingales(const EventTree& tree, const ProbMeasure& P);

/// Nonnegative F-supermartingale: random terminal values, then
/// M_k = E[M_{k+1} | F_k] + u with seeded random u >= 0.
AdaptedProcess random_supermartingale(const EventTree& tree, const ProbMeasure& P, std::uint64_t seed);

/// partitions[t][leaf index] = G_t cell id.
struct GeneralizedJacodReport {
  bool holds = false;
  std::size_t comparisons = 0;
  struct Failure {
    int t = 0;
    int s = 0;
    NodeId f_atom = 0;  // the F_{t+s} atom
    int g_cell = 0;
  };
  std::optional<Failure> failure;
};

/// Checks P(C | F_{t+s} atom) > 0 implies P(C | F_t atom) > 0 for every G_t
/// cell C. Throws ValidationError when the partitions are not nested in time
/// or do not refine F.
GeneralizedJacodReport generalized_jacod_check(const EventTree& tree, const ProbMeasure& P,
                                               const std::vector<std::vector<int>>& partitions);

/// G_t cells (F_t atom, label) of an initial enlargement.
std::vector<std::vector<int>> initial_enlargement_partitions(const EnlargementSpec& spec);

/// True when every one-step market admits a unique, strictly positive
/// martingale measure (one-period completeness at every node).
bool is_complete(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& S);

/// The unique martingale measure of a complete market, by leaf.
RationalVector martingale_measure(const EventTree& tree, const AdaptedProcess& S);

struct Replication {
  Rational price;        // initial capital
  Strategy hedge;        // F-predictable holdings
  AdaptedProcess value;  // value process
};

/// Replicates the claim (one value per leaf) in a complete market.
Replication replicate(const EventTree& tree, const AdaptedProcess& S, const RationalVector& claim);

struct InsiderReport {
  std::vector<std::string> event_labels;  // A = {L in event_labels}
  Rational P_A;
  Replication replication;
  bool replication_exact = false;
  Strategy insider_strategy;          // -1_{A^c} H on the G-tree
  bool insider_arbitrage = false;     // terminal gains >= 0, > 0 on A^c
  bool emm_infeasible = false;        // no equivalent G-martingale measure
  RationalVector farkas;              // certificate rows: leaf lower bounds, then martingale rows
  bool farkas_verified = false;
  std::optional<RationalVector> emm;  // only if feasible
  ArbitrageReport g_market;           // NA and NA1 on the G-tree
  bool na1_under_f = false;
  DeflationReport product_deflator;   // universal density times the F deflator, on the G-tree
};

/// Throws PreconditionError("example requires completeness") for an
/// incomplete base market and when L is constant or A is trivial.
InsiderReport insider_example(const EnlargementSpec& spec, const AdaptedProcess& S,
                              const std::vector<std::string>& event_labels);

struct LogUtilityReport {
  RationalVector q_star;  // martingale measure by leaf
  double u_F = 0;
  double u_G = 0;
  double mutual_information = 0;
  double residual = 0;  // u_G - u_F - I
  bool identity_holds = false;
  double tolerance = 1e-9;
  std::vector<double> per_label;  // KL(P(. | l) || Q*)
};

/// u_F = E[log dP/dQ*], u_G = sum_l P(l) KL(P(. | l) || Q*), I the discrete
/// mutual information of L and F_n.
LogUtilityReport log_utility_identity(const EnlargementSpec& spec, const AdaptedProcess& S, double tolerance = 1e-9);

}  // namespace deflab
