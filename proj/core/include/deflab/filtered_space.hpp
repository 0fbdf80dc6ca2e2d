#pragma once

#include <deflab/rational.hpp>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deflab {

using NodeId = int;

struct NodeRecord {
  NodeId id = 0;
  int time = 0;
  std::optional<NodeId> parent;
};

/// A finite filtered probability space as a rooted tree of atoms.
///
/// Node ids are dense and assigned in breadth-first order, so every time
/// layer is a contiguous id range and every subtree occupies a contiguous
/// range inside each layer. Leaves are exactly the time-`horizon` nodes and
/// stand for the elementary outcomes.
class EventTree {
 public:
  /// Validates the records (BFS order, one root, parents one layer up,
  /// every non-terminal node has a child) and builds the tree.
  EventTree(int asset_dim, std::vector<NodeRecord> records);

  /// Builds a tree in BFS order: `child_counts[i]` is the number of children
  /// of the i-th non-leaf node. Nodes at time `horizon` get no entry.
  static EventTree from_child_counts(int asset_dim, int horizon, std::span<const int> child_counts);

  /// Every non-leaf node has `branching` children.
  static EventTree uniform(int asset_dim, int horizon, int branching);

  int horizon() const { return horizon_; }
  int asset_dim() const { return asset_dim_; }
  std::size_t size() const { return time_.size(); }
  std::size_t leaf_count() const { return layer_size(horizon_); }

  int time(NodeId v) const { return time_[index(v)]; }
  std::optional<NodeId> parent(NodeId v) const;
  std::span<const NodeId> children(NodeId v) const;
  bool is_leaf(NodeId v) const { return time(v) == horizon_; }

  /// Ids of the time-k atoms, in increasing order.
  std::span<const NodeId> layer(int k) const;
  std::size_t layer_size(int k) const { return layer(k).size(); }
  std::span<const NodeId> leaves() const { return layer(horizon_); }
  NodeId first_leaf() const { return layer_start_[static_cast<std::size_t>(horizon_)]; }
  std::size_t leaf_index(NodeId leaf) const;

  /// The time-k ancestor of v (v itself when k == time(v)).
  NodeId ancestor_at(NodeId v, int k) const;
  bool is_ancestor_or_self(NodeId ancestor, NodeId v) const;

  /// Descendants of v at time k, a contiguous id range [first, last).
  std::pair<NodeId, NodeId> descendants_at(NodeId v, int k) const;
  std::pair<NodeId, NodeId> leaves_below(NodeId v) const { return descendants_at(v, horizon_); }

  /// Number of non-leaf nodes; strategies store one value per such node.
  std::size_t decision_count() const { return static_cast<std::size_t>(first_leaf()); }

  std::vector<NodeRecord> records() const;

 private:
  std::size_t index(NodeId v) const;

  int asset_dim_ = 1;
  int horizon_ = 0;
  std::vector<int> time_;
  std::vector<NodeId> parent_;  // -1 for the root
  std::vector<NodeId> child_begin_;
  std::vector<NodeId> child_end_;
  std::vector<NodeId> ids_;  // 0..size-1, backing storage for spans
  std::vector<NodeId> layer_start_;
};

/// Probability (or sub-probability-free finite) measure on the leaves.
///
/// Masses must be nonnegative and sum to exactly one. Zero-mass leaves are
/// allowed; node masses are cached at construction.
class ProbMeasure {
 public:
  ProbMeasure(const EventTree& tree, RationalVector leaf_mass);

  /// Equal mass on every leaf.
  static ProbMeasure uniform(const EventTree& tree);

  /// Product measure from per-edge conditional probabilities (one entry per
  /// non-root node, indexed by node id; the root entry is ignored).
  static ProbMeasure from_transitions(const EventTree& tree, const RationalVector& edge_prob);

  const Rational& leaf_mass(std::size_t leaf_index) const { return leaf_mass_[leaf_index]; }
  const RationalVector& leaf_masses() const { return leaf_mass_; }
  const Rational& atom_mass(NodeId v) const { return node_mass_[static_cast<std::size_t>(v)]; }
  bool strictly_positive() const;

 private:
  RationalVector leaf_mass_;
  RationalVector node_mass_;
};

/// One vector value per node; F_k-measurability is structural.
class AdaptedProcess {
 public:
  AdaptedProcess() = default;
  AdaptedProcess(const EventTree& tree, int dim, std::vector<RationalVector> values);

  static AdaptedProcess constant(const EventTree& tree, const RationalVector& value);
  static AdaptedProcess scalar(const EventTree& tree, RationalVector values);
  static AdaptedProcess from_function(const EventTree& tree, int dim,
                                      const std::function<RationalVector(NodeId)>& f);

  int dim() const { return dim_; }
  std::size_t size() const { return values_.size(); }
  const RationalVector& at(NodeId v) const { return values_[static_cast<std::size_t>(v)]; }
  RationalVector& at(NodeId v) { return values_[static_cast<std::size_t>(v)]; }
  const Rational& scalar_at(NodeId v) const;
  const std::vector<RationalVector>& values() const { return values_; }

  friend bool operator==(const AdaptedProcess&, const AdaptedProcess&) = default;

 private:
  int dim_ = 1;
  std::vector<RationalVector> values_;
};

/// Predictable process: the value stored at a time-(k-1) node is the holding
/// applied over step k on every path through that node.
class Strategy {
 public:
  Strategy() = default;
  Strategy(const EventTree& tree, int dim, std::vector<RationalVector> steps);

  static Strategy zero(const EventTree& tree, int dim);
  static Strategy constant(const EventTree& tree, const RationalVector& value);

  int dim() const { return dim_; }
  std::size_t size() const { return steps_.size(); }
  const RationalVector& at(NodeId decision_node) const;
  RationalVector& at(NodeId decision_node);
  const Rational& scalar_at(NodeId decision_node) const;
  const std::vector<RationalVector>& steps() const { return steps_; }

  friend bool operator==(const Strategy&, const Strategy&) = default;

 private:
  int dim_ = 1;
  std::vector<RationalVector> steps_;
};

/// A stopping time given by an antichain of stopped nodes; leaves below no
/// stopped node have the value infinity.
class StoppingTime {
 public:
  StoppingTime(const EventTree& tree, std::vector<NodeId> stop_at);

  /// First node along each path satisfying `hit` (infinity when none does).
  static StoppingTime hitting_time(const EventTree& tree, const std::function<bool(NodeId)>& hit);

  /// Deterministic time k: the antichain is the whole layer k.
  static StoppingTime deterministic(const EventTree& tree, int k);

  const std::vector<NodeId>& stopped_nodes() const { return stop_at_; }

  /// The stopped node on the path to `leaf`, or nullopt for infinity.
  std::optional<NodeId> determination(NodeId leaf) const;

 private:
  std::vector<NodeId> stop_at_;
  std::vector<std::optional<NodeId>> by_leaf_;
  NodeId first_leaf_ = 0;
};

/// E[f(w) | atom v] over the time-k descendants w of v under P.
///
/// Throws NullAtomError when v has zero mass and f is not identically zero
/// on the descendants; returns zero when both vanish.
Rational conditional_mean(const EventTree& tree, const ProbMeasure& P, NodeId v, int k,
                          const std::function<Rational(NodeId)>& f);

/// E[X_k | F_j] for j <= k, one value per time-j atom in layer order.
std::vector<RationalVector> conditional_expectation(const EventTree& tree, const ProbMeasure& P,
                                                    const AdaptedProcess& X, int k, int j);

/// Discrete gains process (H.S): zero at the root, and
/// (H.S)(v) = (H.S)(parent) + H(parent) . (S(v) - S(parent)).
AdaptedProcess stochastic_integral(const EventTree& tree, const AdaptedProcess& S, const Strategy& H);

struct DoobDecomposition {
  AdaptedProcess martingale;      // M with M_0 = 0
  Strategy compensator_increment;  // dA_k stored at the time-(k-1) node
  AdaptedProcess compensator;      // A with A_0 = 0

  /// True when every increment is nonnegative (Z was a supermartingale).
  bool nondecreasing() const;
};

/// Z = Z_0 + M - A with dA_k = E[Z_{k-1} - Z_k | F_{k-1}].
///
/// Requires a strictly positive P; the martingale property of M is checked
/// exactly before returning.
DoobDecomposition doob_decomposition(const EventTree& tree, const ProbMeasure& P,
                                     const AdaptedProcess& Z);

/// True when X (scalar) satisfies E[X_{k+1} | F_k] <= X_k at every atom with
/// positive mass.
bool is_supermartingale(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& X);
bool is_martingale(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& X);

}  // namespace deflab
