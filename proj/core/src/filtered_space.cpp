#include <deflab/error.hpp>
#include <deflab/filtered_space.hpp>

#include <algorithm>
#include <numeric>
#include <string>

namespace deflab {

// ---------------------------------------------------------------- EventTree

EventTree::EventTree(int asset_dim, std::vector<NodeRecord> records) : asset_dim_(asset_dim) {
  if (asset_dim < 1) throw ValidationError("asset_dim must be >= 1");
  if (records.empty()) throw ValidationError("tree has no nodes");

  const auto n = records.size();
  time_.resize(n);
  parent_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    if (r.id != static_cast<NodeId>(i)) {
      throw ValidationError("node ids must be dense and listed in order; expected id " +
                            std::to_string(i) + ", got " + std::to_string(r.id));
    }
    time_[i] = r.time;
    if (i == 0) {
      if (r.parent || r.time != 0) throw ValidationError("node 0 must be the root at time 0");
      parent_[i] = -1;
      continue;
    }
    if (!r.parent) throw ValidationError("node " + std::to_string(i) + " has no parent (only one root allowed)");
    const NodeId p = *r.parent;
    if (p < 0 || static_cast<std::size_t>(p) >= i) {
      throw ValidationError("node " + std::to_string(i) + ": parent must precede it in BFS order");
    }
    if (time_[static_cast<std::size_t>(p)] != r.time - 1) {
      throw ValidationError("node " + std::to_string(i) + ": parent is not at time k-1");
    }
    if (parent_[i - 1] > p) {
      throw ValidationError("node " + std::to_string(i) + ": nodes are not in breadth-first order");
    }
    parent_[i] = p;
  }

  horizon_ = time_.back();
  if (horizon_ < 1) throw ValidationError("horizon must be >= 1");

  layer_start_.assign(static_cast<std::size_t>(horizon_) + 2, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && time_[i] < time_[i - 1]) throw ValidationError("nodes are not in breadth-first order");
  }
  for (int k = 0, i = 0; k <= horizon_ + 1; ++k) {
    while (static_cast<std::size_t>(i) < n && time_[static_cast<std::size_t>(i)] < k) ++i;
    layer_start_[static_cast<std::size_t>(k)] = i;
  }

  child_begin_.assign(n, 0);
  child_end_.assign(n, 0);
  for (std::size_t i = 1; i < n; ++i) {
    const auto p = static_cast<std::size_t>(parent_[i]);
    if (child_end_[p] == 0) child_begin_[p] = static_cast<NodeId>(i);
    child_end_[p] = static_cast<NodeId>(i + 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (child_end_[i] == 0) child_begin_[i] = child_end_[i] = 0;
    const bool leaf = time_[i] == horizon_;
    const bool has_children = child_end_[i] > child_begin_[i];
    if (!leaf && !has_children) {
      throw ValidationError("node " + std::to_string(i) + " at time " + std::to_string(time_[i]) +
                            " < horizon has no children");
    }
  }
  ids_.resize(n);
  std::iota(ids_.begin(), ids_.end(), 0);
}

EventTree EventTree::from_child_counts(int asset_dim, int horizon, std::span<const int> child_counts) {
  if (horizon < 1) throw ValidationError("horizon must be >= 1");
  std::vector<NodeRecord> records{{0, 0, std::nullopt}};
  std::size_t next_count = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].time == horizon) continue;
    if (next_count >= child_counts.size()) throw ValidationError("not enough child counts");
    const int c = child_counts[next_count++];
    if (c < 1) throw ValidationError("child counts must be >= 1");
    for (int j = 0; j < c; ++j) {
      records.push_back({static_cast<NodeId>(records.size()), records[i].time + 1, static_cast<NodeId>(i)});
    }
  }
  if (next_count != child_counts.size()) throw ValidationError("too many child counts");
  return EventTree(asset_dim, std::move(records));
}

EventTree EventTree::uniform(int asset_dim, int horizon, int branching) {
  std::size_t internal = 0;
  std::size_t width = 1;
  for (int k = 0; k < horizon; ++k) {
    internal += width;
    width *= static_cast<std::size_t>(branching);
  }
  const std::vector<int> counts(internal, branching);
  return from_child_counts(asset_dim, horizon, counts);
}

std::size_t EventTree::index(NodeId v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= time_.size()) {
    throw ValidationError("node id " + std::to_string(v) + " out of range");
  }
  return static_cast<std::size_t>(v);
}

std::optional<NodeId> EventTree::parent(NodeId v) const {
  const NodeId p = parent_[index(v)];
  if (p < 0) return std::nullopt;
  return p;
}

std::span<const NodeId> EventTree::children(NodeId v) const {
  const auto i = index(v);
  return std::span<const NodeId>(ids_).subspan(static_cast<std::size_t>(child_begin_[i]),
                                              static_cast<std::size_t>(child_end_[i] - child_begin_[i]));
}

std::span<const NodeId> EventTree::layer(int k) const {
  if (k < 0 || k > horizon_) throw ValidationError("time " + std::to_string(k) + " outside [0, horizon]");
  const auto b = static_cast<std::size_t>(layer_start_[static_cast<std::size_t>(k)]);
  const auto e = static_cast<std::size_t>(layer_start_[static_cast<std::size_t>(k) + 1]);
  return std::span<const NodeId>(ids_).subspan(b, e - b);
}

std::size_t EventTree::leaf_index(NodeId leaf) const {
  if (!is_leaf(leaf)) throw ValidationError("node " + std::to_string(leaf) + " is not a leaf");
  return static_cast<std::size_t>(leaf - first_leaf());
}

NodeId EventTree::ancestor_at(NodeId v, int k) const {
  int t = time(v);
  if (k > t || k < 0) throw ValidationError("ancestor_at: time out of range");
  while (t > k) {
    v = parent_[static_cast<std::size_t>(v)];
    --t;
  }
  return v;
}

bool EventTree::is_ancestor_or_self(NodeId ancestor, NodeId v) const {
  const int ta = time(ancestor);
  return ta <= time(v) && ancestor_at(v, ta) == ancestor;
}

std::pair<NodeId, NodeId> EventTree::descendants_at(NodeId v, int k) const {
  const int t = time(v);
  if (k < t || k > horizon_) throw ValidationError("descendants_at: time out of range");
  NodeId lo = v;
  NodeId hi = v + 1;
  for (int s = t; s < k; ++s) {
    // Subtrees are contiguous in BFS order: the children of [lo, hi) are the
    // range from the first child of lo to the last child of hi - 1.
    lo = child_begin_[static_cast<std::size_t>(lo)];
    hi = child_end_[static_cast<std::size_t>(hi - 1)];
  }
  return {lo, hi};
}

std::vector<NodeRecord> EventTree::records() const {
  std::vector<NodeRecord> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    out.push_back({static_cast<NodeId>(i), time_[i], parent(static_cast<NodeId>(i))});
  }
  return out;
}

// -------------------------------------------------------------- ProbMeasure

ProbMeasure::ProbMeasure(const EventTree& tree, RationalVector leaf_mass) : leaf_mass_(std::move(leaf_mass)) {
  if (leaf_mass_.size() != tree.leaf_count()) {
    throw ValidationError("measure has " + std::to_string(leaf_mass_.size()) + " masses for " +
                          std::to_string(tree.leaf_count()) + " leaves");
  }
  Rational total = 0;
  for (const auto& m : leaf_mass_) {
    if (m < 0) throw ValidationError("negative leaf mass " + format_rational(m));
    total += m;
  }
  if (total != 1) throw ValidationError("leaf masses sum to " + format_rational(total) + ", not 1");

  node_mass_.assign(tree.size(), Rational(0));
  const NodeId first = tree.first_leaf();
  for (std::size_t i = 0; i < leaf_mass_.size(); ++i) {
    node_mass_[static_cast<std::size_t>(first) + i] = leaf_mass_[i];
  }
  for (int k = tree.horizon() - 1; k >= 0; --k) {
    for (NodeId v : tree.layer(k)) {
      Rational m = 0;
      for (NodeId c : tree.children(v)) m += node_mass_[static_cast<std::size_t>(c)];
      node_mass_[static_cast<std::size_t>(v)] = m;
    }
  }
}

ProbMeasure ProbMeasure::uniform(const EventTree& tree) {
  const Rational w(1, static_cast<unsigned long>(tree.leaf_count()));
  return ProbMeasure(tree, RationalVector(tree.leaf_count(), w));
}

ProbMeasure ProbMeasure::from_transitions(const EventTree& tree, const RationalVector& edge_prob) {
  if (edge_prob.size() != tree.size()) throw ValidationError("edge probabilities need one entry per node");
  RationalVector path(tree.size(), Rational(1));
  for (std::size_t i = 1; i < tree.size(); ++i) {
    const auto p = static_cast<std::size_t>(*tree.parent(static_cast<NodeId>(i)));
    path[i] = path[p] * edge_prob[i];
  }
  RationalVector leaves;
  leaves.reserve(tree.leaf_count());
  for (NodeId v : tree.leaves()) leaves.push_back(path[static_cast<std::size_t>(v)]);
  return ProbMeasure(tree, std::move(leaves));
}

bool ProbMeasure::strictly_positive() const {
  return std::all_of(leaf_mass_.begin(), leaf_mass_.end(), [](const Rational& m) { return m > 0; });
}

// ----------------------------------------------------------- AdaptedProcess

AdaptedProcess::AdaptedProcess(const EventTree& tree, int dim, std::vector<RationalVector> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim < 1) throw ValidationError("process dimension must be >= 1");
  if (values_.size() != tree.size()) {
    throw ValidationError("process needs one value per node (" + std::to_string(tree.size()) + "), got " +
                          std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i].size() != static_cast<std::size_t>(dim)) {
      throw ValidationError("process value at node " + std::to_string(i) + " has wrong dimension");
    }
  }
}

AdaptedProcess AdaptedProcess::constant(const EventTree& tree, const RationalVector& value) {
  return AdaptedProcess(tree, static_cast<int>(value.size()), std::vector<RationalVector>(tree.size(), value));
}

AdaptedProcess AdaptedProcess::scalar(const EventTree& tree, RationalVector values) {
  std::vector<RationalVector> wrapped;
  wrapped.reserve(values.size());
  for (auto& v : values) wrapped.push_back(RationalVector{std::move(v)});
  return AdaptedProcess(tree, 1, std::move(wrapped));
}

AdaptedProcess AdaptedProcess::from_function(const EventTree& tree, int dim,
                                             const std::function<RationalVector(NodeId)>& f) {
  std::vector<RationalVector> values;
  values.reserve(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) values.push_back(f(static_cast<NodeId>(i)));
  return AdaptedProcess(tree, dim, std::move(values));
}

const Rational& AdaptedProcess::scalar_at(NodeId v) const {
  if (dim_ != 1) throw ValidationError("scalar_at on a vector-valued process");
  return values_[static_cast<std::size_t>(v)][0];
}

// ----------------------------------------------------------------- Strategy

Strategy::Strategy(const EventTree& tree, int dim, std::vector<RationalVector> steps)
    : dim_(dim), steps_(std::move(steps)) {
  if (dim < 1) throw ValidationError("strategy dimension must be >= 1");
  if (steps_.size() != tree.decision_count()) {
    throw ValidationError("strategy needs one value per non-leaf node (" + std::to_string(tree.decision_count()) +
                          "), got " + std::to_string(steps_.size()));
  }
  for (const auto& s : steps_) {
    if (s.size() != static_cast<std::size_t>(dim)) throw ValidationError("strategy value has wrong dimension");
  }
}

Strategy Strategy::zero(const EventTree& tree, int dim) {
  return Strategy(tree, dim, std::vector<RationalVector>(tree.decision_count(), RationalVector(dim, Rational(0))));
}

Strategy Strategy::constant(const EventTree& tree, const RationalVector& value) {
  return Strategy(tree, static_cast<int>(value.size()), std::vector<RationalVector>(tree.decision_count(), value));
}

const RationalVector& Strategy::at(NodeId decision_node) const {
  if (decision_node < 0 || static_cast<std::size_t>(decision_node) >= steps_.size()) {
    throw ValidationError("strategy is not defined at node " + std::to_string(decision_node));
  }
  return steps_[static_cast<std::size_t>(decision_node)];
}

RationalVector& Strategy::at(NodeId decision_node) {
  return const_cast<RationalVector&>(static_cast<const Strategy&>(*this).at(decision_node));
}

const Rational& Strategy::scalar_at(NodeId decision_node) const {
  if (dim_ != 1) throw ValidationError("scalar_at on a vector-valued strategy");
  return at(decision_node)[0];
}

// ------------------------------------------------------------- StoppingTime

StoppingTime::StoppingTime(const EventTree& tree, std::vector<NodeId> stop_at)
    : stop_at_(std::move(stop_at)), first_leaf_(tree.first_leaf()) {
  std::sort(stop_at_.begin(), stop_at_.end());
  if (std::adjacent_find(stop_at_.begin(), stop_at_.end()) != stop_at_.end()) {
    throw ValidationError("stopping time lists a node twice");
  }
  by_leaf_.assign(tree.leaf_count(), std::nullopt);
  for (NodeId v : stop_at_) {
    const auto [lo, hi] = tree.leaves_below(v);
    for (NodeId leaf = lo; leaf < hi; ++leaf) {
      auto& slot = by_leaf_[static_cast<std::size_t>(leaf - first_leaf_)];
      if (slot) {
        throw ValidationError("stopping time nodes " + std::to_string(*slot) + " and " + std::to_string(v) +
                              " are not an antichain");
      }
      slot = v;
    }
  }
}

StoppingTime StoppingTime::hitting_time(const EventTree& tree, const std::function<bool(NodeId)>& hit) {
  std::vector<NodeId> stopped;
  std::vector<NodeId> frontier{0};
  while (!frontier.empty()) {
    std::vector<NodeId> next;
    for (NodeId v : frontier) {
      if (hit(v)) {
        stopped.push_back(v);
      } else {
        for (NodeId c : tree.children(v)) next.push_back(c);
      }
    }
    frontier = std::move(next);
  }
  return StoppingTime(tree, std::move(stopped));
}

StoppingTime StoppingTime::deterministic(const EventTree& tree, int k) {
  const auto layer = tree.layer(k);
  return StoppingTime(tree, std::vector<NodeId>(layer.begin(), layer.end()));
}

std::optional<NodeId> StoppingTime::determination(NodeId leaf) const {
  const auto i = static_cast<std::size_t>(leaf - first_leaf_);
  if (leaf < first_leaf_ || i >= by_leaf_.size()) throw ValidationError("determination: not a leaf");
  return by_leaf_[i];
}

// --------------------------------------------------------------- operations

Rational conditional_mean(const EventTree& tree, const ProbMeasure& P, NodeId v, int k,
                          const std::function<Rational(NodeId)>& f) {
  const auto [lo, hi] = tree.descendants_at(v, k);
  Rational weighted = 0;
  bool all_zero = true;
  for (NodeId w = lo; w < hi; ++w) {
    const Rational value = f(w);
    if (value != 0) all_zero = false;
    weighted += P.atom_mass(w) * value;
  }
  const Rational& mass = P.atom_mass(v);
  if (mass == 0) {
    if (all_zero) return Rational(0);
    throw NullAtomError(v);
  }
  return weighted / mass;
}

std::vector<RationalVector> conditional_expectation(const EventTree& tree, const ProbMeasure& P,
                                                    const AdaptedProcess& X, int k, int j) {
  if (j > k) throw ValidationError("conditional_expectation requires j <= k");
  if (X.size() != tree.size()) throw ValidationError("process does not match tree");
  std::vector<RationalVector> out;
  const auto layer = tree.layer(j);
  out.reserve(layer.size());
  for (NodeId v : layer) {
    RationalVector value(static_cast<std::size_t>(X.dim()));
    for (int c = 0; c < X.dim(); ++c) {
      value[static_cast<std::size_t>(c)] =
          conditional_mean(tree, P, v, k, [&](NodeId w) -> Rational { return X.at(w)[static_cast<std::size_t>(c)]; });
    }
    out.push_back(std::move(value));
  }
  return out;
}

AdaptedProcess stochastic_integral(const EventTree& tree, const AdaptedProcess& S, const Strategy& H) {
  if (S.dim() != H.dim()) {
    throw ValidationError("stochastic_integral: price has dimension " + std::to_string(S.dim()) +
                          " but strategy has " + std::to_string(H.dim()));
  }
  if (S.size() != tree.size() || H.size() != tree.decision_count()) {
    throw ValidationError("stochastic_integral: shape does not match tree");
  }
  RationalVector gains(tree.size(), Rational(0));
  for (std::size_t i = 1; i < tree.size(); ++i) {
    const NodeId v = static_cast<NodeId>(i);
    const NodeId p = *tree.parent(v);
    const auto& h = H.at(p);
    Rational inc = 0;
    for (std::size_t c = 0; c < h.size(); ++c) inc += h[c] * (S.at(v)[c] - S.at(p)[c]);
    gains[i] = gains[static_cast<std::size_t>(p)] + inc;
  }
  return AdaptedProcess::scalar(tree, std::move(gains));
}

bool DoobDecomposition::nondecreasing() const {
  return std::all_of(compensator_increment.steps().begin(), compensator_increment.steps().end(),
                     [](const RationalVector& s) { return s[0] >= 0; });
}

DoobDecomposition doob_decomposition(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& Z) {
  if (!P.strictly_positive()) throw ValidationError("doob_decomposition requires a strictly positive measure");
  if (Z.dim() != 1) throw ValidationError("doob_decomposition expects a scalar process");

  std::vector<RationalVector> increments(tree.decision_count());
  for (std::size_t i = 0; i < tree.decision_count(); ++i) {
    const NodeId v = static_cast<NodeId>(i);
    const Rational next = conditional_mean(tree, P, v, tree.time(v) + 1, [&](NodeId w) -> Rational { return Z.scalar_at(w); });
    increments[i] = RationalVector{Z.scalar_at(v) - next};
  }

  RationalVector a(tree.size(), Rational(0));
  RationalVector m(tree.size(), Rational(0));
  const Rational& z0 = Z.scalar_at(0);
  for (std::size_t i = 1; i < tree.size(); ++i) {
    const auto p = static_cast<std::size_t>(*tree.parent(static_cast<NodeId>(i)));
    a[i] = a[p] + increments[p][0];
    m[i] = Z.scalar_at(static_cast<NodeId>(i)) - z0 + a[i];
  }

  DoobDecomposition out{AdaptedProcess::scalar(tree, std::move(m)), Strategy(tree, 1, std::move(increments)),
                        AdaptedProcess::scalar(tree, std::move(a))};
  if (!is_martingale(tree, P, out.martingale)) {
    throw Error("doob_decomposition: martingale part failed the exact check");
  }
  return out;
}

namespace {

bool check_drift(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& X, bool equality) {
  for (std::size_t i = 0; i < tree.decision_count(); ++i) {
    const NodeId v = static_cast<NodeId>(i);
    if (P.atom_mass(v) == 0) continue;
    for (int c = 0; c < X.dim(); ++c) {
      const auto ci = static_cast<std::size_t>(c);
      const Rational next = conditional_mean(tree, P, v, tree.time(v) + 1, [&](NodeId w) -> Rational { return X.at(w)[ci]; });
      if (equality ? next != X.at(v)[ci] : next > X.at(v)[ci]) return false;
    }
  }
  return true;
}

}  // namespace

bool is_supermartingale(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& X) {
  return check_drift(tree, P, X, false);
}

bool is_martingale(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& X) {
  return check_drift(tree, P, X, true);
}

}  // namespace deflab
