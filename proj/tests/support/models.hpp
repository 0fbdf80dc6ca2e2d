#pragma once

#include <deflab/filtered_space.hpp>
#include <deflab/fixtures.hpp>
#include <deflab/rational.hpp>
#include <deflab/tree_io.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace deflab::testkit {

// A tree with a strictly positive measure and a price process.
struct Model {
  EventTree tree;
  ProbMeasure P;
  AdaptedProcess S;
};

struct ModelOptions {
  int max_horizon = 4;
  int max_branching = 3;
  int max_dim = 1;
  long price_bound = 4;  // prices in [-bound, bound]
};

inline Rational random_rational(std::mt19937_64& rng, long bound, long max_den = 4) {
  std::uniform_int_distribution<long> den_dist(1, max_den);
  const long den = den_dist(rng);
  std::uniform_int_distribution<long> num_dist(-bound * den, bound * den);
  return make_rational(num_dist(rng), den);
}

// Random shape, positive transition weights in 1..5 and prices in
// [-bound, bound]. Half of the trees keep every parent price inside the
// convex hull of its children, so both NA1 verdicts occur often.
inline Model random_model(std::uint64_t seed, const ModelOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  const int horizon = std::uniform_int_distribution<int>(1, opt.max_horizon)(rng);
  const int dim = std::uniform_int_distribution<int>(1, opt.max_dim)(rng);
  const bool viable = std::bernoulli_distribution(0.5)(rng);
  std::uniform_int_distribution<int> branch(1, opt.max_branching);

  std::vector<int> counts;
  std::size_t layer = 1;
  for (int t = 0; t < horizon; ++t) {
    std::size_t next = 0;
    for (std::size_t i = 0; i < layer; ++i) {
      const int c = branch(rng);
      counts.push_back(c);
      next += static_cast<std::size_t>(c);
    }
    layer = next;
  }
  EventTree tree = EventTree::from_child_counts(dim, horizon, counts);

  RationalVector edge(tree.size(), Rational(0));
  std::uniform_int_distribution<long> weight(1, 5);
  for (NodeId v = 0; v < static_cast<NodeId>(tree.decision_count()); ++v) {
    const auto kids = tree.children(v);
    RationalVector w;
    Rational total = 0;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      w.push_back(Rational(weight(rng)));
      total += w.back();
    }
    for (std::size_t i = 0; i < kids.size(); ++i) edge[static_cast<std::size_t>(kids[i])] = w[i] / total;
  }
  ProbMeasure P = ProbMeasure::from_transitions(tree, edge);

  const Rational hi(opt.price_bound);
  const Rational lo(-opt.price_bound);
  std::vector<RationalVector> values(tree.size(), RationalVector(static_cast<std::size_t>(dim)));
  for (int c = 0; c < dim; ++c) values[0][static_cast<std::size_t>(c)] = random_rational(rng, opt.price_bound);
  for (NodeId v = 0; v < static_cast<NodeId>(tree.decision_count()); ++v) {
    const auto kids = tree.children(v);
    const auto& parent = values[static_cast<std::size_t>(v)];
    if (!viable) {
      for (NodeId k : kids) {
        for (std::size_t c = 0; c < static_cast<std::size_t>(dim); ++c) {
          values[static_cast<std::size_t>(k)][c] =
              std::bernoulli_distribution(0.15)(rng) ? parent[c] : random_rational(rng, opt.price_bound);
        }
      }
      continue;
    }
    // Viable step: the last increment is minus a positive combination of
    // the others, so zero is inside the relative interior of the hull.
    std::vector<RationalVector> inc(kids.size(), RationalVector(static_cast<std::size_t>(dim), Rational(0)));
    if (kids.size() > 1 && !std::bernoulli_distribution(0.1)(rng)) {
      std::uniform_int_distribution<long> alpha(1, 4);
      for (std::size_t i = 0; i + 1 < kids.size(); ++i) {
        const Rational a = make_rational(alpha(rng), 4);
        for (std::size_t c = 0; c < static_cast<std::size_t>(dim); ++c) {
          inc[i][c] = random_rational(rng, 2);
          inc.back()[c] -= a * inc[i][c];
        }
      }
    }
    // halve until every child stays inside the price box
    for (int halvings = 0;; ++halvings) {
      bool fits = true;
      for (const auto& d : inc) {
        for (std::size_t c = 0; c < d.size(); ++c) fits = fits && parent[c] + d[c] <= hi && parent[c] + d[c] >= lo;
      }
      if (fits) break;
      for (auto& d : inc) {
        for (auto& x : d) x = halvings < 8 ? x / 2 : Rational(0);
      }
    }
    for (std::size_t i = 0; i < kids.size(); ++i) {
      for (std::size_t c = 0; c < static_cast<std::size_t>(dim); ++c) {
        values[static_cast<std::size_t>(kids[i])][c] = parent[c] + inc[i][c];
      }
    }
  }
  AdaptedProcess S(tree, dim, std::move(values));
  return Model{std::move(tree), std::move(P), std::move(S)};
}

// Random label per leaf from a pool of 1..max_labels names.
inline std::vector<std::string> random_labels(const EventTree& tree, std::uint64_t seed, int max_labels = 3) {
  std::mt19937_64 rng(seed);
  const int m = std::uniform_int_distribution<int>(1, max_labels)(rng);
  std::uniform_int_distribution<int> pick(0, m - 1);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) labels.push_back("l" + std::to_string(pick(rng)));
  return labels;
}

inline Model fixture_model(const std::string& name) {
  const auto f = fixtures::make(name);
  const TreeFile& file = *f.file;
  return Model{file.tree, file.measure(), file.process("S")};
}

}  // namespace deflab::testkit
