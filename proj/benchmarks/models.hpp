#pragma once

#include <deflab/filtered_space.hpp>

#include <algorithm>
#include <vector>

namespace deflab::bench {

// Uniform tree where child i of every node scales the parent price by factors[i].
struct Market {
  EventTree tree;
  ProbMeasure P;
  AdaptedProcess S;
};

inline Market multiplicative_market(int horizon, int branching) {
  EventTree tree = EventTree::uniform(1, horizon, branching);
  std::vector<Rational> factors;
  for (int i = 0; i < branching; ++i) factors.push_back(make_rational(2 * branching - i, branching + 1));
  factors.back() = make_rational(1, 2);
  std::vector<RationalVector> values(tree.size(), RationalVector{Rational(1)});
  for (NodeId v = 0; v < static_cast<NodeId>(tree.decision_count()); ++v) {
    const auto kids = tree.children(v);
    for (std::size_t i = 0; i < kids.size(); ++i) {
      values[static_cast<std::size_t>(kids[i])][0] = values[static_cast<std::size_t>(v)][0] * factors[i];
    }
  }
  ProbMeasure P = ProbMeasure::uniform(tree);
  AdaptedProcess S(tree, 1, std::move(values));
  return Market{std::move(tree), std::move(P), std::move(S)};
}

}  // namespace deflab::bench
