#include <deflab/error.hpp>
#include <deflab/fixtures.hpp>

#include <functional>
#include <map>

namespace deflab::fixtures {

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

TreeFile with_scalar(EventTree tree, RationalVector leaf_mass, const std::string& name, RationalVector values) {
  ProbMeasure P(tree, std::move(leaf_mass));
  AdaptedProcess X = AdaptedProcess::scalar(tree, std::move(values));
  TreeFile file{std::move(tree), std::move(P), {}, {}};
  file.set_process(name, std::move(X));
  return file;
}

TreeFile singleton_path(int horizon, RationalVector S, RationalVector Z) {
  const std::vector<int> counts(static_cast<std::size_t>(horizon), 1);
  EventTree tree = EventTree::from_child_counts(1, horizon, counts);
  TreeFile file = with_scalar(tree, {q(1)}, "S", std::move(S));
  file.set_process("Z", AdaptedProcess::scalar(file.tree, std::move(Z)));
  return file;
}

Fixture insider_binomial() {
  Fixture f{"insider-binomial", "one-step complete binomial market with the insider label L = terminal state",
            binomial(), {{"terminal", {"up", "down"}}}, {{"event", "up"}}};
  return f;
}

Fixture insider_two_step() {
  Fixture f{"insider-two-step",
            "two-step complete binomial market, L = terminal state, insider event A = {S_2 >= 1}",
            two_step_binomial(), {{"terminal", {"uu", "ud", "du", "dd"}}}, {{"event", "uu,ud,du"}}};
  return f;
}

Fixture singleton_supermartingale() {
  Fixture f{"singleton-supermartingale",
            "one outcome, one step, strict supermartingale Z = (1, 1/2) with no equivalent probability measure",
            singleton_path(1, {q(1), q(1)}, {q(1), q(1, 2)}), {}, {}};
  return f;
}

Fixture exponential_death() {
  Fixture f{"exponential-death",
            "one outcome, two steps, S = (1, 2, 4) and Z = (1, 1/2, 1/4): Z S is constant but S dies under Q",
            singleton_path(2, {q(1), q(2), q(4)}, {q(1), q(1, 2), q(1, 4)}), {}, {}};
  return f;
}

Fixture levy_counterexample() {
  Fixture f{"levy-counterexample",
            "L = N1 - N2 + b t with death rate a; smallest integers with a > |b|", std::nullopt, {},
            {{"a", "2"}, {"b", "1"}}};
  return f;
}

Fixture jacod_coins() {
  EventTree tree = EventTree::uniform(1, 2, 2);
  RationalVector S{q(0), q(1), q(-1), q(2), q(0), q(0), q(-2)};
  TreeFile file = with_scalar(tree, {q(1, 4), q(1, 4), q(1, 4), q(1, 4)}, "S", std::move(S));
  Fixture f{"jacod-coins", "two fair coins; L is either coin", std::move(file),
            {{"first-coin", {"H", "H", "T", "T"}}, {"second-coin", {"H", "T", "H", "T"}}}, {}};
  return f;
}

const std::map<std::string, std::function<Fixture()>>& registry() {
  static const std::map<std::string, std::function<Fixture()>> r{
      {"binomial", [] { return Fixture{"binomial", "one-step binomial, S: 1 -> (2, 1/2)", binomial(), {}, {}}; }},
      {"two-step-binomial",
       [] { return Fixture{"two-step-binomial", "two binomial steps", two_step_binomial(), {}, {}}; }},
      {"deterministic-drift",
       [] { return Fixture{"deterministic-drift", "single path, S: 1 -> 2", deterministic_drift(), {}, {}}; }},
      {"insider-binomial", insider_binomial},
      {"insider-two-step", insider_two_step},
      {"singleton-supermartingale", singleton_supermartingale},
      {"exponential-death", exponential_death},
      {"levy-counterexample", levy_counterexample},
      {"jacod-coins", jacod_coins},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& Fixture::labels(const std::string& map_name) const {
  for (const auto& [n, labels] : label_maps) {
    if (n == map_name) return labels;
  }
  throw ValidationError("fixture " + name + " has no label map \"" + map_name + "\"");
}

TreeFile binomial() {
  EventTree tree = EventTree::uniform(1, 1, 2);
  return with_scalar(std::move(tree), {q(1, 2), q(1, 2)}, "S", {q(1), q(2), q(1, 2)});
}

TreeFile two_step_binomial() {
  EventTree tree = EventTree::uniform(1, 2, 2);
  return with_scalar(std::move(tree), {q(1, 4), q(1, 4), q(1, 4), q(1, 4)}, "S",
                     {q(1), q(2), q(1, 2), q(4), q(1), q(1), q(1, 4)});
}

TreeFile deterministic_drift() {
  EventTree tree = EventTree::uniform(1, 1, 1);
  return with_scalar(std::move(tree), {q(1)}, "S", {q(1), q(2)});
}

std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

Fixture make(const std::string& name) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) {
    std::string list;
    for (const auto& n : names()) list += (list.empty() ? "" : ", ") + n;
    throw ValidationError("unknown scenario \"" + name + "\"; available: " + list);
  }
  return it->second();
}

}  // namespace deflab::fixtures
