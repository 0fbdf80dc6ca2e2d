#include "report.hpp"

#include <cmath>

namespace deflab::cli {

Json Config::to_json() const {
  return Json{{"command", command},
              {"seed", seed},
              {"seed_source", seed_source},
              {"threads", threads},
              {"paths", paths},
              {"steps", steps},
              {"z_threshold", threshold},
              {"pivot", pivot},
              {"n_sum", n_sum},
              {"generator", mc::kGenerator},
              {"tree", tree},
              {"price", price},
              {"deflator", deflator},
              {"out", out},
              {"name", name},
              {"label_map", label_map},
              {"event", event},
              {"scenario", scenario},
              {"params", params},
              {"csv", csv},
              {"dir", dir},
              {"na", na},
              {"na1", na1},
              {"both", both},
              {"normalize", normalize},
              {"trials", trials},
              {"stopping_times", stopping_times},
              {"supermartingales", supermartingales},
              {"utility_terms", utility_terms},
              {"report", report}};
}

Json rational(const Rational& x) { return format_rational(x); }

Json vector_json(const RationalVector& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(format_rational(x));
  return a;
}

Json process_json(const EventTree& tree, const AdaptedProcess& X) {
  Json o = Json::object();
  for (std::size_t i = 0; i < tree.size(); ++i) o[std::to_string(i)] = vector_json(X.at(static_cast<NodeId>(i)));
  return o;
}

Json strategy_json(const EventTree& tree, const Strategy& H) {
  Json o = Json::object();
  for (std::size_t i = 0; i < tree.decision_count(); ++i) {
    o[std::to_string(i)] = vector_json(H.at(static_cast<NodeId>(i)));
  }
  return o;
}

Json arbitrage_json(const EventTree& tree, const ArbitrageReport& r) {
  Json o = Json::object();
  if (r.na_checked) {
    o["na"] = r.na_holds;
    o["na_optimum"] = rational(r.na_optimum);
    if (r.arbitrage) o["arbitrage"] = strategy_json(tree, *r.arbitrage);
  }
  if (r.na1_checked) {
    o["na1"] = r.na1_holds;
    o["optimal_value"] = r.optimal_value ? rational(*r.optimal_value) : Json("inf");
    if (r.optimal_strategy) o["optimal_strategy"] = strategy_json(tree, *r.optimal_strategy);
    if (r.unbounded_ray) o["unbounded_ray"] = strategy_json(tree, *r.unbounded_ray);
  }
  o["pivots"] = r.pivots;
  return o;
}

Json deflation_json(const EventTree& tree, const DeflationReport& r) {
  Json viol = Json::array();
  for (const auto& v : r.certificate_violations) {
    Json e{{"node", v.node}, {"unbounded", v.unbounded}, {"step", vector_json(v.step)}};
    if (!v.unbounded) e["slack"] = rational(v.slack);
    viol.push_back(std::move(e));
  }
  Json sampled = Json::array();
  for (const auto& v : r.sampled_violations) {
    Json e{{"node", v.node}, {"slack", rational(v.slack)}, {"step", vector_json(v.step)}};
    if (v.strategy) e["strategy"] = strategy_json(tree, *v.strategy);
    sampled.push_back(std::move(e));
  }
  return Json{{"ok", r.ok()},
              {"certified", r.certified},
              {"worst_certificate_slack", rational(r.worst_certificate_slack)},
              {"certificate_violations", std::move(viol)},
              {"sampled_ok", r.sampled_ok},
              {"trials", r.trials},
              {"worst_sampled_slack", r.worst_sampled_slack ? rational(*r.worst_sampled_slack) : Json(nullptr)},
              {"sampled_violations", std::move(sampled)}};
}

Json ky_json(const KyReport& r) {
  Json failures = Json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"property", f.property}, {"node", f.node}, {"time", f.time}, {"detail", f.detail}});
  }
  return Json{{"ok", r.ok()},
              {"mass", r.mass_ok},
              {"property1", r.property1},
              {"property2", r.property2},
              {"property3", r.property3},
              {"stopping_times", r.stopping_ok},
              {"stopping_times_checked", r.stopping_times_checked},
              {"no_death", r.no_death},
              {"failures", std::move(failures)}};
}

namespace {

Json finite(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

}  // namespace

Json test_json(const mc::MartingaleTest& t) {
  return Json{{"quantity", t.quantity},
              {"mean", finite(t.mean)},
              {"se", finite(t.se)},
              {"z", finite(t.z)},
              {"target", t.target},
              {"threshold", t.threshold},
              {"allowance", t.allowance},
              {"paths", t.paths},
              {"verdict", mc::to_string(t.verdict)}};
}

}  // namespace deflab::cli
