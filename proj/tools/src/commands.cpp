#include "commands.hpp"

#include <deflab/enlargement.hpp>
#include <deflab/error.hpp>
#include <deflab/fixtures.hpp>
#include <deflab/tree_io.hpp>
#include <deflab/utility_builder.hpp>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

namespace deflab::cli {

namespace {

TreeFile load_tree(const Config& cfg) {
  if (cfg.tree.empty()) throw ValidationError("--tree is required");
  return parse_tree_file(read_text_file(cfg.tree));
}

lp::PivotRule pivot(const Config& cfg) {
  if (cfg.pivot == "bland") return lp::PivotRule::Bland;
  if (cfg.pivot == "dantzig") return lp::PivotRule::Dantzig;
  throw ValidationError("--pivot must be bland or dantzig");
}

AdaptedProcess deflator_process(const Config& cfg, const TreeFile& file) {
  const AdaptedProcess& Z = file.process(cfg.deflator);
  return cfg.normalize ? normalize_deflator(file.tree, file.measure(), Z) : Z;
}

std::vector<StoppingTime> random_hitting_times(const EventTree& tree, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<StoppingTime> out;
  for (int i = 0; i < count; ++i) {
    std::vector<bool> mark(tree.size());
    for (std::size_t v = 0; v < tree.size(); ++v) mark[v] = rng() % 4 == 0;
    out.push_back(StoppingTime::hitting_time(tree, [&](NodeId v) { return mark[static_cast<std::size_t>(v)]; }));
  }
  return out;
}

Json zeta_json(int zeta) { return zeta == kNever ? Json("inf") : Json(zeta); }

EnlargementSpec load_spec(const Config& cfg, const TreeFile& file) {
  if (cfg.label_map.empty()) throw ValidationError("--label-map is required");
  return EnlargementSpec(file.tree, file.measure(), parse_label_map(read_text_file(cfg.label_map), file.tree));
}

std::vector<std::string> split_labels(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int run_check(const Config& cfg, Json& result) {
  const TreeFile file = load_tree(cfg);
  const AdaptedProcess& S = file.process(cfg.price);
  const WealthProblem problem{file.tree, file.measure(), S};
  ArbitrageReport r;
  if (cfg.both || cfg.na == cfg.na1) {
    r = check_both(problem, pivot(cfg));
  } else if (cfg.na) {
    r = check_na(problem, pivot(cfg));
  } else {
    r = check_na1(problem, pivot(cfg));
  }
  result = arbitrage_json(file.tree, r);
  bool pass = true;
  if (r.na_checked) {
    pass = pass && r.na_holds;
    if (r.arbitrage) result["arbitrage_verified"] = is_arbitrage(problem, *r.arbitrage);
  }
  if (r.na1_checked) {
    pass = pass && r.na1_holds;
    if (r.unbounded_ray) result["ray_verified"] = is_unbounded_ray(problem, *r.unbounded_ray);
  }

  if (cfg.utility_terms > 0 && r.na1_checked && r.na1_holds) {
    // every terminal wealth is below E[X] / min P, so F(k) = 0 past that bound
    Rational min_mass = file.measure().leaf_mass(0);
    for (const auto& m : file.measure().leaf_masses()) min_mass = std::min(min_mass, m);
    const Rational bound = *r.optimal_value / min_mass;
    const mpz_class top = bound.get_num() / bound.get_den();
    RationalVector head(top.get_ui() + 1, Rational(1));
    UtilityBuilderOptions opt;
    opt.num_g = cfg.utility_terms;
    opt.n_sum = cfg.n_sum;
    const UtilityBuilderResult built = build_utility(FiniteTail(head), opt);
    const UtilityValue value = finite_utility_check(problem, built.utility(), pivot(cfg));
    result["utility"] = Json{{"wealth_bound", rational(bound)},
                             {"terms", cfg.utility_terms},
                             {"remainder_bound", rational(built.remainder_bound)},
                             {"divergence_certified", built.divergence_certified},
                             {"tail_sum_certified", built.tail_sum_certified},
                             {"sup_expected_utility", value.value ? rational(*value.value) : Json("inf")}};
  }
  return pass ? 0 : 1;
}

int run_deflate(const Config& cfg, Json& result) {
  if (cfg.out.empty()) throw ValidationError("--out is required");
  TreeFile file = load_tree(cfg);
  const AdaptedProcess& S = file.process(cfg.price);
  const WealthProblem problem{file.tree, file.measure(), S};
  try {
    const Deflator d = construct_deflator(problem);
    AdaptedProcess Z = cfg.normalize ? normalize_deflator(file.tree, file.measure(), d.Z) : d.Z;
    const DeflationReport check = verify_deflation(problem, Z, cfg.trials, cfg.seed);
    result = Json{{"na1", true},
                  {"Z0", rational(Z.scalar_at(0))},
                  {"normalized", cfg.normalize},
                  {"supermartingale", d.doob.nondecreasing()},
                  {"deflation", deflation_json(file.tree, check)},
                  {"written", cfg.out},
                  {"process", cfg.name}};
    file.set_process(cfg.name, std::move(Z));
    write_text_file_atomic(cfg.out, serialize_tree_file(file));
    return check.ok() ? 0 : 1;
  } catch (const NA1FailureError& e) {
    result = Json{{"na1", false}, {"error", e.what()}, {"node", e.node()}, {"ray", vector_json(e.ray())}};
    return 1;
  }
}

int run_foellmer(const Config& cfg, Json& result) {
  if (cfg.out.empty()) throw ValidationError("--out is required");
  const TreeFile file = load_tree(cfg);
  const DominatingMeasure dm = build_dominating_measure(file.tree, file.measure(), deflator_process(cfg, file));
  Json points = Json::array();
  for (std::size_t i = 0; i < file.tree.leaf_count(); ++i) {
    const NodeId leaf = file.tree.first_leaf() + static_cast<NodeId>(i);
    for (std::size_t s = 0; s < dm.space.slots(); ++s) {
      const int zeta = dm.space.zeta(s);
      points.push_back({{"leaf", leaf}, {"zeta", zeta_json(zeta)}, {"mass", rational(dm.mass(i, zeta))}});
    }
  }
  write_text_file_atomic(cfg.out, Json{{"points", std::move(points)}}.dump(2) + "\n");
  const KyReport ky = verify_ky(dm);
  result = Json{{"total_mass", rational(dm.total_mass())}, {"written", cfg.out}, {"ky", ky_json(ky)}};
  return ky.ok() ? 0 : 1;
}

int run_ky_verify(const Config& cfg, Json& result) {
  const TreeFile file = load_tree(cfg);
  const DominatingMeasure dm = build_dominating_measure(file.tree, file.measure(), deflator_process(cfg, file));
  const KyReport ky = verify_ky(dm, random_hitting_times(file.tree, cfg.stopping_times, cfg.seed));
  const DominationReport dom = check_domination(dm);
  Json offending = Json::array();
  for (const auto& [leaf, zeta] : dom.offending) offending.push_back({{"leaf", leaf}, {"zeta", zeta_json(zeta)}});
  result = ky_json(ky);
  result["domination"] = Json{{"dominated", dom.dominated}, {"atoms_checked", dom.atoms_checked},
                              {"offending", std::move(offending)}};
  return ky.ok() ? 0 : 1;
}

int run_stopped_check(const Config& cfg, Json& result) {
  const TreeFile file = load_tree(cfg);
  const DominatingMeasure dm = build_dominating_measure(file.tree, file.measure(), deflator_process(cfg, file));
  const StoppedPriceReport r = check_stopped_price(dm, file.process(cfg.price));
  Json viol = Json::array();
  for (const auto& a : r.violations) {
    viol.push_back({{"node", a.node}, {"time", a.time}, {"drift", vector_json(a.drift)}});
  }
  result = Json{{"martingale", r.martingale},
                {"atoms_checked", r.atoms_checked},
                {"violations", std::move(viol)},
                {"converse_deflator", r.converse_deflator},
                {"converse", deflation_json(file.tree, r.converse)}};
  return r.martingale ? 0 : 1;
}

int run_enlarge_jacod(const Config& cfg, Json& result) {
  const TreeFile file = load_tree(cfg);
  const EnlargementSpec spec = load_spec(cfg, file);
  const JacodReport r = jacod_check(spec);
  Json rows = Json::array();
  for (std::size_t v = 0; v < file.tree.size(); ++v) {
    for (std::size_t l = 0; l < spec.label_count(); ++l) {
      rows.push_back({{"node", v},
                      {"time", file.tree.time(static_cast<NodeId>(v))},
                      {"label", spec.label_names()[l]},
                      {"P_t", rational(r.P_t[v][l])},
                      {"Y", rational(r.Y[v][l])}});
    }
  }
  Json P_L = Json::object();
  for (std::size_t l = 0; l < spec.label_count(); ++l) P_L[spec.label_names()[l]] = rational(r.P_L[l]);
  const GeneralizedJacodReport g =
      generalized_jacod_check(file.tree, file.measure(), initial_enlargement_partitions(spec));
  result = Json{{"holds", r.holds},
                {"reverse_holds", r.reverse_holds},
                {"equivalent", r.equivalent},
                {"P_L", std::move(P_L)},
                {"density", std::move(rows)},
                {"generalized", {{"holds", g.holds}, {"comparisons", g.comparisons}}}};
  return r.holds ? 0 : 1;
}

int run_enlarge_universal(const Config& cfg, Json& result) {
  const TreeFile file = load_tree(cfg);
  const EnlargementSpec spec = load_spec(cfg, file);
  const UniversalDensity ud = universal_density(spec);
  std::vector<AdaptedProcess> family = indicator_martingales(file.tree, file.measure());
  const std::size_t indicators = family.size();
  std::mt19937_64 rng(cfg.seed);
  for (int i = 0; i < cfg.supermartingales; ++i) family.push_back(random_supermartingale(file.tree, file.measure(), rng()));
  const UniversalCheckReport check = check_universal(ud, family);
  Json atoms = Json::array();
  for (std::size_t g = 0; g < ud.g.tree.size(); ++g) {
    atoms.push_back({{"g_node", g},
                     {"f_node", ud.g.f_node[g]},
                     {"label", ud.g.label[g] < 0 ? Json(nullptr) : Json(spec.label_names()[static_cast<std::size_t>(ud.g.label[g])])},
                     {"Z", rational(ud.Z.scalar_at(static_cast<NodeId>(g)))}});
  }
  Json viol = Json::array();
  for (const auto& v : check.violations) {
    viol.push_back({{"process", v.process}, {"g_node", v.g_node}, {"slack", rational(v.slack)}});
  }
  result = Json{{"strictly_positive", ud.strictly_positive},
                {"Z", std::move(atoms)},
                {"supermartingale_check",
                 {{"ok", check.ok},
                  {"indicator_martingales", indicators},
                  {"random_supermartingales", cfg.supermartingales},
                  {"inequalities", check.inequalities_checked},
                  {"violations", std::move(viol)}}}};
  return check.ok && ud.strictly_positive ? 0 : 1;
}

int run_enlarge_insider(const Config& cfg, Json& result) {
  const TreeFile file = load_tree(cfg);
  const EnlargementSpec spec = load_spec(cfg, file);
  const std::vector<std::string> event = split_labels(cfg.event);
  if (event.empty()) throw ValidationError("--event needs at least one label");
  const InsiderReport r = insider_example(spec, file.process(cfg.price), event);
  const GTree g = build_g_tree(spec);
  result = Json{{"event", event},
                {"P_A", rational(r.P_A)},
                {"replication",
                 {{"price", rational(r.replication.price)},
                  {"exact", r.replication_exact},
                  {"hedge", strategy_json(file.tree, r.replication.hedge)}}},
                {"insider_strategy", strategy_json(g.tree, r.insider_strategy)},
                {"insider_arbitrage", r.insider_arbitrage},
                {"emm_infeasible", r.emm_infeasible},
                {"farkas", vector_json(r.farkas)},
                {"farkas_verified", r.farkas_verified},
                {"na1_under_f", r.na1_under_f},
                {"g_market", arbitrage_json(g.tree, r.g_market)},
                {"product_deflator", deflation_json(g.tree, r.product_deflator)}};
  if (r.emm) result["emm"] = vector_json(*r.emm);
  const bool pass = r.replication_exact && r.insider_arbitrage && r.emm_infeasible && r.farkas_verified;
  return pass ? 0 : 1;
}

int run_enlarge_logutility(const Config& cfg, Json& result) {
  const TreeFile file = load_tree(cfg);
  const EnlargementSpec spec = load_spec(cfg, file);
  const LogUtilityReport r = log_utility_identity(spec, file.process(cfg.price));
  Json per_label = Json::object();
  for (std::size_t l = 0; l < spec.label_count(); ++l) per_label[spec.label_names()[l]] = r.per_label[l];
  result = Json{{"q_star", vector_json(r.q_star)},
                {"u_F", r.u_F},
                {"u_G", r.u_G},
                {"mutual_information", r.mutual_information},
                {"residual", r.residual},
                {"tolerance", r.tolerance},
                {"identity_holds", r.identity_holds},
                {"per_label_divergence", std::move(per_label)}};
  return r.identity_holds ? 0 : 1;
}

namespace {

using ParamMap = std::map<std::string, double>;

ParamMap load_params(const std::string& path, const std::set<std::string>& allowed) {
  ParamMap out;
  if (path.empty()) return out;
  Json root;
  try {
    root = Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("params: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("params: expected an object");
  for (const auto& [key, value] : root.items()) {
    if (!allowed.count(key)) throw ParseError("params[\"" + key + "\"]: unknown key");
    if (key == "pi") continue;
    if (value.is_number()) {
      out[key] = value.get<double>();
    } else if (value.is_string()) {
      try {
        out[key] = to_double(parse_rational(value.get<std::string>()));
      } catch (const ParseError& e) {
        throw ParseError("params[\"" + key + "\"]: " + e.what());
      }
    } else if (value.is_boolean()) {
      out[key] = value.get<bool>() ? 1 : 0;
    } else {
      throw ParseError("params[\"" + key + "\"]: expected a number");
    }
  }
  return out;
}

std::vector<double> load_pi(const std::string& path, std::vector<double> fallback) {
  if (path.empty()) return fallback;
  const Json root = Json::parse(read_text_file(path));
  if (!root.contains("pi")) return fallback;
  const Json& pi = root["pi"];
  if (pi.is_number()) return {pi.get<double>()};
  if (!pi.is_array() || pi.empty()) throw ParseError("params[\"pi\"]: expected a number or a nonempty array");
  std::vector<double> out;
  for (const auto& x : pi) {
    if (!x.is_number()) throw ParseError("params[\"pi\"]: expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void write_csv(const std::string& path, const mc::PathBatch& batch) {
  std::ostringstream os;
  os.precision(17);
  os << "path";
  for (const auto& c : batch.columns) os << ',' << c;
  os << '\n';
  const std::size_t n = batch.values.empty() ? 0 : batch.values[0].size();
  for (std::size_t p = 0; p < n; ++p) {
    os << p;
    for (const auto& col : batch.values) os << ',' << col[p];
    os << '\n';
  }
  write_text_file_atomic(path, os.str());
}

double get(const ParamMap& m, const std::string& key, double fallback) {
  const auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

}  // namespace

int run_simulate(const Config& cfg, Json& result) {
  const mc::RunOptions opt{cfg.threads, cfg.threshold};
  const mc::PathBatch* batch = nullptr;
  int code = 0;
  mc::DiffusionResult diffusion;
  mc::LevyResult levy;
  mc::SurvivalResult survival;
  mc::InsiderResult insider;

  if (cfg.scenario == "diffusion") {
    const ParamMap p = load_params(cfg.params, {"mu", "sigma", "s0", "horizon", "pi"});
    mc::DiffusionScenario sc;
    sc.mu = get(p, "mu", sc.mu);
    sc.sigma = get(p, "sigma", sc.sigma);
    sc.s0 = get(p, "s0", sc.s0);
    sc.horizon = get(p, "horizon", sc.horizon);
    sc.pi = load_pi(cfg.params, sc.pi);
    sc.steps = cfg.steps;
    sc.paths = cfg.paths;
    sc.seed = cfg.seed;
    diffusion = mc::simulate_deflated_wealth(sc, opt);
    result = Json{{"scenario", "diffusion"},
                  {"parameters", {{"mu", sc.mu}, {"sigma", sc.sigma}, {"s0", sc.s0}, {"horizon", sc.horizon}, {"pi", sc.pi}}},
                  {"lambda", diffusion.lambda},
                  {"tests", {test_json(diffusion.density), test_json(diffusion.price), test_json(diffusion.wealth)}}};
    code = diffusion.density.consistent() && diffusion.price.consistent() && diffusion.wealth.consistent() ? 0 : 1;
    batch = &diffusion.batch;
  } else if (cfg.scenario == "levy") {
    const ParamMap p = load_params(cfg.params, {"a", "b"});
    mc::LevyScenario sc;
    sc.a = get(p, "a", sc.a);
    sc.b = get(p, "b", sc.b);
    sc.steps = cfg.steps;
    sc.paths = cfg.paths;
    sc.seed = cfg.seed;
    levy = mc::simulate_levy_counterexample(sc, opt);
    const bool drifted = sc.b != 0;
    result = Json{{"scenario", "levy"},
                  {"parameters", {{"a", sc.a}, {"b", sc.b}}},
                  {"analytic_bias", levy.analytic_bias},
                  {"raw_expected", drifted ? "reject" : "consistent"},
                  {"tests", {test_json(levy.raw), test_json(levy.raw_bias), test_json(levy.corrected)}}};
    const bool raw_ok = drifted ? levy.raw.rejected() && levy.raw_bias.consistent() : levy.raw.consistent();
    code = raw_ok && levy.corrected.consistent() ? 0 : 1;
    batch = &levy.batch;
  } else if (cfg.scenario == "survival") {
    const ParamMap p = load_params(cfg.params, {"a", "b", "pi"});
    mc::LevyScenario sc;
    sc.a = get(p, "a", sc.a);
    sc.b = get(p, "b", sc.b);
    sc.steps = cfg.steps;
    sc.paths = cfg.paths;
    sc.seed = cfg.seed;
    const std::vector<double> pi = load_pi(cfg.params, {1.0});
    survival = mc::simulate_survival_measure(sc, pi, opt);
    result = Json{{"scenario", "survival"},
                  {"parameters", {{"a", sc.a}, {"b", sc.b}, {"pi", pi}}},
                  {"analytic_gap", survival.analytic_gap},
                  {"supermartingale", survival.supermartingale},
                  {"strictly_negative", survival.strictly_negative},
                  {"tests", {test_json(survival.gap)}}};
    code = survival.supermartingale && survival.strictly_negative ? 0 : 1;
    batch = &survival.batch;
  } else if (cfg.scenario == "insider") {
    const ParamMap p = load_params(cfg.params, {"horizon", "zero_drift"});
    mc::InsiderScenario sc;
    sc.horizon = get(p, "horizon", sc.horizon);
    sc.zero_drift = get(p, "zero_drift", 0) != 0;
    sc.steps = cfg.steps;
    sc.paths = cfg.paths;
    sc.seed = cfg.seed;
    insider = mc::information_drift_deflator(sc, opt);
    result = Json{{"scenario", "insider"},
                  {"parameters", {{"horizon", sc.horizon}, {"zero_drift", sc.zero_drift}}},
                  {"discretization_allowance", insider.allowance},
                  {"tests", {test_json(insider.density), test_json(insider.deflated), test_json(insider.exact_density)}}};
    code = insider.density.consistent() && insider.deflated.consistent() ? 0 : 1;
    batch = &insider.batch;
  } else {
    throw ValidationError("--scenario must be one of diffusion, levy, survival, insider");
  }
  if (!cfg.csv.empty() && batch) {
    write_csv(cfg.csv, *batch);
    result["csv"] = cfg.csv;
  }
  return code;
}

int run_scenario(const Config& cfg, Json& result) {
  if (cfg.list) {
    result = Json{{"available", fixtures::names()}};
    return 0;
  }
  if (cfg.scenario.empty()) {
    std::string names;
    for (const auto& n : fixtures::names()) names += (names.empty() ? "" : ", ") + n;
    throw ValidationError("scenario name required; available: " + names);
  }
  const fixtures::Fixture f = fixtures::make(cfg.scenario);
  const std::filesystem::path dir = std::filesystem::path(cfg.dir) / f.name;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  Json files = Json::array();
  std::ostringstream readme;
  readme << "# " << f.name << "\n\n" << f.summary << ".\n\n## Files\n\n";
  if (f.file) {
    write_text_file_atomic((dir / "tree.json").string(), serialize_tree_file(*f.file));
    files.push_back((dir / "tree.json").string());
    readme << "- `tree.json`: event tree, measure `P` and processes";
    for (const auto& [name, _] : f.file->processes) readme << " `" << name << "`";
    readme << "\n";
  }
  for (const auto& [name, labels] : f.label_maps) {
    const std::string file = "labels-" + name + ".json";
    write_text_file_atomic((dir / file).string(), serialize_label_map(f.file->tree, labels));
    files.push_back((dir / file).string());
    readme << "- `" << file << "`: label map, L = " << name << "\n";
  }
  if (!f.params.empty()) {
    Json params = Json::object();
    for (const auto& [k, v] : f.params) params[k] = v;
    write_text_file_atomic((dir / "params.json").string(), params.dump(2) + "\n");
    files.push_back((dir / "params.json").string());
    readme << "- `params.json`: scenario parameters\n";
  }
  readme << "\n## Try\n\n```\n";
  if (f.name == "levy-counterexample") {
    readme << "deflab simulate --scenario levy --params params.json\n";
  } else if (!f.label_maps.empty()) {
    const std::string labels = "labels-" + f.label_maps.front().first + ".json";
    readme << "deflab enlarge jacod --tree tree.json --label-map " << labels << "\n";
    if (!f.params.empty()) {
      readme << "deflab enlarge insider --tree tree.json --label-map " << labels << " --price S --event "
             << f.params.front().second << "\n";
      readme << "deflab enlarge logutility --tree tree.json --label-map " << labels << " --price S\n";
    }
  } else if (f.file && f.file->processes.size() > 1) {
    readme << "deflab ky-verify --tree tree.json --deflator Z\n";
    readme << "deflab stopped-check --tree tree.json --deflator Z --price S\n";
  } else {
    readme << "deflab check --tree tree.json --price S --both\n";
  }
  readme << "```\n";
  write_text_file_atomic((dir / "README.md").string(), readme.str());
  files.push_back((dir / "README.md").string());
  result = Json{{"scenario", f.name}, {"files", std::move(files)}};
  return 0;
}

}  // namespace deflab::cli
