#include "commands.hpp"

#include <deflab/error.hpp>
#include <deflab/tree_io.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

namespace {

using deflab::cli::Config;
using deflab::cli::Json;

struct Command {
  std::string module;
  std::string operation;
  std::function<int(const Config&, Json&)> run;
};

void add_report(CLI::App* sub, Config& cfg) {
  sub->add_option("--report", cfg.report, "Write the JSON report here instead of stdout");
}

void add_tree(CLI::App* sub, Config& cfg) {
  sub->add_option("--tree", cfg.tree, "Tree file (JSON)")->required();
}

std::string markdown_reference(CLI::App& app) {
  std::ostringstream os;
  os << "# deflab command reference\n\n"
     << "Generated by `deflab docs`. Exit codes: 0 pass, 1 fail verdict, 2 usage or I/O error.\n"
     << "`DEFLATOR_LAB_SEED` overrides `--seed`.\n\n"
     << "## deflab\n\n```\n" << app.get_formatter()->make_help(&app, "deflab", CLI::AppFormatMode::Normal) << "```\n";
  std::function<void(CLI::App*, const std::string&)> visit = [&](CLI::App* sub, const std::string& prefix) {
    if (sub->get_group().empty()) return;
    const std::string name = prefix + " " + sub->get_name();
    os << "\n## " << name << "\n\n```\n" << sub->help() << "```\n";
    for (CLI::App* child : sub->get_subcommands({})) visit(child, name);
  };
  for (CLI::App* sub : app.get_subcommands({})) visit(sub, "deflab");
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  CLI::App app{"Exact arbitrage, deflator and enlargement laboratory on event trees, plus Monte Carlo checks", "deflab"};
  app.set_version_flag("--version", deflab::cli::kVersion);
  app.require_subcommand(1);
  app.add_option("--seed", cfg.seed, "Random seed (overridden by DEFLATOR_LAB_SEED)")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads for simulate")->capture_default_str();
  app.add_option("--z-threshold", cfg.threshold, "Two-sided z critical value for statistical verdicts")->capture_default_str();
  app.add_option("--pivot", cfg.pivot, "LP pivot rule")
      ->check(CLI::IsMember({"bland", "dantzig"}))
      ->capture_default_str();
  app.add_option("--n-sum", cfg.n_sum, "Truncation of the utility builder's inner sums")->capture_default_str();

  Command command;
  auto bind = [&](CLI::App* sub, std::string module, std::string operation, auto fn) {
    sub->callback([&command, &cfg, sub, module, operation, fn] {
      cfg.command = sub->get_parent() && sub->get_parent()->get_parent()
                        ? sub->get_parent()->get_name() + " " + sub->get_name()
                        : sub->get_name();
      command = Command{module, operation, fn};
    });
  };

  auto* check = app.add_subcommand("check", "Decide NA and NA1 by exact linear programming");
  add_tree(check, cfg);
  check->add_option("--price", cfg.price, "Price process name")->capture_default_str();
  check->add_flag("--na", cfg.na, "Check NA only");
  check->add_flag("--na1", cfg.na1, "Check NA1 only");
  check->add_flag("--both", cfg.both, "Check both (default)");
  check->add_option("--utility-terms", cfg.utility_terms,
                    "Also build a utility with this many slopes and report sup E[U(X)]")
      ->capture_default_str();
  add_report(check, cfg);
  bind(check, "arbitrage", "check_na/check_na1", deflab::cli::run_check);

  auto* deflate = app.add_subcommand("deflate", "Construct a supermartingale deflator by backward induction");
  add_tree(deflate, cfg);
  deflate->add_option("--price", cfg.price, "Price process name")->capture_default_str();
  deflate->add_option("--out", cfg.out, "Output tree file with the deflator added")->required();
  deflate->add_option("--name", cfg.name, "Process name for the deflator")->capture_default_str();
  deflate->add_flag("--normalize", cfg.normalize, "Rescale so that E[Z_0] = 1");
  deflate->add_option("--trials", cfg.trials, "Random admissible strategies checked pathwise")->capture_default_str();
  add_report(deflate, cfg);
  bind(deflate, "deflator", "construct_deflator", deflab::cli::run_deflate);

  auto* foellmer = app.add_subcommand("foellmer", "Write the dominating measure on the enlarged space");
  add_tree(foellmer, cfg);
  foellmer->add_option("--deflator", cfg.deflator, "Deflator process name")->capture_default_str();
  foellmer->add_option("--out", cfg.out, "Output points file")->required();
  foellmer->add_flag("--normalize", cfg.normalize, "Rescale the deflator so that E[Z_0] = 1");
  add_report(foellmer, cfg);
  bind(foellmer, "kunita_yoeurp", "build_dominating_measure", deflab::cli::run_foellmer);

  auto* ky = app.add_subcommand("ky-verify", "Verify the Kunita-Yoeurp properties of the dominating measure");
  add_tree(ky, cfg);
  ky->add_option("--deflator", cfg.deflator, "Deflator process name")->capture_default_str();
  ky->add_flag("--normalize", cfg.normalize, "Rescale the deflator so that E[Z_0] = 1");
  ky->add_option("--stopping-times", cfg.stopping_times, "Random hitting times to check")->capture_default_str();
  add_report(ky, cfg);
  bind(ky, "kunita_yoeurp", "verify_ky", deflab::cli::run_ky_verify);

  auto* stopped = app.add_subcommand("stopped-check", "Check that S stopped before death is a Q-martingale");
  add_tree(stopped, cfg);
  stopped->add_option("--deflator", cfg.deflator, "Deflator process name")->capture_default_str();
  stopped->add_option("--price", cfg.price, "Price process name")->capture_default_str();
  stopped->add_flag("--normalize", cfg.normalize, "Rescale the deflator so that E[Z_0] = 1");
  add_report(stopped, cfg);
  bind(stopped, "kunita_yoeurp", "check_stopped_price", deflab::cli::run_stopped_check);

  auto* enlarge = app.add_subcommand("enlarge", "Initial enlargement by a discrete label");
  enlarge->require_subcommand(1);
  auto enlarge_sub = [&](const std::string& name, const std::string& help, bool price) {
    auto* sub = enlarge->add_subcommand(name, help);
    add_tree(sub, cfg);
    sub->add_option("--label-map", cfg.label_map, "Label map {leaf_id: \"label\"}")->required();
    if (price) sub->add_option("--price", cfg.price, "Price process name")->capture_default_str();
    add_report(sub, cfg);
    return sub;
  };
  bind(enlarge_sub("jacod", "Jacod's criterion and the conditional densities", false), "enlargement", "jacod_check",
       deflab::cli::run_enlarge_jacod);
  auto* universal = enlarge_sub("universal-z", "Universal supermartingale density on the enlarged tree", false);
  universal->add_option("--supermartingales", cfg.supermartingales, "Random F-supermartingales to test")
      ->capture_default_str();
  bind(universal, "enlargement", "universal_density", deflab::cli::run_enlarge_universal);
  auto* insider = enlarge_sub("insider", "Insider impossibility example in a complete market", true);
  insider->add_option("--event", cfg.event, "Comma-separated labels forming A")->required();
  bind(insider, "enlargement", "insider_example", deflab::cli::run_enlarge_insider);
  bind(enlarge_sub("logutility", "Log-utility and mutual-information identity", true), "enlargement",
       "log_utility_identity", deflab::cli::run_enlarge_logutility);

  auto* simulate = app.add_subcommand("simulate", "Seeded Monte Carlo martingale tests");
  simulate->add_option("--scenario", cfg.scenario, "Scenario")
      ->required()
      ->check(CLI::IsMember({"diffusion", "levy", "survival", "insider"}));
  simulate->add_option("--params", cfg.params, "Scenario parameters (JSON)");
  simulate->add_option("--paths", cfg.paths, "Number of paths")->capture_default_str();
  simulate->add_option("--steps", cfg.steps, "Time steps")->capture_default_str();
  simulate->add_option("--seed", cfg.seed, "Random seed (overridden by DEFLATOR_LAB_SEED)")->capture_default_str();
  simulate->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
  simulate->add_option("--csv", cfg.csv, "Write per-path terminal values as CSV");
  add_report(simulate, cfg);
  bind(simulate, "montecarlo", "simulate", deflab::cli::run_simulate);

  auto* scenario = app.add_subcommand("scenario", "Write a bundled example to disk");
  scenario->add_option("name", cfg.scenario, "Scenario name");
  scenario->add_option("--dir", cfg.dir, "Parent directory")->capture_default_str();
  scenario->add_flag("--list", cfg.list, "List available scenarios");
  add_report(scenario, cfg);
  bind(scenario, "cli", "scenario", deflab::cli::run_scenario);

  std::string docs_out = "docs/CLI.md";
  auto* docs = app.add_subcommand("docs", "Write the command reference as Markdown");
  docs->group("");
  docs->add_option("--out", docs_out, "Output file")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (docs->parsed()) {
    try {
      deflab::write_text_file_atomic(docs_out, markdown_reference(app));
    } catch (const deflab::Error& e) {
      std::cerr << "deflab: error: " << e.what() << "\n";
      return 2;
    }
    return 0;
  }

  if (const char* env = std::getenv("DEFLATOR_LAB_SEED")) {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      cfg.seed_source = "DEFLATOR_LAB_SEED";
    } catch (const std::exception&) {
      std::cerr << "deflab: error: DEFLATOR_LAB_SEED must be an unsigned integer\n";
      return 2;
    }
  } else if (app.count("--seed") > 0 || (simulate->parsed() && simulate->count("--seed") > 0)) {
    cfg.seed_source = "flag";
  }

  Json report{{"schema_version", deflab::cli::kSchemaVersion},
              {"tool", "deflab"},
              {"version", deflab::cli::kVersion},
              {"provenance", {{"module", command.module}, {"operation", command.operation}}},
              {"config", cfg.to_json()}};
  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  Json result = Json::object();
  try {
    code = command.run(cfg, result);
  } catch (const deflab::PreconditionError& e) {
    result = Json{{"error", e.what()}};
    code = 1;
  } catch (const deflab::Error& e) {
    std::cerr << "deflab: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "deflab: error: " << e.what() << "\n";
    return 2;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report["verdict"] = code == 0 ? "pass" : "fail";
  report["result"] = std::move(result);
  report["timing"] = {{"wall_seconds", seconds}};

  const std::string text = report.dump(2) + "\n";
  if (cfg.report.empty()) {
    std::cout << text;
  } else {
    try {
      deflab::write_text_file_atomic(cfg.report, text);
    } catch (const deflab::Error& e) {
      std::cerr << "deflab: error: " << e.what() << "\n";
      return 2;
    }
  }
  return code;
}
