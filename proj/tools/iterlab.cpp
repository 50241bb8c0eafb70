// iterlab: command-line front end for scenario files.

#include "iterlab/scenario.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

struct Selectors {
  std::string system, p, q, weight, mode;
  std::vector<std::string> functions;
  std::optional<double> lambda, s, h, t_max, gamma_p;
  std::optional<int> b_max, alpha_max;

  bool any() const {
    return !system.empty() || !p.empty() || !q.empty() || !weight.empty() || !mode.empty() || !functions.empty() ||
           lambda || s || h || t_max || gamma_p || b_max || alpha_max;
  }

  iterlab::Json params(const std::string& op) const {
    iterlab::Json j = iterlab::Json::object();
    auto str = [&](const char* key, const std::string& v) {
      if (!v.empty()) j[key] = v;
    };
    str("system", system);
    str("p", p);
    str("q", q);
    str("weight", weight);
    str("mode", mode);
    if (op == "verify-inclusion") {
      if (!functions.empty()) j["functions"] = functions;
      if (b_max) j["b_max_p"] = j["b_max_q"] = *b_max;
    } else {
      if (!functions.empty()) j["function"] = functions.front();
      if (b_max) j["b_max"] = *b_max;
    }
    if (lambda) j["lambda"] = *lambda;
    if (s) j["s"] = *s;
    if (h) j["h"] = *h;
    if (t_max) j["t_max"] = *t_max;
    if (gamma_p) j["gamma_p"] = *gamma_p;
    if (alpha_max) j["alpha_max"] = *alpha_max;
    return j;
  }
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> radii, directions;
  std::optional<int> alpha_max;
  std::optional<long> snap_den;

  void apply(iterlab::Scenario& s) const {
    if (seed) s.seed = *seed;
    if (radii) s.sampling.radii = *radii;
    if (directions) s.sampling.directions = *directions;
    if (alpha_max) s.sampling.alpha_max = *alpha_max;
    if (snap_den) s.sampling.snap_den = *snap_den;
  }
};

int execute(const std::string& op, const std::string& config, const std::string& out_dir, const Overrides& overrides,
            const Selectors& sel) {
  iterlab::Scenario scenario;
  try {
    if (!config.empty()) scenario = iterlab::load_config(config);
  } catch (const iterlab::ConfigError& e) {
    for (const auto& err : e.errors()) std::cerr << config << ": " << err << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  overrides.apply(scenario);

  if (op != "run") {
    if (sel.any() || op == "lemma-sweep") {
      if (sel.any() || scenario.tasks.empty() ||
          std::none_of(scenario.tasks.begin(), scenario.tasks.end(), [&](const auto& t) { return t.op == op; })) {
        iterlab::Task task{op, sel.params(op), 0};
        if (auto errors = iterlab::validate_task(scenario, task); !errors.empty()) {
          for (const auto& err : errors) std::cerr << err << "\n";
          return 2;
        }
        scenario.tasks = {task};
      }
    }
    std::erase_if(scenario.tasks, [&](const iterlab::Task& t) { return t.op != op; });
    if (scenario.tasks.empty()) {
      std::cerr << "no '" << op << "' task in the config; pass selectors such as --system to define one\n";
      return 2;
    }
  }

  iterlab::RunResult result;
  try {
    result = iterlab::run_scenario(scenario);
    if (!out_dir.empty()) iterlab::write_outputs(result, out_dir);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  std::cout << result.summary;
  if (out_dir.empty()) std::cout << iterlab::dump_report(result.report);
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterates and weight-function analysis of constant-coefficient operator systems"};
  app.set_version_flag("--version", std::string(iterlab::kToolVersion));
  app.require_subcommand(1);

  std::string config, out_dir;
  Overrides overrides;
  Selectors sel;
  std::string chosen;

  std::vector<std::string> ops = iterlab::task_ops();
  ops.push_back("run");
  for (const auto& op : ops) {
    auto* sub = app.add_subcommand(op, op == "run" ? "run every task of the scenario" : "run '" + op + "' tasks");
    sub->set_help_flag("--help", "print this help message and exit");
    sub->add_option("--config", config, "scenario file (TOML)")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "directory for report.json, summary.txt and CSV files");
    sub->add_option("--seed", overrides.seed, "sampling seed (overrides the config)");
    sub->add_option("--radii", overrides.radii, "radii per direction");
    sub->add_option("--directions", overrides.directions, "number of sampled directions");
    sub->add_option("--snap-den", overrides.snap_den, "largest denominator when snapping exponents");
    if (op != "run") {
      sub->add_option("--system", sel.system, "system name");
      sub->add_option("--p", sel.p, "system P");
      sub->add_option("--q", sel.q, "system Q");
      sub->add_option("--weight", sel.weight, "weight name");
      sub->add_option("--function", sel.functions, "test function name (repeatable for verify-inclusion)");
      sub->add_option("--lambda", sel.lambda, "seminorm parameter");
      sub->add_option("--mode", sel.mode, "beurling or roumieu")->check(CLI::IsMember({"beurling", "roumieu"}));
      sub->add_option("--b-max", sel.b_max, "largest |beta| in the norm table");
      sub->add_option("--s", sel.s, "inclusion parameter s");
      sub->add_option("--h", sel.h, "inclusion parameter h");
      sub->add_option("--t-max", sel.t_max, "upper end of the weight-axiom check");
      sub->add_option("--gamma-p", sel.gamma_p, "use this gamma_P instead of estimating it");
      sub->add_option("--alpha-max", sel.alpha_max, "largest derivative order for gamma");
    } else {
      sub->add_option("--alpha-max", overrides.alpha_max, "largest derivative order for gamma");
    }
    sub->callback([&chosen, op] { chosen = op; });
  }

  CLI11_PARSE(app, argc, argv);
  return execute(chosen, config, out_dir, overrides, sel);
}
