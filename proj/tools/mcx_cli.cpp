// mcx: benchmark modular CMA-ES configurations, compute landscape features,
// train per-configuration performance models and explain them.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mcx/experiment.hpp"
#include "mcx/pipeline.hpp"
#include "mcx/problems.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kSpecError = 2, kMissingInput = 3, kNumerical = 4 };

struct GlobalFlags {
  std::string spec_path;
  std::string profile;
  std::string out;
  std::string topk;
  std::string shap_mode;
  std::string grid;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool raw_features = false;
  bool quiet = false;
};

mcx::ExperimentSpec resolve_spec(const GlobalFlags& g, const CLI::App& app) {
  if (!g.spec_path.empty() && !g.profile.empty())
    throw mcx::SpecError("--spec and --profile are mutually exclusive");
  mcx::ExperimentSpec spec = !g.spec_path.empty() ? mcx::load_spec(g.spec_path)
                                                  : mcx::profile(g.profile.empty() ? "desk" : g.profile);
  if (app.count("--seed")) spec.seed = g.seed;
  if (!g.out.empty()) spec.output = g.out;
  if (!g.topk.empty()) {
    spec.topk.clear();
    std::stringstream s(g.topk);
    std::string item;
    while (std::getline(s, item, ',')) {
      try {
        spec.topk.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw mcx::SpecError("--topk expects integers, got '" + item + "'");
      }
    }
  }
  if (!g.shap_mode.empty()) spec.shap_mode = mcx::parse_representation_mode(g.shap_mode);
  if (!g.grid.empty()) spec.grid = mcx::parse_grid_kind(g.grid);
  spec.validate();
  return spec;
}

void list_problems() {
  std::printf("%-4s %-34s %-28s %s\n", "id", "name", "category", "multimodal");
  for (const auto& f : mcx::function_registry())
    std::printf("%-4d %-34s %-28s %s\n", f.id, std::string(f.name).c_str(),
                std::string(mcx::to_string(f.category)).c_str(), f.multimodal ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explainable modular CMA-ES performance modelling"};
  app.require_subcommand(1);
  GlobalFlags g;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--spec", g.spec_path, "Experiment spec file");
    cmd->add_option("--profile", g.profile, "Built-in profile (paper or desk)");
    cmd->add_option("--seed", g.seed, "Master seed");
    cmd->add_option("--out", g.out, "Output directory");
    cmd->add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--topk", g.topk, "Comma-separated top-k values");
    cmd->add_option("--shap-mode", g.shap_mode, "Representation used for ranking (signed or abs)");
    cmd->add_option("--grid", g.grid, "Hyperparameter grid (full or restricted)");
    cmd->add_flag("--raw-features", g.raw_features, "Also write per-repetition features");
    cmd->add_flag("--quiet", g.quiet, "Suppress progress messages");
  };

  auto* problems = app.add_subcommand("problems", "Inspect the benchmark suite");
  problems->add_subcommand("list", "List the 24 functions")->callback(list_problems);
  problems->require_subcommand(1);

  auto* spec_cmd = app.add_subcommand("spec", "Print the resolved experiment spec");
  add_common(spec_cmd);
  std::vector<std::pair<std::string, CLI::App*>> stages;
  for (const char* name : {"benchmark", "features", "train", "explain", "report", "all"}) {
    auto* cmd = app.add_subcommand(name, std::string("Run the ") + name + " stage");
    add_common(cmd);
    stages.emplace_back(name, cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kSpecError;
  }

  try {
    if (spec_cmd->parsed()) {
      std::cout << resolve_spec(g, *spec_cmd).to_text();
      return kOk;
    }
    for (const auto& [name, cmd] : stages) {
      if (!cmd->parsed()) continue;
      const mcx::ExperimentSpec spec = resolve_spec(g, *cmd);
      mcx::PipelineOptions options;
      options.jobs = g.jobs;
      options.raw_features = g.raw_features;
      options.log = g.quiet ? nullptr : &std::cerr;
      if (name == "benchmark") mcx::cmd_benchmark(spec, options);
      else if (name == "features") mcx::cmd_features(spec, options);
      else if (name == "train") mcx::cmd_train(spec, options);
      else if (name == "explain") mcx::cmd_explain(spec, options);
      else if (name == "report") mcx::cmd_report(spec, options);
      else mcx::cmd_all(spec, options);
    }
  } catch (const mcx::SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return kSpecError;
  } catch (const mcx::ConfigurationError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return kSpecError;
  } catch (const mcx::MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << '\n';
    return kMissingInput;
  } catch (const mcx::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
