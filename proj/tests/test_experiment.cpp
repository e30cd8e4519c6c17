#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mcx/ela.hpp"
#include "mcx/experiment.hpp"
#include "mcx/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace mcx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mcx_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentSpec tiny_spec(const fs::path& out) {
  ExperimentSpec s;
  s.configs = synthetic::pair_portfolio(ModuleAxis::elitist, 2);
  s.functions = {1, 2, 6, 10};
  s.instances = {1, 2, 3};
  s.dimensions = {2};
  s.budgets = {60, 120};
  s.runs = 2;
  s.ela_repetitions = 2;
  s.topk = {5};
  s.axes = {ModuleAxis::elitist};
  s.grid = GridKind::restricted;
  s.output = out.string();
  s.seed = 5;
  return s;
}

}  // namespace

TEST(Spec, TextRoundTrip) {
  auto s = desk_profile();
  s.seed = 99;
  s.topk = {3, 7};
  s.shap_mode = RepresentationMode::signed_mean;
  EXPECT_EQ(ExperimentSpec::parse(s.to_text()), s);
  const auto dir = scratch("spec");
  save_spec((dir / "a.spec").string(), s);
  EXPECT_EQ(load_spec((dir / "a.spec").string()), s);
}

TEST(Spec, ConfigFileIsResolvedRelativeToSpec) {
  const auto dir = scratch("spec_file");
  std::ofstream(dir / "configs.txt") << "# portfolio\n"
                                     << ModuleConfiguration{}.to_string() << "\n"
                                     << ModuleConfiguration{}.with(ModuleAxis::elitist, "true").to_string() << "\n";
  std::ofstream(dir / "x.spec") << "functions = 1, 2\nconfig_file = configs.txt\noutput = out\n";
  const auto s = load_spec((dir / "x.spec").string());
  EXPECT_EQ(s.configs.size(), 2u);
  EXPECT_EQ(s.functions, (std::vector<int>{1, 2}));
}

TEST(Spec, ValidationErrors) {
  const std::string config = "config = " + ModuleConfiguration{}.to_string() + "\n";
  EXPECT_THROW(ExperimentSpec::parse("functions = 1\n"), SpecError);
  EXPECT_THROW(ExperimentSpec::parse(config + "functions = 25\n"), SpecError);
  EXPECT_THROW(ExperimentSpec::parse(config + "functions = 1\nbudgets = 100, 50\n"), SpecError);
  EXPECT_THROW(ExperimentSpec::parse(config + "functions = 1\ncolour = red\n"), SpecError);
  EXPECT_THROW(ExperimentSpec::parse(config + "functions = 1\nruns = 0\n"), SpecError);
  EXPECT_THROW(ExperimentSpec::parse(config + "functions = 1\nruns = 2\nruns = 3\n"), SpecError);
  EXPECT_THROW(ExperimentSpec::parse(config + config + "functions = 1\n"), SpecError);
  EXPECT_THROW(ExperimentSpec::parse("config = elitist=maybe\nfunctions = 1\n"), SpecError);
  EXPECT_THROW(ExperimentSpec::parse(config + "functions = 1\ntopk = 47\n"), SpecError);
  EXPECT_THROW(load_spec("/nonexistent/spec.txt"), MissingInputError);
  EXPECT_THROW(profile("lab"), SpecError);
}

TEST(Spec, Profiles) {
  const auto paper = paper_profile();
  EXPECT_EQ(paper.configs.size() * paper.dimensions.size() * paper.budgets.size(), 400u);
  EXPECT_EQ(paper.hyperparameter_grid().size(), 324u);
  EXPECT_EQ(paper.functions.size(), 24u);
  const auto desk = desk_profile();
  EXPECT_EQ(desk.configs.size(), 8u);
  EXPECT_EQ(desk.functions.size(), 12u);
  EXPECT_EQ(desk.hyperparameter_grid().size(), 36u);
  EXPECT_NO_THROW(paper.validate());
  EXPECT_NO_THROW(desk.validate());
}

TEST(Pipeline, BenchmarkCardinalityAndResume) {
  const auto dir = scratch("bench");
  ExperimentSpec s;
  s.configs = synthetic::pair_portfolio(ModuleAxis::elitist, 1);
  s.functions = {1, 2};
  s.dimensions = {2};
  s.budgets = {20, 40, 60, 80, 100};
  s.runs = 10;
  s.output = dir.string();
  const auto first = cmd_benchmark(s);
  EXPECT_EQ(first.runs_total, 200u);
  EXPECT_EQ(first.runs_computed, 200u);
  const auto table = read_csv((dir / "runs.csv").string());
  EXPECT_EQ(table.rows.size(), 1000u);
  const std::string before = slurp(dir / "runs.csv");
  const auto second = cmd_benchmark(s);
  EXPECT_EQ(second.runs_computed, 0u);
  EXPECT_EQ(slurp(dir / "runs.csv"), before);

  // A truncated file is completed to the same content.
  auto partial = read_csv((dir / "runs.csv").string());
  partial.rows.resize(partial.rows.size() / 2 + 3);
  write_csv((dir / "runs.csv").string(), partial);
  const auto third = cmd_benchmark(s);
  EXPECT_GT(third.runs_computed, 0u);
  EXPECT_LT(third.runs_computed, 200u);
  EXPECT_EQ(slurp(dir / "runs.csv"), before);
}

TEST(Pipeline, BenchmarkIndependentOfWorkers) {
  const auto a = scratch("bench_a"), b = scratch("bench_b");
  ExperimentSpec s;
  s.configs = synthetic::pair_portfolio(ModuleAxis::ssa, 1);
  s.functions = {3, 8};
  s.instances = {1, 2};
  s.dimensions = {3};
  s.budgets = {100, 300};
  s.runs = 3;
  s.output = a.string();
  cmd_benchmark(s, {1});
  s.output = b.string();
  cmd_benchmark(s, {4});
  EXPECT_EQ(slurp(a / "runs.csv"), slurp(b / "runs.csv"));
}

TEST(Pipeline, FeaturesCardinality) {
  const auto dir = scratch("features");
  auto s = tiny_spec(dir);
  PipelineOptions opt;
  opt.raw_features = true;
  const auto summary = cmd_features(s, opt);
  EXPECT_EQ(summary.instances_total, 12u);
  const auto table = read_csv((dir / "features.csv").string());
  EXPECT_EQ(table.rows.size(), 12u * 46u);
  const auto raw = read_csv((dir / "features_raw.csv").string());
  EXPECT_EQ(raw.rows.size(), 2u * 12u * 46u);
  const auto loaded = load_features(s);
  EXPECT_EQ(loaded.size(), 12u);
  EXPECT_EQ(cmd_features(s).instances_computed, 0u);
}

TEST(Pipeline, MissingInputsAreReported) {
  const auto dir = scratch("missing");
  const auto s = tiny_spec(dir);
  EXPECT_THROW(cmd_train(s), MissingInputError);
  EXPECT_THROW(cmd_explain(s), MissingInputError);
  EXPECT_THROW(cmd_report(s), MissingInputError);
}

TEST(Pipeline, TinyEndToEndIsDeterministic) {
  const auto a = scratch("e2e_a"), b = scratch("e2e_b");
  auto s = tiny_spec(a);
  const auto sa = cmd_all(s, {1});
  EXPECT_EQ(sa.train.searches, 8u);
  EXPECT_EQ(sa.train.candidates_per_search, 36u);
  EXPECT_EQ(sa.train.models_written, 8u * 3u);
  EXPECT_LT(sa.explain.max_local_error, 1e-9);
  EXPECT_GT(sa.explain.attributions, 0u);

  const auto grid = read_csv((a / "grid_results.csv").string());
  EXPECT_EQ(grid.rows.size(), 8u * 36u);
  std::size_t selected = 0;
  for (const auto& r : grid.rows) selected += r[grid.column("selected")] == "1";
  EXPECT_EQ(selected, 8u);

  for (const auto mode : {RepresentationMode::signed_mean, RepresentationMode::mean_abs}) {
    const auto reps = load_representations(s, mode);
    EXPECT_EQ(reps.size(), 8u);
    for (const auto& r : reps) EXPECT_EQ(r.values.size(), 46);
  }
  const auto shap = read_csv((a / "shap.csv").string());
  EXPECT_EQ(shap.rows.size(), 8u * 12u * 46u);

  s.output = b.string();
  cmd_all(s, {3});
  for (const auto& entry : fs::directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path().filename();
  }
  for (const auto& entry : fs::directory_iterator(a / "models"))
    EXPECT_EQ(slurp(entry.path()), slurp(b / "models" / entry.path().filename()));
}

TEST(Report, CsvRejectsCommasAndHeatmapIsSvg) {
  const auto dir = scratch("csv");
  CsvTable t{{"a", "b"}, {{"1", "x,y"}}};
  EXPECT_THROW(write_csv((dir / "t.csv").string(), t), ContractError);
  t.rows = {{"1", "2"}};
  write_csv((dir / "t.csv").string(), t);
  EXPECT_EQ(read_csv((dir / "t.csv").string()).rows, t.rows);
  EXPECT_THROW(t.column("c"), MissingInputError);

  const auto configs = synthetic::pair_portfolio(ModuleAxis::elitist, 11);
  auto reps = synthetic::random_representations(configs, {500}, 5, 1);
  for (auto& r : reps) r.values(0) = 9.0;
  const auto cells = topk_frequency(reps, find_pairs(configs, ModuleAxis::elitist), 10);
  const std::string svg = heatmap_svg(cells, 11, "elitist");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg, heatmap_svg(cells, 11, "elitist"));
}
