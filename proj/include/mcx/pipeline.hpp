#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mcx/analysis.hpp"
#include "mcx/experiment.hpp"
#include "mcx/forest.hpp"
#include "mcx/report.hpp"

namespace mcx {

struct PipelineOptions {
  int jobs = 1;
  bool raw_features = false;  // also write features_raw.csv
  std::ostream* log = nullptr;
};

/// Seed of one optimisation run, derived from the master seed and the run key.
std::uint64_t run_seed(std::uint64_t master, const std::string& config_id, int function_id,
                       int instance_id, int dimension, int run);

/// Short stable identifier of a configuration used in file names.
std::string config_hash(const std::string& config_id);

std::string model_path(const std::string& out_dir, const std::string& config_id, int dimension,
                       std::int64_t budget, int held_out_instance);

struct BenchmarkSummary {
  std::size_t runs_total = 0;
  std::size_t runs_computed = 0;
  std::size_t failed = 0;
};

/// runs.csv: config_id,function_id,instance_id,dimension,run,seed,budget,precision,status.
/// Runs already present with every budget are not recomputed.
BenchmarkSummary cmd_benchmark(const ExperimentSpec& spec, const PipelineOptions& options = {});

struct FeaturesSummary {
  std::size_t instances_total = 0;
  std::size_t instances_computed = 0;
};

/// features.csv: function_id,instance_id,dimension,feature_name,value,degenerate_flag.
FeaturesSummary cmd_features(const ExperimentSpec& spec, const PipelineOptions& options = {});

/// Mean best precision over runs, keyed by (config_id, function, instance, dimension, budget).
using TargetKey = std::tuple<std::string, int, int, int, std::int64_t>;
std::map<TargetKey, double> load_mean_precision(const ExperimentSpec& spec);

/// Median-aggregated features keyed by (function, instance, dimension).
std::map<std::tuple<int, int, int>, Vector> load_features(const ExperimentSpec& spec);

/// Rows (function, instance) in spec order with transformed targets; group = instance.
GroupedDataset training_dataset(const ExperimentSpec& spec, const std::map<TargetKey, double>& targets,
                                const std::map<std::tuple<int, int, int>, Vector>& features,
                                const std::string& config_id, int dimension, std::int64_t budget);

struct TrainSummary {
  std::size_t searches = 0;
  std::size_t candidates_per_search = 0;
  std::size_t models_written = 0;
};

/// grid_results.csv plus five fold models per (config, dimension, budget).
TrainSummary cmd_train(const ExperimentSpec& spec, const PipelineOptions& options = {});

struct ExplainSummary {
  std::size_t attributions = 0;     // (model, x) pairs explained
  double max_local_error = 0.0;     // max |base + sum(phi) - prediction|
};

/// shap.csv and representations.csv (both aggregation modes).
ExplainSummary cmd_explain(const ExperimentSpec& spec, const PipelineOptions& options = {});

/// Representations of one aggregation mode read back from representations.csv.
std::vector<Representation> load_representations(const ExperimentSpec& spec, RepresentationMode mode);

/// frequency.csv rows for one axis and k, in the order topk_frequency emits cells.
std::vector<CsvRow> frequency_rows(const std::vector<FrequencyCell>& cells);

struct ClassificationRow {
  ModuleAxis axis;
  int dimension = 0;
  std::size_t rows = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::uint64_t seed = 0;
};

struct ReportSummary {
  std::size_t frequency_rows = 0;
  std::vector<std::string> heatmaps;
  std::vector<ClassificationRow> classification;
};

/// frequency.csv, classification.csv and heatmap_<axis>_d<D>_k<k>.svg.
ReportSummary cmd_report(const ExperimentSpec& spec, const PipelineOptions& options = {});

struct PipelineSummary {
  BenchmarkSummary benchmark;
  FeaturesSummary features;
  TrainSummary train;
  ExplainSummary explain;
  ReportSummary report;
};

PipelineSummary cmd_all(const ExperimentSpec& spec, const PipelineOptions& options = {});

}  // namespace mcx
