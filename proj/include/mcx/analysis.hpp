#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mcx/common.hpp"
#include "mcx/configuration.hpp"
#include "mcx/forest.hpp"

namespace mcx {

/// Two configurations equal on every axis except `axis`. `a` has the
/// lexicographically smaller encoding.
struct ConfigPair {
  ModuleAxis axis;
  ModuleConfiguration a;
  ModuleConfiguration b;
  int id = 0;
};

/// All unordered pairs that differ exactly on `axis`, ordered by the
/// encodings of (a, b).
std::vector<ConfigPair> find_pairs(const std::vector<ModuleConfiguration>& configs, ModuleAxis axis);
std::vector<ConfigPair> find_pairs(const std::vector<ModuleConfiguration>& configs,
                                   std::string_view axis);

/// Shapley representation of one configuration for one (dimension, budget).
struct Representation {
  std::string config_id;
  int dimension = 0;
  std::int64_t budget = 0;
  Vector values;  // 46 aggregated attributions
};

/// Indices of the top-k entries by descending value; ties keep the lower index.
std::vector<int> top_k_features(const Vector& values, int k);

/// One cell of a frequency table: counts per feature for configurations
/// with a given value on the axis.
struct FrequencyCell {
  ModuleAxis axis;
  int dimension = 0;
  std::int64_t budget = 0;
  std::string module_value;
  int k = 0;
  std::vector<int> counts;  // one per feature, canonical order
};

/// Counts, per (dimension, budget, module value), how many pair members rank
/// each feature in their top k. Cells are ordered by dimension, budget and
/// the axis' canonical value order.
std::vector<FrequencyCell> topk_frequency(const std::vector<Representation>& representations,
                                          const std::vector<ConfigPair>& pairs, int k);

/// Labeled rows for module-status classification: one per pair member and
/// budget of one dimension.
struct ClassificationData {
  Matrix X;
  std::vector<int> labels;
  std::vector<std::string> config_ids;
  std::vector<std::int64_t> budgets;
  std::vector<int> units;  // one id per (pair, budget); both members share it
};

/// Label 1 marks the pair member whose axis value is the later one in
/// canonical value order (e.g. elitist=true, ssa=psr).
ClassificationData classification_dataset(const std::vector<Representation>& representations,
                                          const std::vector<ConfigPair>& pairs, int dimension);

/// Fold index per row: rows of each class are shuffled with the seed and
/// dealt round-robin into `folds` folds.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed);

struct ClassificationResult {
  std::size_t rows = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::vector<ClassificationMetrics> per_fold;
  std::vector<int> predictions;
};

/// Default classifier parameters: 100 trees, gini, sqrt features, unbounded depth.
HyperParams default_classifier_params();

/// Fold index per row that keeps every unit in one fold: units are shuffled
/// with the seed and dealt round-robin. Units holding one row of each class
/// make every fold class-balanced.
std::vector<int> unit_folds(const std::vector<int>& units, int folds, std::uint64_t seed);

/// 5-fold CV with the default classifier; pooled accuracy and macro F1.
/// Folds come from unit_folds when the data carries units, otherwise from
/// stratified_folds.
ClassificationResult classify_module_status(const ClassificationData& data, std::uint64_t seed,
                                            int folds = 5, int jobs = 1);

}  // namespace mcx
