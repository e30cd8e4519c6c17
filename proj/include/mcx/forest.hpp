#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcx/common.hpp"

namespace mcx {

enum class Criterion { squared_error, absolute_error, poisson, gini };
enum class MaxFeatures { automatic, sqrt, log2 };
enum class TaskKind { regression, classification };

std::string_view to_string(Criterion c);
std::string_view to_string(MaxFeatures m);
std::string_view to_string(TaskKind t);
Criterion parse_criterion(std::string_view text);
MaxFeatures parse_max_features(std::string_view text);
TaskKind parse_task_kind(std::string_view text);

inline constexpr int kUnboundedDepth = -1;

struct HyperParams {
  int n_estimators = 100;
  MaxFeatures max_features = MaxFeatures::automatic;
  int max_depth = kUnboundedDepth;
  int min_samples_split = 2;
  Criterion criterion = Criterion::squared_error;
  bool bootstrap = true;

  /// "n_estimators=100;max_features=auto;max_depth=none;min_samples_split=2;criterion=squared_error;bootstrap=true"
  std::string to_string() const;
  static HyperParams parse(std::string_view text);

  bool operator==(const HyperParams&) const = default;
};

/// Features examined per node for `p` columns (at least one).
int features_per_split(MaxFeatures m, TaskKind task, int p);

/// Full hyperparameter grid (324 candidates). Order: n_estimators, max_features,
/// max_depth, min_samples_split, criterion, with criterion varying fastest.
std::vector<HyperParams> full_grid();

/// 36-candidate subset for quick runs: n_estimators = 100, min_samples_split = 2.
std::vector<HyperParams> restricted_grid();

/// Array-encoded tree. Leaves have feature == -1. Rows with x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  double predict(const Row& x) const {
    int k = 0;
    while (!nodes[static_cast<std::size_t>(k)].is_leaf()) {
      const TreeNode& n = nodes[static_cast<std::size_t>(k)];
      k = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(k)].value;
  }

  int depth() const;
  bool operator==(const DecisionTree&) const = default;
};

/// CART on all given rows (no resampling). Rows of X are samples.
DecisionTree fit_tree(const Matrix& X, const Vector& y, const HyperParams& params, TaskKind task,
                      std::uint64_t seed);

/// Impurity of a node (per-row average) under the criterion; used by the
/// split search and exposed for oracle comparison.
double node_impurity(Criterion c, const std::vector<double>& y);

struct RandomForestModel {
  TaskKind task = TaskKind::regression;
  HyperParams params;
  std::uint64_t seed = 0;
  std::string target_transform = "log_ratio";
  int n_features = 0;
  double baseline = 0.0;
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;

  /// Mean over trees (regression) or majority vote with lowest-label tie-break.
  double predict(const Eigen::Ref<const Vector>& x) const;
  Vector predict_rows(const Matrix& X) const;

  bool operator==(const RandomForestModel&) const = default;
};

RandomForestModel fit_forest(const Matrix& X, const Vector& y, const HyperParams& params,
                             TaskKind task, std::uint64_t seed, int jobs = 1);

/// Self-describing text format; doubles are written as hexfloats.
void save_model(std::ostream& out, const RandomForestModel& model);
RandomForestModel load_model(std::istream& in);
void save_model(const std::string& path, const RandomForestModel& model);
RandomForestModel load_model(const std::string& path);

enum class TargetTransform { log_ratio, raw };
std::string_view to_string(TargetTransform t);
TargetTransform parse_target_transform(std::string_view text);

inline constexpr double kTargetEpsilon = 1e-12;

/// log10((precision + 1e-12) / 1e-12), or the precision itself in raw mode.
double transform_target(double precision, TargetTransform t);

/// 1 - SS_res / SS_tot. Throws DomainError when y_true has no variance.
double r2_score(const Vector& y_true, const Vector& y_pred);

struct ClassificationMetrics {
  double accuracy = 0.0;
  double f1 = 0.0;  // macro average over the two classes
};

ClassificationMetrics classification_metrics(const std::vector<int>& y_true,
                                             const std::vector<int>& y_pred);

/// Rows keyed by (function_id, instance_id); the group of a row is its instance.
struct GroupedDataset {
  Matrix X;
  Vector y;
  std::vector<int> groups;
  std::vector<std::pair<int, int>> keys;

  /// Distinct groups in ascending order.
  std::vector<int> group_ids() const;
};

struct GridSearchResult {
  std::vector<HyperParams> grid;
  std::vector<double> mean_r2;  // NaN for invalid candidates
  std::vector<bool> valid;
  std::size_t best = 0;
  std::vector<int> fold_groups;  // held-out group of each fold
  std::vector<RandomForestModel> fold_models;
};

/// Seed of the model trained with `group` held out, shared by the search and the refit.
std::uint64_t fold_seed(std::uint64_t seed, int group);

/// Leave-one-group-out search. Candidate score is the mean held-out r^2
/// over folds; ties keep the earlier candidate. The winner is refit on
/// each fold's training rows for downstream attribution.
GridSearchResult logo_grid_search(const GroupedDataset& data, const std::vector<HyperParams>& grid,
                                  std::uint64_t seed, int jobs = 1);

}  // namespace mcx
