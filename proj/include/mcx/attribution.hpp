#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcx/common.hpp"
#include "mcx/forest.hpp"

namespace mcx {

/// Shapley values of one prediction plus the expected value they start from.
struct Attribution {
  Vector phi;
  double base = 0.0;
};

/// Interventional Shapley values of a single tree: absent features take
/// their values from each background row in turn, and the results are
/// averaged over the background. Exact, no sampling.
Attribution tree_shap(const DecisionTree& tree, const Eigen::Ref<const Vector>& x,
                      const Matrix& background);

/// Mean over trees of tree_shap.
Attribution forest_shap(const RandomForestModel& model, const Eigen::Ref<const Vector>& x,
                        const Matrix& background);

/// Elementwise mean of the four training-fold attributions of one instance.
Vector aggregate_instance(const std::vector<Vector>& fold_attributions);

enum class RepresentationMode { signed_mean, mean_abs };
std::string_view to_string(RepresentationMode m);
RepresentationMode parse_representation_mode(std::string_view text);

/// Per-instance vectors keyed by (function_id, instance_id).
struct InstanceAttribution {
  int function_id = 0;
  int instance_id = 0;
  Vector phi;
};

/// Aggregate over instances. When `expected` is non-empty every listed key
/// must be present.
Vector build_representation(const std::vector<InstanceAttribution>& instances, RepresentationMode mode,
                            const std::vector<std::pair<int, int>>& expected = {});

}  // namespace mcx
