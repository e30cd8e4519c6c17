#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mcx/attribution.hpp"
#include "mcx/configuration.hpp"
#include "mcx/forest.hpp"

namespace mcx {

enum class GridKind { full, restricted };
std::string_view to_string(GridKind g);
GridKind parse_grid_kind(std::string_view text);

/// Everything needed to reproduce an experiment.
///
/// File format: one `key = value` per line, `#` starts a comment, lists are
/// comma separated. `config = <canonical string>` may repeat; `config_file =
/// PATH` reads one canonical string per line instead.
struct ExperimentSpec {
  std::vector<ModuleConfiguration> configs;
  std::vector<int> functions;
  std::vector<int> instances{1, 2, 3, 4, 5};
  std::vector<int> dimensions{5, 30};
  std::vector<std::int64_t> budgets{500, 2000, 5000, 10000, 50000};
  int runs = 10;
  int ela_repetitions = 100;
  std::uint64_t seed = 1;
  std::vector<int> topk{10, 20};
  std::vector<ModuleAxis> axes{ModuleAxis::elitist, ModuleAxis::ssa};
  GridKind grid = GridKind::full;
  RepresentationMode shap_mode = RepresentationMode::mean_abs;
  TargetTransform target_transform = TargetTransform::log_ratio;
  std::string output = "results";

  /// Throws SpecError describing the first violated constraint.
  void validate() const;

  std::string to_text() const;
  static ExperimentSpec parse(std::string_view text, const std::string& base_dir = ".");

  std::vector<HyperParams> hyperparameter_grid() const;

  bool operator==(const ExperimentSpec&) const = default;
};

ExperimentSpec load_spec(const std::string& path);
void save_spec(const std::string& path, const ExperimentSpec& spec);

/// Full-scale protocol: 24 functions, 5 instances, D in {5, 30}, five
/// budgets, 10 runs, 100 ELA repetitions, full grid, 40 configurations.
ExperimentSpec paper_profile();

/// Laptop-scale protocol: 12 functions, D = 5, budgets {500, 2000}, 5 runs,
/// 5 ELA repetitions, 36-candidate grid, four elitism pairs.
ExperimentSpec desk_profile();

ExperimentSpec profile(std::string_view name);

}  // namespace mcx
