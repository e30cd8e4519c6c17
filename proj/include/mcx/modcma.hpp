#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcx/configuration.hpp"
#include "mcx/problems.hpp"
#include "mcx/sampling.hpp"

namespace mcx {

/// lambda = 4 + floor(3 ln D).
int default_population_size(int dimension);

/// mu = floor(lambda / 2) positive weights, non-increasing, summing to one.
Vector recombination_weights(WeightsOption option, int lambda);

/// Learning rates and damping for one (dimension, weights) pair.
struct StrategyConstants {
  double mu_eff;
  double c_sigma;
  double d_sigma;
  double c_c;
  double c_1;
  double c_mu;
  double chi_n;
  double d_psr;
  int eigen_interval;

  static StrategyConstants compute(int dimension, const Vector& weights);
};

struct Bounds {
  double lower = ProblemInstance::lower_bound;
  double upper = ProblemInstance::upper_bound;
};

/// One coordinate through the chosen correction rule.
double correct_coordinate(BoundCorrection method, double value, const Bounds& bounds);

template <typename Derived>
Vector apply_bound_correction(BoundCorrection method, const Eigen::MatrixBase<Derived>& x,
                              const Bounds& bounds) {
  return x.unaryExpr([&](double v) { return correct_coordinate(method, v, bounds); });
}

/// Full optimiser state for one local run. Plain value type: copyable and
/// movable between workers, never shared.
struct CmaState {
  int dimension = 0;
  int lambda = 0;
  int mu = 0;
  Vector weights;
  StrategyConstants constants{};

  Vector mean;
  double sigma = 0.0;
  Matrix C;
  Vector p_sigma;
  Vector p_c;

  // Eigen cache: C = B diag(d^2) B^T.
  Matrix B;
  Vector d;
  Matrix inv_sqrt_C;
  long last_eigen_update = 0;

  long generation = 0;
  std::int64_t evaluations = 0;

  Vector previous_fitness;  // offspring fitness of the last generation (PSR)
  Matrix parent_x;          // current parents, columns (elitism)
  Vector parent_f;

  GaussianStream sampler;
};

CmaState make_state(int dimension, int lambda, const ModuleConfiguration& config,
                    const Vector& mean, double sigma, std::uint64_t sampler_seed);

/// Recomputes B, d and C^{-1/2}; floors eigenvalues at 1e-20 * max.
void update_eigensystem(CmaState& state);

/// Sampled candidates, one per column. y = (x - m) / sigma after correction.
struct Population {
  Matrix z;
  Matrix y;
  Matrix x;
  std::vector<int> pair;  // pair index per column, -1 when unpaired
};

Population ask(CmaState& state, const ModuleConfiguration& config, const Bounds& bounds = {});

void tell(CmaState& state, const ModuleConfiguration& config, const Population& population,
          const Vector& fitness);

/// Multiplicative sigma change of cumulative step-size adaptation.
double csa_step_factor(double p_sigma_norm, const StrategyConstants& constants);

/// Population success statistic: (mean rank of previous - mean rank of
/// current) / n over the merged ranking of both generations.
double psr_success(const Vector& previous, const Vector& current);

inline constexpr double kPsrTargetSuccess = 0.25;

/// exp((z - z*) / d_psr).
double psr_step_factor(double success, const StrategyConstants& constants);

/// Reasons to end a local run (used when a restart strategy is active).
bool restart_triggered(const CmaState& state, long generations_without_improvement);

/// Best precision at fixed budget checkpoints for one run.
struct RunRecord {
  std::string config_id;
  int function_id = 0;
  int instance_id = 0;
  int dimension = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::int64_t, double>> checkpoints;
  std::int64_t evaluations = 0;
  int restarts = 0;
  std::vector<int> population_sizes;
  std::string status = "ok";

  double at(std::int64_t budget) const;
  bool operator==(const RunRecord&) const = default;
};

using GenerationObserver = std::function<void(const CmaState&)>;

RunRecord run_fixed_budget(const ProblemInstance& instance, const ModuleConfiguration& config,
                           std::span<const std::int64_t> budgets, std::uint64_t seed,
                           const GenerationObserver& observer = {});

}  // namespace mcx
