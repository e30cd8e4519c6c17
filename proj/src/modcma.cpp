#include "mcx/modcma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mcx {

int default_population_size(int dimension) {
  if (dimension < 2) throw DomainError("default_population_size: dimension must be >= 2");
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

Vector recombination_weights(WeightsOption option, int lambda) {
  if (lambda < 4) throw ConfigurationError("recombination_weights: lambda must be >= 4");
  const int mu = lambda / 2;
  Vector w(mu);
  for (int i = 0; i < mu; ++i) {
    const double rank = i + 1.0;
    switch (option) {
      case WeightsOption::standard: w(i) = std::log(mu + 0.5) - std::log(rank); break;
      case WeightsOption::equal: w(i) = 1.0; break;
      case WeightsOption::exp_half: w(i) = std::pow(0.5, rank); break;
    }
  }
  return w / w.sum();
}

StrategyConstants StrategyConstants::compute(int dimension, const Vector& weights) {
  const double n = dimension;
  StrategyConstants k{};
  k.mu_eff = 1.0 / weights.squaredNorm();
  k.c_sigma = (k.mu_eff + 2.0) / (n + k.mu_eff + 5.0);
  k.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((k.mu_eff - 1.0) / (n + 1.0)) - 1.0) + k.c_sigma;
  k.c_c = (4.0 + k.mu_eff / n) / (n + 4.0 + 2.0 * k.mu_eff / n);
  k.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + k.mu_eff);
  k.c_mu = std::min(1.0 - k.c_1,
                    2.0 * (k.mu_eff - 2.0 + 1.0 / k.mu_eff) / ((n + 2.0) * (n + 2.0) + k.mu_eff));
  k.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  k.d_psr = k.d_sigma;
  k.eigen_interval =
      std::max(1, static_cast<int>(std::floor(1.0 / (10.0 * n * (k.c_1 + k.c_mu)))));
  return k;
}

double correct_coordinate(BoundCorrection method, double value, const Bounds& bounds) {
  const double width = bounds.upper - bounds.lower;
  switch (method) {
    case BoundCorrection::off:
      return value;
    case BoundCorrection::saturate:
      return std::clamp(value, bounds.lower, bounds.upper);
    case BoundCorrection::mirror: {
      if (value >= bounds.lower && value <= bounds.upper) return value;
      double t = std::fmod(value - bounds.lower, 2.0 * width);
      if (t < 0) t += 2.0 * width;
      if (t > width) t = 2.0 * width - t;
      return bounds.lower + t;
    }
    case BoundCorrection::toroidal: {
      if (value >= bounds.lower && value <= bounds.upper) return value;
      double t = std::fmod(value - bounds.lower, width);
      if (t < 0) t += width;
      return bounds.lower + t;
    }
  }
  return value;
}

CmaState make_state(int dimension, int lambda, const ModuleConfiguration& config,
                    const Vector& mean, double sigma, std::uint64_t sampler_seed) {
  if (mean.size() != dimension) throw ContractError("make_state: mean has wrong length");
  if (!(sigma > 0.0)) throw ContractError("make_state: sigma must be positive");
  CmaState s;
  s.dimension = dimension;
  s.lambda = lambda;
  s.weights = recombination_weights(config.weights, lambda);
  s.mu = static_cast<int>(s.weights.size());
  s.constants = StrategyConstants::compute(dimension, s.weights);
  s.mean = mean;
  s.sigma = sigma;
  s.C = Matrix::Identity(dimension, dimension);
  s.p_sigma = Vector::Zero(dimension);
  s.p_c = Vector::Zero(dimension);
  s.B = Matrix::Identity(dimension, dimension);
  s.d = Vector::Ones(dimension);
  s.inv_sqrt_C = Matrix::Identity(dimension, dimension);
  s.sampler = GaussianStream(to_sampler_kind(config.base_sampler), dimension, sampler_seed);
  return s;
}

void update_eigensystem(CmaState& state) {
  state.C = Matrix(0.5 * (state.C + state.C.transpose()));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(state.C);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition of C failed");
  Vector values = solver.eigenvalues();
  const double top = values.maxCoeff();
  if (!(top > 0.0) || !std::isfinite(top))
    throw NumericalError("covariance matrix lost positive definiteness");
  const double floor = 1e-20 * top;
  if (values.minCoeff() < floor) {
    values = values.cwiseMax(floor);
    state.C = solver.eigenvectors() * values.asDiagonal() * solver.eigenvectors().transpose();
    state.C = Matrix(0.5 * (state.C + state.C.transpose()));
  }
  state.B = solver.eigenvectors();
  state.d = values.cwiseSqrt();
  state.inv_sqrt_C = state.B * state.d.cwiseInverse().asDiagonal() * state.B.transpose();
  state.last_eigen_update = state.generation;
}

Population ask(CmaState& state, const ModuleConfiguration& config, const Bounds& bounds) {
  if (!state.mean.allFinite() || !std::isfinite(state.sigma) || !state.C.allFinite())
    throw NumericalError("state corruption: non-finite mean, sigma or covariance at generation " +
                         std::to_string(state.generation));
  const int n = state.dimension;
  const int lambda = state.lambda;
  const bool mirrored = config.mirrored != Mirror::off;
  const int base = mirrored ? (lambda + 1) / 2 : lambda;

  const Matrix draws = state.sampler.block(base).transpose();
  Population pop;
  pop.z.resize(n, lambda);
  pop.pair.assign(static_cast<std::size_t>(lambda), -1);
  if (mirrored) {
    for (int k = 0; k < lambda; ++k) {
      const int source = k / 2;
      pop.z.col(k) = (k % 2 == 0) ? draws.col(source) : Vector(-draws.col(source));
    }
    for (int k = 0; k + 1 < lambda; k += 2) {
      pop.pair[static_cast<std::size_t>(k)] = k / 2;
      pop.pair[static_cast<std::size_t>(k + 1)] = k / 2;
    }
  } else {
    pop.z = draws;
  }

  const Matrix transform = state.B * state.d.asDiagonal();
  pop.x = (state.sigma * (transform * pop.z)).colwise() + state.mean;
  if (config.bounds != BoundCorrection::off)
    for (int k = 0; k < lambda; ++k)
      pop.x.col(k) = apply_bound_correction(config.bounds, pop.x.col(k), bounds);
  pop.y = (pop.x.colwise() - state.mean) / state.sigma;
  return pop;
}

double csa_step_factor(double p_sigma_norm, const StrategyConstants& k) {
  return std::exp((k.c_sigma / k.d_sigma) * (p_sigma_norm / k.chi_n - 1.0));
}

double psr_success(const Vector& previous, const Vector& current) {
  const Eigen::Index n = std::min(previous.size(), current.size());
  if (n == 0) return 0.0;
  std::vector<double> merged;
  merged.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    merged.push_back(previous(i));
    merged.push_back(current(i));
  }
  std::sort(merged.begin(), merged.end());
  auto rank = [&](double v) {
    return static_cast<double>(std::lower_bound(merged.begin(), merged.end(), v) - merged.begin());
  };
  double sum_prev = 0.0;
  double sum_cur = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum_prev += rank(previous(i));
    sum_cur += rank(current(i));
  }
  const double dn = static_cast<double>(n);
  return (sum_prev - sum_cur) / (dn * dn);
}

double psr_step_factor(double success, const StrategyConstants& k) {
  return std::exp((success - kPsrTargetSuccess) / k.d_psr);
}

void tell(CmaState& state, const ModuleConfiguration& config, const Population& population,
          const Vector& fitness) {
  const int n = state.dimension;
  const int lambda = state.lambda;
  if (fitness.size() != lambda || population.x.cols() != lambda)
    throw ContractError("tell: expected " + std::to_string(lambda) + " candidates and fitnesses");
  if (!fitness.allFinite())
    throw NumericalError("tell: non-finite fitness at generation " + std::to_string(state.generation));

  // Eligible pool: offspring (pair winners only when pairwise), then parents.
  std::vector<int> eligible;
  for (int k = 0; k < lambda; ++k) {
    const int pair = population.pair[static_cast<std::size_t>(k)];
    if (config.mirrored == Mirror::pairwise && pair >= 0) {
      const int mate = (k % 2 == 0) ? k + 1 : k - 1;
      const bool wins = fitness(k) < fitness(mate) || (fitness(k) == fitness(mate) && k < mate);
      if (!wins) continue;
    }
    eligible.push_back(k);
  }
  const int parents = config.elitist ? static_cast<int>(state.parent_f.size()) : 0;
  const int pool_size = static_cast<int>(eligible.size()) + parents;
  Matrix pool_x(n, pool_size);
  Matrix pool_y(n, pool_size);
  Vector pool_f(pool_size);
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    pool_x.col(col) = population.x.col(eligible[i]);
    pool_y.col(col) = population.y.col(eligible[i]);
    pool_f(col) = fitness(eligible[i]);
  }
  for (int p = 0; p < parents; ++p) {
    const auto col = static_cast<Eigen::Index>(eligible.size()) + p;
    pool_x.col(col) = state.parent_x.col(p);
    pool_y.col(col) = (state.parent_x.col(p) - state.mean) / state.sigma;
    pool_f(col) = state.parent_f(p);
  }

  std::vector<int> order(static_cast<std::size_t>(pool_size));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pool_f(a) < pool_f(b); });

  const int mu = state.mu;
  Matrix selected_y(n, mu);
  Matrix selected_x(n, mu);
  Vector selected_f(mu);
  for (int i = 0; i < mu; ++i) {
    selected_y.col(i) = pool_y.col(order[static_cast<std::size_t>(i)]);
    selected_x.col(i) = pool_x.col(order[static_cast<std::size_t>(i)]);
    selected_f(i) = pool_f(order[static_cast<std::size_t>(i)]);
  }

  const auto& k = state.constants;
  const Vector y_w = selected_y * state.weights;
  state.mean += state.sigma * y_w;

  state.p_sigma = (1.0 - k.c_sigma) * state.p_sigma +
                  std::sqrt(k.c_sigma * (2.0 - k.c_sigma) * k.mu_eff) * (state.inv_sqrt_C * y_w);
  const double ps_norm = state.p_sigma.norm();
  const double decay = 1.0 - std::pow(1.0 - k.c_sigma, 2.0 * (state.generation + 1));
  const bool h_sigma = ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (n + 1.0)) * k.chi_n;
  state.p_c = (1.0 - k.c_c) * state.p_c;
  if (h_sigma) state.p_c += std::sqrt(k.c_c * (2.0 - k.c_c) * k.mu_eff) * y_w;

  const double correction = h_sigma ? 0.0 : k.c_1 * k.c_c * (2.0 - k.c_c);
  const Matrix rank_mu = selected_y * state.weights.asDiagonal() * selected_y.transpose();
  state.C = (1.0 - k.c_1 - k.c_mu + correction) * state.C +
            k.c_1 * state.p_c * state.p_c.transpose() + k.c_mu * rank_mu;
  state.C = Matrix(0.5 * (state.C + state.C.transpose()));

  switch (config.ssa) {
    case StepSizeAdaptation::csa:
      state.sigma *= csa_step_factor(ps_norm, k);
      break;
    case StepSizeAdaptation::psr:
      if (state.previous_fitness.size() == fitness.size()) {
        Vector current = fitness;
        Vector previous = state.previous_fitness;
        std::sort(current.data(), current.data() + current.size());
        std::sort(previous.data(), previous.data() + previous.size());
        state.sigma *= psr_step_factor(psr_success(previous, current), k);
      }
      break;
  }
  state.previous_fitness = fitness;
  if (config.elitist) {
    state.parent_x = selected_x;
    state.parent_f = selected_f;
  }

  ++state.generation;
  state.evaluations += lambda;
  if (state.generation - state.last_eigen_update >= k.eigen_interval) update_eigensystem(state);

  if (!state.mean.allFinite() || !std::isfinite(state.sigma) || !state.C.allFinite())
    throw NumericalError("state corruption after generation " + std::to_string(state.generation));
}

bool restart_triggered(const CmaState& state, long generations_without_improvement) {
  if (state.sigma < 1e-12) return true;
  const long window = 50 * (1 + state.generation / state.lambda);
  if (generations_without_improvement > window) return true;
  const double dmax = state.d.maxCoeff();
  const double dmin = state.d.minCoeff();
  return dmin <= 0.0 || (dmax * dmax) / (dmin * dmin) > 1e14;
}

double RunRecord::at(std::int64_t budget) const {
  for (const auto& [b, p] : checkpoints)
    if (b == budget) return p;
  throw ContractError("RunRecord: no checkpoint at budget " + std::to_string(budget));
}

namespace {

struct RestartLedger {
  int lambda0 = 0;
  int large_exponent = 0;
  bool small_regime = false;
  std::int64_t large_budget = 0;
  std::int64_t small_budget = 0;
};

}  // namespace

RunRecord run_fixed_budget(const ProblemInstance& instance, const ModuleConfiguration& config,
                           std::span<const std::int64_t> budgets, std::uint64_t seed,
                           const GenerationObserver& observer) {
  if (budgets.empty()) throw ContractError("run_fixed_budget: no budgets");
  if (!std::is_sorted(budgets.begin(), budgets.end()))
    throw ContractError("run_fixed_budget: budgets must be sorted");
  const int n = instance.dimension();
  const std::int64_t max_budget = budgets.back();
  const int lambda0 = default_population_size(n);
  if (max_budget < lambda0) throw ContractError("run_fixed_budget: max budget below population size");

  constexpr double kInitialSigma = 2.0;
  RunRecord record;
  record.config_id = config.to_string();
  record.function_id = instance.function_id();
  record.instance_id = instance.instance_id();
  record.dimension = n;
  record.seed = seed;

  Rng rng(seed);
  auto fresh_mean = [&] {
    Vector m(n);
    for (int i = 0; i < n; ++i) m(i) = 8.0 * uniform_open01(rng) - 4.0;
    return m;
  };

  RestartLedger ledger{lambda0};
  CmaState state = make_state(n, lambda0, config, fresh_mean(), kInitialSigma, rng());
  record.population_sizes.push_back(lambda0);

  EvaluationContext context(instance);
  double best = std::numeric_limits<double>::infinity();
  double local_best = best;
  long stale = 0;
  std::size_t next_checkpoint = 0;
  std::int64_t local_start = 0;

  auto fill_remaining = [&] {
    while (next_checkpoint < budgets.size()) {
      record.checkpoints.emplace_back(budgets[next_checkpoint], best);
      ++next_checkpoint;
    }
  };

  try {
    while (context.evaluations() < max_budget) {
      Population pop = ask(state, config);
      Vector fitness(state.lambda);
      bool complete = true;
      bool improved = false;
      for (int k = 0; k < state.lambda; ++k) {
        if (context.evaluations() >= max_budget) {
          complete = false;
          break;
        }
        const double f = context(pop.x.col(k));
        if (!std::isfinite(f)) throw NumericalError("non-finite objective value");
        fitness(k) = f;
        const double p = precision(instance, f);
        best = std::min(best, p);
        if (p < local_best) {
          local_best = p;
          improved = true;
        }
        while (next_checkpoint < budgets.size() &&
               budgets[next_checkpoint] == context.evaluations()) {
          record.checkpoints.emplace_back(budgets[next_checkpoint], best);
          ++next_checkpoint;
        }
      }
      if (!complete) break;
      tell(state, config, pop, fitness);
      if (observer) observer(state);
      stale = improved ? 0 : stale + 1;

      if (config.restart != LocalRestart::off && restart_triggered(state, stale)) {
        const std::int64_t spent = context.evaluations() - local_start;
        (ledger.small_regime ? ledger.small_budget : ledger.large_budget) += spent;
        int lambda = lambda0;
        double sigma = kInitialSigma;
        if (config.restart == LocalRestart::ipop) {
          lambda = lambda0 << (record.restarts + 1);
        } else if (ledger.small_budget < ledger.large_budget) {
          ledger.small_regime = true;
          const double large = lambda0 * std::pow(2.0, std::max(ledger.large_exponent, 1));
          const double u = uniform_open01(rng);
          lambda = std::max(lambda0, static_cast<int>(std::floor(
                                         lambda0 * std::pow(0.5 * large / lambda0, u * u))));
          sigma = kInitialSigma * std::pow(10.0, -2.0 * uniform_open01(rng));
        } else {
          ledger.small_regime = false;
          ++ledger.large_exponent;
          lambda = lambda0 << ledger.large_exponent;
        }
        ++record.restarts;
        record.population_sizes.push_back(lambda);
        state = make_state(n, lambda, config, fresh_mean(), sigma, rng());
        local_best = std::numeric_limits<double>::infinity();
        stale = 0;
        local_start = context.evaluations();
      }
    }
  } catch (const NumericalError& e) {
    record.status = std::string("failed: ") + e.what();
  }
  fill_remaining();
  record.evaluations = context.evaluations();
  return record;
}

}  // namespace mcx
