#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mcx/common.hpp"

namespace mcx {

enum class FunctionCategory {
  separable,
  moderate_conditioning,
  high_conditioning,
  multimodal_adequate,
  multimodal_weak,
};

std::string_view to_string(FunctionCategory category);

struct FunctionInfo {
  int id;
  std::string_view name;
  FunctionCategory category;
  bool multimodal;
};

/// The 24 noiseless functions, ordered by id.
std::span<const FunctionInfo> function_registry();

const FunctionInfo& function_info(int function_id);

/// Explicit transformation for building an instance by hand (tests, custom
/// suites). Empty rotation matrices mean identity.
struct InstanceTransform {
  Vector shift;
  double f_opt = 0.0;
  Matrix rotation;
  Matrix second_rotation;
};

/// A transformed benchmark function with a known optimum. Immutable after
/// construction and safe to evaluate concurrently.
class ProblemInstance {
 public:
  int function_id() const { return function_id_; }
  int instance_id() const { return instance_id_; }
  int dimension() const { return static_cast<int>(x_opt_.size()); }

  const Vector& shift() const { return shift_; }
  const Vector& x_opt() const { return x_opt_; }
  double f_opt() const { return f_opt_; }

  /// Zero, one or two orthogonal matrices depending on the function.
  std::vector<Matrix> rotations() const;

  static constexpr double lower_bound = -5.0;
  static constexpr double upper_bound = 5.0;

  /// Objective value; total on R^D.
  double operator()(const Eigen::Ref<const Vector>& x) const;

 private:
  friend ProblemInstance make_instance(int, int, int);
  friend ProblemInstance make_instance(int, int, const InstanceTransform&);

  struct Peak {
    Vector rotated_center;
    Vector conditioning;
    double weight;
  };

  void finalize(Rng& rng);
  double raw(const Eigen::Ref<const Vector>& x) const;

  int function_id_ = 0;
  int instance_id_ = 0;
  Vector shift_;
  Vector x_opt_;
  double f_opt_ = 0.0;
  double offset_ = 0.0;
  Matrix rotation_;
  Matrix second_rotation_;
  bool has_rotation_ = false;
  bool has_second_rotation_ = false;
  std::vector<Peak> peaks_;
};

/// Deterministic instance keyed on (function, instance, dimension).
ProblemInstance make_instance(int function_id, int instance_id, int dimension);

/// Instance from an explicit transform (instance id 0).
ProblemInstance make_instance(int function_id, int dimension,
                              const InstanceTransform& transform);

/// Checked evaluation: dimension and finiteness of x are validated.
double evaluate(const ProblemInstance& instance,
                const Eigen::Ref<const Vector>& x);

/// max(f_value - f_opt, 0).
double precision(const ProblemInstance& instance, double f_value);

/// Evaluation counter owned by one optimiser run.
class EvaluationContext {
 public:
  explicit EvaluationContext(const ProblemInstance& instance)
      : instance_(&instance) {}

  double operator()(const Eigen::Ref<const Vector>& x) {
    ++evaluations_;
    return evaluate(*instance_, x);
  }

  std::int64_t evaluations() const { return evaluations_; }
  const ProblemInstance& instance() const { return *instance_; }

 private:
  const ProblemInstance* instance_;
  std::int64_t evaluations_ = 0;
};

/// Orthogonal matrix from the QR factorisation of a Gaussian matrix.
Matrix random_rotation(int dimension, Rng& rng);

/// Oscillation transform applied elementwise.
template <typename Derived>
Vector oscillate(const Eigen::MatrixBase<Derived>& x) {
  return x.unaryExpr([](double v) {
    if (v == 0.0) return 0.0;
    const double log_abs = std::log(std::abs(v));
    const double c1 = v > 0 ? 10.0 : 5.5;
    const double c2 = v > 0 ? 7.9 : 3.1;
    return std::copysign(
        std::exp(log_abs + 0.049 * (std::sin(c1 * log_abs) + std::sin(c2 * log_abs))),
        v);
  });
}

/// Asymmetry transform with exponent beta.
template <typename Derived>
Vector asymmetrize(const Eigen::MatrixBase<Derived>& x, double beta) {
  const Eigen::Index n = x.size();
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = x(i);
    const double ratio = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    out(i) = v > 0 ? std::pow(v, 1.0 + beta * ratio * std::sqrt(v)) : v;
  }
  return out;
}

/// Diagonal of the conditioning matrix with ratio alpha.
Vector conditioning_diagonal(int dimension, double alpha);

/// Boundary penalty sum(max(0, |x_i| - 5)^2).
template <typename Derived>
double boundary_penalty(const Eigen::MatrixBase<Derived>& x) {
  return (x.array().abs() - 5.0).max(0.0).square().sum();
}

}  // namespace mcx
