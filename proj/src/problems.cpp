#include "mcx/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

namespace mcx {

namespace {

constexpr std::array<FunctionInfo, 24> kRegistry{{
    {1, "sphere", FunctionCategory::separable, false},
    {2, "ellipsoid_separable", FunctionCategory::separable, false},
    {3, "rastrigin_separable", FunctionCategory::separable, true},
    {4, "bueche_rastrigin", FunctionCategory::separable, true},
    {5, "linear_slope", FunctionCategory::separable, false},
    {6, "attractive_sector", FunctionCategory::moderate_conditioning, false},
    {7, "step_ellipsoid", FunctionCategory::moderate_conditioning, false},
    {8, "rosenbrock", FunctionCategory::moderate_conditioning, false},
    {9, "rosenbrock_rotated", FunctionCategory::moderate_conditioning, false},
    {10, "ellipsoid", FunctionCategory::high_conditioning, false},
    {11, "discus", FunctionCategory::high_conditioning, false},
    {12, "bent_cigar", FunctionCategory::high_conditioning, false},
    {13, "sharp_ridge", FunctionCategory::high_conditioning, false},
    {14, "different_powers", FunctionCategory::high_conditioning, false},
    {15, "rastrigin", FunctionCategory::multimodal_adequate, true},
    {16, "weierstrass", FunctionCategory::multimodal_adequate, true},
    {17, "schaffers_f7", FunctionCategory::multimodal_adequate, true},
    {18, "schaffers_f7_ill_conditioned", FunctionCategory::multimodal_adequate, true},
    {19, "griewank_rosenbrock", FunctionCategory::multimodal_adequate, true},
    {20, "schwefel", FunctionCategory::multimodal_weak, true},
    {21, "gallagher_101", FunctionCategory::multimodal_weak, true},
    {22, "gallagher_21", FunctionCategory::multimodal_weak, true},
    {23, "katsuura", FunctionCategory::multimodal_weak, true},
    {24, "lunacek_bi_rastrigin", FunctionCategory::multimodal_weak, true},
}};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Which functions use one (R) or two (R, Q) rotations.
int rotation_count(int function_id) {
  switch (function_id) {
    case 9: case 10: case 11: case 12: case 14: case 19: case 21: case 22:
      return 1;
    case 6: case 7: case 13: case 15: case 16: case 17: case 18: case 23: case 24:
      return 2;
    default:
      return 0;
  }
}

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

double rosenbrock_scale(int dimension) {
  return std::max(1.0, std::sqrt(static_cast<double>(dimension)) / 8.0);
}

double rastrigin(const Vector& z) {
  const double n = static_cast<double>(z.size());
  return 10.0 * (n - (kTwoPi * z.array()).cos().sum()) + z.squaredNorm();
}

double weierstrass_term(double z) {
  double total = 0.0;
  double half_pow = 1.0;
  double three_pow = 1.0;
  for (int k = 0; k < 12; ++k) {
    total += half_pow * std::cos(kTwoPi * three_pow * (z + 0.5));
    half_pow *= 0.5;
    three_pow *= 3.0;
  }
  return total;
}

double schaffers(const Vector& z) {
  const Eigen::Index n = z.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double s = std::sqrt(z(i) * z(i) + z(i + 1) * z(i + 1));
    const double root = std::sqrt(s);
    const double wave = std::sin(50.0 * std::pow(s, 0.2));
    total += root + root * wave * wave;
  }
  total /= static_cast<double>(n - 1);
  return total * total;
}

double rosenbrock_sum(const Vector& z) {
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < z.size(); ++i) {
    const double a = z(i) * z(i) - z(i + 1);
    const double b = z(i) - 1.0;
    total += 100.0 * a * a + b * b;
  }
  return total;
}

}  // namespace

std::string_view to_string(FunctionCategory category) {
  switch (category) {
    case FunctionCategory::separable: return "separable";
    case FunctionCategory::moderate_conditioning: return "moderate_conditioning";
    case FunctionCategory::high_conditioning: return "high_conditioning";
    case FunctionCategory::multimodal_adequate: return "multimodal_adequate_structure";
    case FunctionCategory::multimodal_weak: return "multimodal_weak_structure";
  }
  return "unknown";
}

std::span<const FunctionInfo> function_registry() { return kRegistry; }

const FunctionInfo& function_info(int function_id) {
  if (function_id < 1 || function_id > static_cast<int>(kRegistry.size())) {
    std::ostringstream msg;
    msg << "unknown function id " << function_id << "; available ids:";
    for (const auto& info : kRegistry) msg << ' ' << info.id;
    throw RegistryError(msg.str());
  }
  return kRegistry[static_cast<std::size_t>(function_id - 1)];
}

Matrix random_rotation(int dimension, Rng& rng) {
  Matrix gaussian(dimension, dimension);
  for (Eigen::Index j = 0; j < gaussian.cols(); ++j)
    for (Eigen::Index i = 0; i < gaussian.rows(); ++i) gaussian(i, j) = standard_normal(rng);
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  return qr.householderQ() * Matrix::Identity(dimension, dimension);
}

Vector conditioning_diagonal(int dimension, double alpha) {
  Vector diag(dimension);
  for (int i = 0; i < dimension; ++i) {
    const double ratio = dimension > 1 ? static_cast<double>(i) / (dimension - 1) : 0.0;
    diag(i) = std::pow(alpha, 0.5 * ratio);
  }
  return diag;
}

std::vector<Matrix> ProblemInstance::rotations() const {
  std::vector<Matrix> out;
  if (has_rotation_) out.push_back(rotation_);
  if (has_second_rotation_) out.push_back(second_rotation_);
  return out;
}

void ProblemInstance::finalize(Rng& rng) {
  const int n = static_cast<int>(shift_.size());
  x_opt_ = shift_;
  switch (function_id_) {
    case 5:
      x_opt_ = shift_.unaryExpr([](double v) { return 5.0 * sign_of(v); });
      break;
    case 8:
    case 9:
      x_opt_ = 0.75 * shift_;
      break;
    case 20:
      x_opt_ = shift_.unaryExpr([](double v) { return 0.5 * 4.2096874633 * sign_of(v); });
      break;
    case 24:
      x_opt_ = shift_.unaryExpr([](double v) { return 1.25 * sign_of(v); });
      break;
    default:
      break;
  }

  if (function_id_ == 21 || function_id_ == 22) {
    const bool many = function_id_ == 21;
    const int count = many ? 101 : 21;
    const double spread = many ? 5.0 : 4.9;
    const double top_condition = many ? 1000.0 : 1.0e6;
    std::vector<int> exponents(static_cast<std::size_t>(count - 1));
    std::iota(exponents.begin(), exponents.end(), 0);
    shuffle_in_place(exponents, rng);

    const Matrix rotation = has_rotation_ ? rotation_ : Matrix::Identity(n, n);
    peaks_.clear();
    for (int p = 0; p < count; ++p) {
      Vector center(n);
      double alpha;
      double weight;
      if (p == 0) {
        center = x_opt_;
        alpha = top_condition;
        weight = 10.0;
      } else {
        for (int i = 0; i < n; ++i) center(i) = spread * (2.0 * uniform_open01(rng) - 1.0);
        alpha = std::pow(1000.0, 2.0 * exponents[static_cast<std::size_t>(p - 1)] / (count - 2));
        weight = 1.1 + 8.0 * (p - 1) / (count - 2);
      }
      Vector diag = conditioning_diagonal(n, alpha) / std::pow(alpha, 0.25);
      std::vector<double> entries(diag.data(), diag.data() + n);
      shuffle_in_place(entries, rng);
      peaks_.push_back(Peak{rotation * center,
                            Eigen::Map<Vector>(entries.data(), n), weight});
    }
  }

  offset_ = 0.0;
  offset_ = raw(x_opt_);
}

double ProblemInstance::raw(const Eigen::Ref<const Vector>& x) const {
  const int n = dimension();
  const double dn = static_cast<double>(n);
  auto rotate = [&](const Vector& v) -> Vector { return has_rotation_ ? Vector(rotation_ * v) : v; };
  auto rotate_q = [&](const Vector& v) -> Vector {
    return has_second_rotation_ ? Vector(second_rotation_ * v) : v;
  };
  auto ratio = [&](int i) { return n > 1 ? static_cast<double>(i) / (n - 1) : 0.0; };
  const Vector delta = x - x_opt_;

  switch (function_id_) {
    case 1:
      return delta.squaredNorm();
    case 2: {
      const Vector z = oscillate(delta);
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += std::pow(10.0, 6.0 * ratio(i)) * z(i) * z(i);
      return total;
    }
    case 3: {
      const Vector z = conditioning_diagonal(n, 10.0).cwiseProduct(asymmetrize(oscillate(delta), 0.2));
      return rastrigin(z);
    }
    case 4: {
      Vector z = oscillate(delta);
      for (int i = 0; i < n; ++i) {
        const double scale = std::pow(10.0, 0.5 * ratio(i));
        z(i) *= (z(i) > 0 && i % 2 == 0) ? 10.0 * scale : scale;
      }
      return rastrigin(z) + 100.0 * boundary_penalty(x);
    }
    case 5: {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        const double s = sign_of(x_opt_(i)) * std::pow(10.0, ratio(i));
        const double z = x_opt_(i) * x(i) < 25.0 ? x(i) : x_opt_(i);
        total += 5.0 * std::abs(s) - s * z;
      }
      return total;
    }
    case 6: {
      const Vector z = rotate_q(conditioning_diagonal(n, 10.0).cwiseProduct(rotate(delta)));
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        const double s = z(i) * x_opt_(i) > 0 ? 100.0 : 1.0;
        total += s * s * z(i) * z(i);
      }
      return std::pow(oscillate(Vector::Constant(1, total))(0), 0.9);
    }
    case 7: {
      const Vector hat = conditioning_diagonal(n, 10.0).cwiseProduct(rotate(delta));
      const Vector tilde = hat.unaryExpr([](double v) {
        return std::abs(v) > 0.5 ? std::floor(0.5 + v) : std::floor(0.5 + 10.0 * v) / 10.0;
      });
      const Vector z = rotate_q(tilde);
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += std::pow(10.0, 2.0 * ratio(i)) * z(i) * z(i);
      return 0.1 * std::max(std::abs(hat(0)) / 1.0e4, total) + boundary_penalty(x);
    }
    case 8:
      return rosenbrock_sum((rosenbrock_scale(n) * delta).array() + 1.0);
    case 9:
      return rosenbrock_sum((rosenbrock_scale(n) * rotate(delta)).array() + 1.0);
    case 10: {
      const Vector z = oscillate(rotate(delta));
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += std::pow(10.0, 6.0 * ratio(i)) * z(i) * z(i);
      return total;
    }
    case 11: {
      const Vector z = oscillate(rotate(delta));
      return 1.0e6 * z(0) * z(0) + z.tail(n - 1).squaredNorm();
    }
    case 12: {
      const Vector z = rotate(asymmetrize(rotate(delta), 0.5));
      return z(0) * z(0) + 1.0e6 * z.tail(n - 1).squaredNorm();
    }
    case 13: {
      const Vector z = rotate_q(conditioning_diagonal(n, 10.0).cwiseProduct(rotate(delta)));
      return z(0) * z(0) + 100.0 * std::sqrt(z.tail(n - 1).squaredNorm());
    }
    case 14: {
      const Vector z = rotate(delta);
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += std::pow(std::abs(z(i)), 2.0 + 4.0 * ratio(i));
      return std::sqrt(total);
    }
    case 15: {
      const Vector inner = rotate_q(asymmetrize(oscillate(rotate(delta)), 0.2));
      return rastrigin(rotate(conditioning_diagonal(n, 10.0).cwiseProduct(inner)));
    }
    case 16: {
      const Vector inner = rotate_q(oscillate(rotate(delta)));
      const Vector z = rotate(conditioning_diagonal(n, 0.01).cwiseProduct(inner));
      const double base = weierstrass_term(0.0);
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += weierstrass_term(z(i));
      const double cube = total / dn - base;
      return 10.0 * cube * cube * cube + 10.0 / dn * boundary_penalty(x);
    }
    case 17:
    case 18: {
      const double alpha = function_id_ == 17 ? 10.0 : 1000.0;
      const Vector z = conditioning_diagonal(n, alpha).cwiseProduct(
          rotate_q(asymmetrize(rotate(delta), 0.5)));
      return schaffers(z) + 10.0 * boundary_penalty(x);
    }
    case 19: {
      const Vector z = (rosenbrock_scale(n) * rotate(delta)).array() + 1.0;
      double total = 0.0;
      for (int i = 0; i + 1 < n; ++i) {
        const double a = z(i) * z(i) - z(i + 1);
        const double b = z(i) - 1.0;
        const double s = 100.0 * a * a + b * b;
        total += s / 4000.0 - std::cos(s);
      }
      return 10.0 * total / (n - 1) + 10.0;
    }
    case 20: {
      const Vector target = 2.0 * x_opt_.cwiseAbs();
      Vector hat(n);
      for (int i = 0; i < n; ++i) hat(i) = 2.0 * sign_of(x_opt_(i)) * x(i);
      Vector shifted = hat;
      for (int i = 1; i < n; ++i) shifted(i) += 0.25 * (hat(i - 1) - target(i - 1));
      const Vector z =
          100.0 * (conditioning_diagonal(n, 10.0).cwiseProduct(shifted - target) + target);
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += z(i) * std::sin(std::sqrt(std::abs(z(i))));
      return -total / (100.0 * dn) + 4.189828872724339 + 100.0 * boundary_penalty(z / 100.0);
    }
    case 21:
    case 22: {
      const Vector rx = rotate(Vector(x));
      double best = 0.0;
      for (const auto& peak : peaks_) {
        const double quad =
            (rx - peak.rotated_center).array().square().matrix().dot(peak.conditioning);
        best = std::max(best, peak.weight * std::exp(-quad / (2.0 * dn)));
      }
      const double t = oscillate(Vector::Constant(1, 10.0 - best))(0);
      return t * t + boundary_penalty(x);
    }
    case 23: {
      const Vector z = rotate_q(conditioning_diagonal(n, 100.0).cwiseProduct(rotate(delta)));
      const double exponent = 10.0 / std::pow(dn, 1.2);
      double product = 1.0;
      for (int i = 0; i < n; ++i) {
        double inner = 0.0;
        double scale = 2.0;
        for (int j = 1; j <= 32; ++j) {
          const double v = scale * z(i);
          inner += std::abs(v - std::nearbyint(v)) / scale;
          scale *= 2.0;
        }
        product *= std::pow(1.0 + (i + 1) * inner, exponent);
      }
      const double factor = 10.0 / (dn * dn);
      return factor * product - factor + boundary_penalty(x);
    }
    case 24: {
      constexpr double mu0 = 2.5;
      constexpr double d = 1.0;
      const double s = 1.0 - 1.0 / (2.0 * std::sqrt(dn + 20.0) - 8.2);
      const double mu1 = -std::sqrt((mu0 * mu0 - d) / s);
      Vector hat(n);
      for (int i = 0; i < n; ++i) hat(i) = 2.0 * sign_of(x_opt_(i)) * x(i);
      const Vector z = rotate_q(conditioning_diagonal(n, 100.0).cwiseProduct(
          rotate((hat.array() - mu0).matrix())));
      const double first = (hat.array() - mu0).square().sum();
      const double second = d * dn + s * (hat.array() - mu1).square().sum();
      return std::min(first, second) + 10.0 * (dn - (kTwoPi * z.array()).cos().sum()) +
             1.0e4 * boundary_penalty(x);
    }
    default:
      throw RegistryError("unknown function id " + std::to_string(function_id_));
  }
}

double ProblemInstance::operator()(const Eigen::Ref<const Vector>& x) const {
  return raw(x) - offset_ + f_opt_;
}

ProblemInstance make_instance(int function_id, int instance_id, int dimension) {
  function_info(function_id);
  if (instance_id < 1) throw DomainError("instance id must be >= 1");
  if (dimension < 2) throw DomainError("dimension must be >= 2");

  Rng rng(hash_words({static_cast<std::uint64_t>(function_id),
                      static_cast<std::uint64_t>(instance_id),
                      static_cast<std::uint64_t>(dimension)}));
  ProblemInstance inst;
  inst.function_id_ = function_id;
  inst.instance_id_ = instance_id;
  inst.shift_.resize(dimension);
  for (int i = 0; i < dimension; ++i) inst.shift_(i) = 8.0 * uniform_open01(rng) - 4.0;
  inst.f_opt_ = std::round(100.0 * (2000.0 * uniform_open01(rng) - 1000.0)) / 100.0;
  const int rotations = rotation_count(function_id);
  if (rotations >= 1) {
    inst.rotation_ = random_rotation(dimension, rng);
    inst.has_rotation_ = true;
  }
  if (rotations >= 2) {
    inst.second_rotation_ = random_rotation(dimension, rng);
    inst.has_second_rotation_ = true;
  }
  inst.finalize(rng);
  return inst;
}

ProblemInstance make_instance(int function_id, int dimension, const InstanceTransform& transform) {
  function_info(function_id);
  if (dimension < 2) throw DomainError("dimension must be >= 2");
  if (transform.shift.size() != dimension)
    throw ContractError("transform shift length does not match dimension");

  ProblemInstance inst;
  inst.function_id_ = function_id;
  inst.instance_id_ = 0;
  inst.shift_ = transform.shift;
  inst.f_opt_ = transform.f_opt;
  const int rotations = rotation_count(function_id);
  auto pick = [&](const Matrix& m) {
    if (m.size() == 0) return Matrix(Matrix::Identity(dimension, dimension));
    if (m.rows() != dimension || m.cols() != dimension)
      throw ContractError("transform rotation has wrong shape");
    return m;
  };
  if (rotations >= 1) {
    inst.rotation_ = pick(transform.rotation);
    inst.has_rotation_ = true;
  }
  if (rotations >= 2) {
    inst.second_rotation_ = pick(transform.second_rotation);
    inst.has_second_rotation_ = true;
  }
  Rng rng(hash_words({static_cast<std::uint64_t>(function_id), 0,
                      static_cast<std::uint64_t>(dimension), 0x7472616e73ULL}));
  inst.finalize(rng);
  return inst;
}

double evaluate(const ProblemInstance& instance, const Eigen::Ref<const Vector>& x) {
  if (x.size() != instance.dimension())
    throw ContractError("evaluate: expected " + std::to_string(instance.dimension()) +
                        " coordinates, got " + std::to_string(x.size()));
  if (!x.allFinite()) throw ContractError("evaluate: non-finite coordinate");
  return instance(x);
}

double precision(const ProblemInstance& instance, double f_value) {
  return std::max(f_value - instance.f_opt(), 0.0);
}

}  // namespace mcx
