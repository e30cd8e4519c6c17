#include "mcx/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "mcx/problems.hpp"
#include "mcx/sobol_directions.hpp"

namespace mcx {

namespace {

constexpr double kTwoToMinus32 = 0x1.0p-32;

std::array<std::uint32_t, 32> direction_numbers(int coordinate) {
  std::array<std::uint32_t, 32> v{};
  if (coordinate == 0) {
    for (int i = 0; i < 32; ++i) v[static_cast<std::size_t>(i)] = 1u << (31 - i);
    return v;
  }
  const auto& poly = detail::kSobolPolynomials[static_cast<std::size_t>(coordinate - 1)];
  const int s = poly.degree;
  for (int i = 0; i < s && i < 32; ++i)
    v[static_cast<std::size_t>(i)] = poly.initial[static_cast<std::size_t>(i)] << (31 - i);
  for (int i = s; i < 32; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const auto us = static_cast<std::size_t>(s);
    std::uint32_t value = v[ui - us] ^ (v[ui - us] >> s);
    for (int k = 1; k < s; ++k) {
      if ((poly.coefficients >> (s - 1 - k)) & 1u) value ^= v[ui - static_cast<std::size_t>(k)];
    }
    v[ui] = value;
  }
  return v;
}

std::vector<std::uint32_t> first_primes(int count) {
  std::vector<std::uint32_t> primes;
  for (std::uint32_t candidate = 2; static_cast<int>(primes.size()) < count; ++candidate) {
    bool prime = true;
    for (const auto p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(candidate);
  }
  return primes;
}

double radical_inverse(std::uint64_t index, std::uint32_t base) {
  double result = 0.0;
  double factor = 1.0 / base;
  while (index > 0) {
    result += factor * static_cast<double>(index % base);
    index /= base;
    factor /= base;
  }
  return result;
}

double clamp_open(double u) {
  constexpr double tiny = 0x1.0p-33;
  return std::clamp(u, tiny, 1.0 - tiny);
}

}  // namespace

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::uniform: return "uniform";
    case SamplerKind::sobol: return "sobol";
    case SamplerKind::halton: return "halton";
    case SamplerKind::gaussian: return "gaussian";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(std::string_view text) {
  if (text == "uniform") return SamplerKind::uniform;
  if (text == "sobol") return SamplerKind::sobol;
  if (text == "halton") return SamplerKind::halton;
  if (text == "gaussian") return SamplerKind::gaussian;
  throw ConfigurationError("unknown sampler '" + std::string(text) + "'");
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;
  constexpr double high = 1.0 - low;

  if (p == 0.5) return 0.0;
  double x;
  if (p < low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= high) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement. Work in the tail closest to p to avoid cancellation.
  const double e = p < 0.5 ? 0.5 * std::erfc(-x / std::numbers::sqrt2) - p
                           : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

int SobolSequence::max_dimension() { return detail::kSobolMaxDimension; }

SobolSequence::SobolSequence(int dimension, std::uint64_t skip,
                             std::vector<std::uint32_t> digital_shift)
    : shift_(std::move(digital_shift)) {
  if (dimension < 1) throw ContractError("SobolSequence: dimension must be >= 1");
  if (dimension > max_dimension())
    throw CapabilityError("SobolSequence: dimension " + std::to_string(dimension) +
                          " exceeds direction-number table (" +
                          std::to_string(max_dimension()) + ")");
  if (shift_.empty()) shift_.assign(static_cast<std::size_t>(dimension), 0u);
  if (static_cast<int>(shift_.size()) != dimension)
    throw ContractError("SobolSequence: digital shift has wrong length");
  directions_.reserve(static_cast<std::size_t>(dimension));
  for (int j = 0; j < dimension; ++j) directions_.push_back(direction_numbers(j));
  state_.assign(static_cast<std::size_t>(dimension), 0u);
  seek(skip);
}

void SobolSequence::seek(std::uint64_t index) {
  if (index >= (std::uint64_t{1} << 32)) throw CapabilityError("SobolSequence: index exceeds 2^32");
  const std::uint64_t gray = index ^ (index >> 1);
  for (std::size_t j = 0; j < state_.size(); ++j) {
    std::uint32_t value = 0;
    for (int bit = 0; bit < 32; ++bit)
      if ((gray >> bit) & 1u) value ^= directions_[j][static_cast<std::size_t>(bit)];
    state_[j] = value;
  }
  index_ = index;
}

void SobolSequence::next(Eigen::Ref<Vector> out) {
  if (out.size() != dimension()) throw ContractError("SobolSequence::next: wrong output size");
  for (std::size_t j = 0; j < state_.size(); ++j)
    out(static_cast<Eigen::Index>(j)) = static_cast<double>(state_[j] ^ shift_[j]) * kTwoToMinus32;
  // Gray-code step: flip the direction number at the lowest zero bit of index.
  const int c = std::countr_one(index_);
  if (c >= 32) throw CapabilityError("SobolSequence: exhausted 2^32 points");
  for (std::size_t j = 0; j < state_.size(); ++j) state_[j] ^= directions_[j][static_cast<std::size_t>(c)];
  ++index_;
}

Matrix sobol_points(int dimension, int count, std::uint64_t skip) {
  if (count < 1) throw ContractError("sobol_points: count must be >= 1");
  SobolSequence seq(dimension, skip);
  Matrix points(count, dimension);
  Vector row(dimension);
  for (int i = 0; i < count; ++i) {
    seq.next(row);
    points.row(i) = row.transpose();
  }
  return points;
}

HaltonSequence::HaltonSequence(int dimension, std::uint64_t start, Vector rotation)
    : bases_(first_primes(dimension)), rotation_(std::move(rotation)), index_(start) {
  if (dimension < 1) throw ContractError("HaltonSequence: dimension must be >= 1");
  if (rotation_.size() == 0) rotation_ = Vector::Zero(dimension);
  if (rotation_.size() != dimension) throw ContractError("HaltonSequence: rotation has wrong length");
}

void HaltonSequence::next(Eigen::Ref<Vector> out) {
  for (std::size_t j = 0; j < bases_.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    double u = radical_inverse(index_, bases_[j]) + rotation_(jj);
    if (u >= 1.0) u -= 1.0;
    out(jj) = u;
  }
  ++index_;
}

GaussianStream::GaussianStream(SamplerKind kind, int dimension, std::uint64_t seed, bool randomize)
    : kind_(kind), dimension_(dimension), rng_(seed) {
  switch (kind) {
    case SamplerKind::gaussian:
      break;
    case SamplerKind::sobol: {
      std::vector<std::uint32_t> shift(static_cast<std::size_t>(dimension), 0u);
      if (randomize)
        for (auto& s : shift) s = static_cast<std::uint32_t>(rng_() >> 32);
      sobol_.emplace_back(dimension, 1, std::move(shift));
      break;
    }
    case SamplerKind::halton: {
      Vector rotation = Vector::Zero(dimension);
      if (randomize)
        for (Eigen::Index j = 0; j < rotation.size(); ++j) rotation(j) = uniform_open01(rng_);
      halton_.emplace_back(dimension, 1, std::move(rotation));
      break;
    }
    case SamplerKind::uniform:
      throw ContractError("GaussianStream: uniform is not a normal sampler");
  }
}

Matrix GaussianStream::block(int count) {
  Matrix out(count, dimension_);
  Vector u(dimension_);
  for (int i = 0; i < count; ++i) {
    switch (kind_) {
      case SamplerKind::gaussian:
        for (int j = 0; j < dimension_; ++j) u(j) = uniform_open01(rng_);
        break;
      case SamplerKind::sobol:
        sobol_.front().next(u);
        break;
      case SamplerKind::halton:
        halton_.front().next(u);
        break;
      case SamplerKind::uniform:
        break;
    }
    for (int j = 0; j < dimension_; ++j) out(i, j) = normal_quantile(clamp_open(u(j)));
  }
  return out;
}

Sample design_for_ela(const ProblemInstance& instance, int repetition, int factor) {
  if (repetition < 0) throw ContractError("design_for_ela: repetition must be >= 0");
  if (factor < 1) throw ContractError("design_for_ela: factor must be >= 1");
  const int dimension = instance.dimension();
  const int n = factor * dimension;

  Rng rng(hash_words({static_cast<std::uint64_t>(instance.function_id()),
                      static_cast<std::uint64_t>(instance.instance_id()),
                      static_cast<std::uint64_t>(dimension),
                      static_cast<std::uint64_t>(repetition), 0x656c61ULL}));
  std::vector<std::uint32_t> shift(static_cast<std::size_t>(dimension));
  for (auto& s : shift) s = static_cast<std::uint32_t>(rng() >> 32);
  SobolSequence seq(dimension, 1, std::move(shift));

  Sample sample{Matrix(n, dimension), Vector(n)};
  const double lo = ProblemInstance::lower_bound;
  const double width = ProblemInstance::upper_bound - ProblemInstance::lower_bound;
  Vector u(dimension);
  for (int i = 0; i < n; ++i) {
    seq.next(u);
    sample.X.row(i) = (lo + width * u.array()).matrix().transpose();
    sample.y(i) = evaluate(instance, sample.X.row(i).transpose());
  }
  return sample;
}

}  // namespace mcx
