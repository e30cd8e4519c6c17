#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mcx/common.hpp"

namespace mcx {

class ProblemInstance;

enum class SamplerKind { uniform, sobol, halton, gaussian };

std::string_view to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(std::string_view text);

/// Inverse of the standard normal CDF. Acklam's rational approximation
/// followed by one Halley step against erfc; |error| is around 1e-15.
double normal_quantile(double p);

/// Gray-code Sobol sequence over [0,1)^d with 32-bit resolution and an
/// optional XOR digital shift.
class SobolSequence {
 public:
  static int max_dimension();

  SobolSequence(int dimension, std::uint64_t skip = 1,
                std::vector<std::uint32_t> digital_shift = {});

  int dimension() const { return static_cast<int>(state_.size()); }
  std::uint64_t index() const { return index_; }

  /// Writes the point at the current index and advances.
  void next(Eigen::Ref<Vector> out);

  /// Direction numbers V_1..V_32 for one coordinate (index 0 is V_1).
  const std::array<std::uint32_t, 32>& directions(int coordinate) const {
    return directions_[static_cast<std::size_t>(coordinate)];
  }

 private:
  void seek(std::uint64_t index);

  std::vector<std::array<std::uint32_t, 32>> directions_;
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
  std::uint64_t index_ = 0;
};

/// Rows are points: `count` consecutive Sobol points starting at `skip`.
Matrix sobol_points(int dimension, int count, std::uint64_t skip = 1);

/// Halton sequence with an optional Cranley-Patterson rotation.
class HaltonSequence {
 public:
  HaltonSequence(int dimension, std::uint64_t start = 1, Vector rotation = {});

  int dimension() const { return static_cast<int>(bases_.size()); }
  void next(Eigen::Ref<Vector> out);

 private:
  std::vector<std::uint32_t> bases_;
  Vector rotation_;
  std::uint64_t index_;
};

/// Value-semantic stream of standard normal vectors. `gaussian` draws from a
/// Mersenne Twister; `sobol` and `halton` push their low-discrepancy points
/// through normal_quantile. When `randomize` is set the quasi-random
/// variants are shifted by a seed-derived offset.
class GaussianStream {
 public:
  GaussianStream() : GaussianStream(SamplerKind::gaussian, 0, 0) {}
  GaussianStream(SamplerKind kind, int dimension, std::uint64_t seed, bool randomize = true);

  SamplerKind kind() const { return kind_; }
  int dimension() const { return dimension_; }

  /// count x dimension block of draws.
  Matrix block(int count);

 private:
  SamplerKind kind_;
  int dimension_;
  Rng rng_;
  std::vector<SobolSequence> sobol_;
  std::vector<HaltonSequence> halton_;
};

/// Free-function form of GaussianStream::block.
inline Matrix gaussian_block(GaussianStream& stream, int count) { return stream.block(count); }

/// A design sample: rows of X are points, y the objective values.
struct Sample {
  Matrix X;
  Vector y;
};

/// Sobol design on [-5,5]^D with factor*D points. Each repetition applies its
/// own digital shift keyed on (function, instance, dimension, repetition).
Sample design_for_ela(const ProblemInstance& instance, int repetition, int factor = 100);

}  // namespace mcx
