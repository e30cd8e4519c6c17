#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

namespace mcx {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error families. The CLI maps these onto exit codes.
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct RegistryError : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct CapabilityError : std::length_error {
  using std::length_error::length_error;
};
struct ConfigurationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct MissingInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Order-sensitive hash of a sequence of 64-bit words.
std::uint64_t hash_words(std::initializer_list<std::uint64_t> words);

/// FNV-1a over bytes, then mixed.
std::uint64_t hash_string(std::string_view text);

using Rng = std::mt19937_64;

/// Uniform draw in the open interval (0, 1) with 53 bits of resolution.
/// Unlike std::uniform_real_distribution this is bit-identical across
/// standard libraries.
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw by inverse CDF of uniform_open01.
double standard_normal(Rng& rng);

/// Integer in [0, n) without modulo bias.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Fisher-Yates shuffle driven by uniform_index (portable, unlike std::shuffle).
template <typename Container>
void shuffle_in_place(Container& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Work is claimed
/// from a shared atomic counter; callers write results by index so the
/// outcome never depends on scheduling.
void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& body);

/// Round-trip formatting of a double ("%.17g").
std::string format_double(double value);

}  // namespace mcx
