#pragma once

// Synthetic portfolios and representations for the analysis layer.

#include <cstdint>
#include <vector>

#include "mcx/analysis.hpp"

namespace synthetic {

/// `count` pairs differing only on `axis` (first two values of the axis);
/// the remaining axes walk through distinct combinations.
inline std::vector<mcx::ModuleConfiguration> pair_portfolio(mcx::ModuleAxis axis, int count) {
  std::vector<mcx::ModuleAxis> others;
  for (const auto a : mcx::kAllAxes)
    if (a != axis) others.push_back(a);
  std::vector<mcx::ModuleConfiguration> out;
  const auto values = mcx::axis_values(axis);
  for (int k = 0; static_cast<int>(out.size()) < 2 * count; ++k) {
    mcx::ModuleConfiguration base;
    int code = k;
    for (const auto a : others) {
      const auto v = mcx::axis_values(a);
      base = base.with(a, v[static_cast<std::size_t>(code % static_cast<int>(v.size()))]);
      code /= static_cast<int>(v.size());
    }
    out.push_back(base.with(axis, values[0]));
    out.push_back(base.with(axis, values[1]));
  }
  return out;
}

/// One random 46-entry representation per (config, budget) at one dimension.
inline std::vector<mcx::Representation> random_representations(const std::vector<mcx::ModuleConfiguration>& configs,
                                                               const std::vector<std::int64_t>& budgets,
                                                               int dimension, std::uint64_t seed) {
  mcx::Rng rng(seed);
  std::vector<mcx::Representation> out;
  for (const auto& c : configs)
    for (const auto b : budgets) {
      mcx::Vector v(46);
      for (int i = 0; i < 46; ++i) v(i) = mcx::uniform_open01(rng);
      out.push_back(mcx::Representation{c.to_string(), dimension, b, v});
    }
  return out;
}

inline const std::vector<std::int64_t>& five_budgets() {
  static const std::vector<std::int64_t> b{500, 2000, 5000, 10000, 50000};
  return b;
}

}  // namespace synthetic
