#include "mcx/configuration.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace mcx {

namespace {

template <typename Enum, std::size_t N>
std::string_view name_of(Enum value, const std::array<std::string_view, N>& names) {
  return names[static_cast<std::size_t>(value)];
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<std::string_view, N>& names,
                std::string_view axis) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == text) return static_cast<Enum>(i);
  std::ostringstream msg;
  msg << "invalid value '" << text << "' for axis " << axis << "; expected one of";
  for (const auto n : names) msg << ' ' << n;
  throw ConfigurationError(msg.str());
}

constexpr std::array<std::string_view, 3> kMirrorNames{"off", "mirrored", "pairwise"};
constexpr std::array<std::string_view, 3> kSamplerNames{"gaussian", "sobol", "halton"};
constexpr std::array<std::string_view, 3> kWeightNames{"default", "equal", "exp_half"};
constexpr std::array<std::string_view, 3> kRestartNames{"off", "ipop", "bipop"};
constexpr std::array<std::string_view, 4> kBoundNames{"off", "saturate", "mirror", "toroidal"};
constexpr std::array<std::string_view, 2> kSsaNames{"csa", "psr"};
constexpr std::array<std::string_view, 2> kBoolNames{"false", "true"};

constexpr std::array<std::string_view, 7> kAxisKeys{"elitist", "mirrored", "base_sampler", "weights",
                                                    "restart", "bounds",   "ssa"};
constexpr std::array<std::string_view, 7> kAxisLongNames{
    "elitist",       "mirrored",         "base_sampler",        "weights_option",
    "local_restart", "bound_correction", "step_size_adaptation"};

}  // namespace

std::string_view axis_key(ModuleAxis axis) { return kAxisKeys[static_cast<std::size_t>(axis)]; }

ModuleAxis parse_axis(std::string_view name) {
  for (std::size_t i = 0; i < kAxisKeys.size(); ++i)
    if (kAxisKeys[i] == name || kAxisLongNames[i] == name) return static_cast<ModuleAxis>(i);
  std::ostringstream msg;
  msg << "unknown module axis '" << name << "'; available axes:";
  for (const auto k : kAxisKeys) msg << ' ' << k;
  throw ConfigurationError(msg.str());
}

std::vector<std::string> axis_values(ModuleAxis axis) {
  auto collect = [](const auto& names) {
    return std::vector<std::string>(names.begin(), names.end());
  };
  switch (axis) {
    case ModuleAxis::elitist: return collect(kBoolNames);
    case ModuleAxis::mirrored: return collect(kMirrorNames);
    case ModuleAxis::base_sampler: return collect(kSamplerNames);
    case ModuleAxis::weights: return collect(kWeightNames);
    case ModuleAxis::restart: return collect(kRestartNames);
    case ModuleAxis::bounds: return collect(kBoundNames);
    case ModuleAxis::ssa: return collect(kSsaNames);
  }
  return {};
}

std::string ModuleConfiguration::value(ModuleAxis axis) const {
  switch (axis) {
    case ModuleAxis::elitist: return std::string(kBoolNames[elitist ? 1 : 0]);
    case ModuleAxis::mirrored: return std::string(name_of(mirrored, kMirrorNames));
    case ModuleAxis::base_sampler: return std::string(name_of(base_sampler, kSamplerNames));
    case ModuleAxis::weights: return std::string(name_of(weights, kWeightNames));
    case ModuleAxis::restart: return std::string(name_of(restart, kRestartNames));
    case ModuleAxis::bounds: return std::string(name_of(bounds, kBoundNames));
    case ModuleAxis::ssa: return std::string(name_of(ssa, kSsaNames));
  }
  return {};
}

ModuleConfiguration ModuleConfiguration::with(ModuleAxis axis, std::string_view text) const {
  ModuleConfiguration out = *this;
  const auto key = axis_key(axis);
  switch (axis) {
    case ModuleAxis::elitist:
      out.elitist = parse_enum<int>(text, kBoolNames, key) == 1;
      break;
    case ModuleAxis::mirrored: out.mirrored = parse_enum<Mirror>(text, kMirrorNames, key); break;
    case ModuleAxis::base_sampler:
      out.base_sampler = parse_enum<BaseSampler>(text, kSamplerNames, key);
      break;
    case ModuleAxis::weights: out.weights = parse_enum<WeightsOption>(text, kWeightNames, key); break;
    case ModuleAxis::restart: out.restart = parse_enum<LocalRestart>(text, kRestartNames, key); break;
    case ModuleAxis::bounds: out.bounds = parse_enum<BoundCorrection>(text, kBoundNames, key); break;
    case ModuleAxis::ssa: out.ssa = parse_enum<StepSizeAdaptation>(text, kSsaNames, key); break;
  }
  return out;
}

std::string ModuleConfiguration::to_string() const {
  std::string out;
  for (const auto axis : kAllAxes) {
    if (!out.empty()) out += ';';
    out += axis_key(axis);
    out += '=';
    out += value(axis);
  }
  return out;
}

ModuleConfiguration ModuleConfiguration::parse(std::string_view text) {
  ModuleConfiguration out;
  std::map<ModuleAxis, bool> seen;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find(';', pos), text.size());
    const auto item = text.substr(pos, end - pos);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw ConfigurationError("configuration item '" + std::string(item) + "' lacks '='");
    const ModuleAxis axis = parse_axis(item.substr(0, eq));
    if (seen[axis])
      throw ConfigurationError("axis '" + std::string(axis_key(axis)) + "' given twice");
    seen[axis] = true;
    out = out.with(axis, item.substr(eq + 1));
    pos = end + 1;
  }
  for (const auto axis : kAllAxes)
    if (!seen[axis])
      throw ConfigurationError("configuration is missing axis '" + std::string(axis_key(axis)) + "'");
  return out;
}

SamplerKind to_sampler_kind(BaseSampler sampler) {
  switch (sampler) {
    case BaseSampler::gaussian: return SamplerKind::gaussian;
    case BaseSampler::sobol: return SamplerKind::sobol;
    case BaseSampler::halton: return SamplerKind::halton;
  }
  return SamplerKind::gaussian;
}

std::vector<ModuleConfiguration> default_portfolio() {
  // mirrored, base_sampler, weights, restart, bounds
  static constexpr std::array<std::array<int, 5>, 10> kBases{{
      {1, 0, 0, 0, 1},
      {0, 0, 0, 0, 0},
      {0, 1, 0, 0, 1},
      {2, 0, 1, 0, 1},
      {0, 2, 2, 1, 2},
      {1, 1, 0, 2, 1},
      {0, 0, 1, 1, 3},
      {2, 2, 0, 0, 0},
      {1, 0, 2, 2, 2},
      {0, 1, 1, 0, 3},
  }};
  std::vector<ModuleConfiguration> out;
  for (const auto& b : kBases) {
    for (const bool elitist : {true, false}) {
      for (const auto ssa : {StepSizeAdaptation::csa, StepSizeAdaptation::psr}) {
        ModuleConfiguration c;
        c.elitist = elitist;
        c.mirrored = static_cast<Mirror>(b[0]);
        c.base_sampler = static_cast<BaseSampler>(b[1]);
        c.weights = static_cast<WeightsOption>(b[2]);
        c.restart = static_cast<LocalRestart>(b[3]);
        c.bounds = static_cast<BoundCorrection>(b[4]);
        c.ssa = ssa;
        out.push_back(c);
      }
    }
  }
  return out;
}

std::vector<ModuleConfiguration> desk_portfolio() {
  static constexpr std::array<std::array<int, 5>, 4> kBases{{
      {1, 0, 0, 0, 1},
      {0, 0, 0, 0, 0},
      {2, 1, 1, 0, 1},
      {0, 2, 2, 1, 3},
  }};
  std::vector<ModuleConfiguration> out;
  for (const auto& b : kBases) {
    for (const bool elitist : {true, false}) {
      ModuleConfiguration c;
      c.elitist = elitist;
      c.mirrored = static_cast<Mirror>(b[0]);
      c.base_sampler = static_cast<BaseSampler>(b[1]);
      c.weights = static_cast<WeightsOption>(b[2]);
      c.restart = static_cast<LocalRestart>(b[3]);
      c.bounds = static_cast<BoundCorrection>(b[4]);
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace mcx
