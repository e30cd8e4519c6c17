#pragma once

#include <array>
#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "mcx/sampling.hpp"

namespace mcx {

enum class Mirror { off, mirrored, pairwise };
enum class BaseSampler { gaussian, sobol, halton };
enum class WeightsOption { standard, equal, exp_half };
enum class LocalRestart { off, ipop, bipop };
enum class BoundCorrection { off, saturate, mirror, toroidal };
enum class StepSizeAdaptation { csa, psr };

/// The seven module axes, in canonical encoding order.
enum class ModuleAxis { elitist, mirrored, base_sampler, weights, restart, bounds, ssa };

inline constexpr std::array<ModuleAxis, 7> kAllAxes{
    ModuleAxis::elitist, ModuleAxis::mirrored, ModuleAxis::base_sampler, ModuleAxis::weights,
    ModuleAxis::restart, ModuleAxis::bounds,   ModuleAxis::ssa};

/// Key used in the canonical encoding ("elitist", "mirrored", ..., "ssa").
std::string_view axis_key(ModuleAxis axis);

/// Accepts the canonical key or the long module name
/// (e.g. "step_size_adaptation", "local_restart").
ModuleAxis parse_axis(std::string_view name);

/// One setting of all seven module axes.
///
/// The canonical string lists every axis exactly once in a fixed order:
///   elitist=true;mirrored=mirrored;base_sampler=gaussian;weights=default;restart=off;bounds=saturate;ssa=csa
struct ModuleConfiguration {
  bool elitist = false;
  Mirror mirrored = Mirror::off;
  BaseSampler base_sampler = BaseSampler::gaussian;
  WeightsOption weights = WeightsOption::standard;
  LocalRestart restart = LocalRestart::off;
  BoundCorrection bounds = BoundCorrection::off;
  StepSizeAdaptation ssa = StepSizeAdaptation::csa;

  std::string to_string() const;
  static ModuleConfiguration parse(std::string_view text);

  /// Value of one axis in its canonical spelling.
  std::string value(ModuleAxis axis) const;

  /// Copy with one axis replaced (value in canonical spelling).
  ModuleConfiguration with(ModuleAxis axis, std::string_view value) const;

  auto operator<=>(const ModuleConfiguration&) const = default;
};

/// Allowed canonical values of an axis, in declaration order.
std::vector<std::string> axis_values(ModuleAxis axis);

SamplerKind to_sampler_kind(BaseSampler sampler);

/// The 40-configuration default portfolio: ten settings of the five
/// remaining axes, each crossed with elitism on/off and csa/psr. Contains
/// 20 elitism pairs and 20 step-size pairs.
std::vector<ModuleConfiguration> default_portfolio();

/// Four elitism pairs used by the desk profile.
std::vector<ModuleConfiguration> desk_portfolio();

}  // namespace mcx
