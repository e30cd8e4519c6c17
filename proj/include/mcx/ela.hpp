#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mcx/common.hpp"
#include "mcx/sampling.hpp"

namespace mcx {

inline constexpr int kFeatureCount = 46;

/// Canonical feature names in output order: distr (3), meta (9), disp (16),
/// ic (5), nbc (5), pca (8).
const std::vector<std::string>& feature_names();

/// Position of a canonical name; throws RegistryError for unknown names.
int feature_index(std::string_view name);

/// Output of one feature group (or of all of them). `degenerate[i]` marks a
/// value replaced by a sentinel or computed from guarded input.
struct FeatureValues {
  std::vector<double> values;
  std::vector<bool> degenerate;

  std::size_t size() const { return values.size(); }
  void append(const FeatureValues& other);
};

/// A full 46-entry feature vector.
struct FeatureVector : FeatureValues {
  double operator[](std::string_view name) const { return values[feature_index(name)]; }
  bool flagged(std::string_view name) const { return degenerate[feature_index(name)]; }
};

/// Bandwidth of R's bw.nrd0 (Silverman's rule of thumb).
double silverman_bandwidth(const Vector& y);

/// Modes of a Gaussian KDE (512 points over the range widened by 3 bandwidths)
/// whose segment between neighbouring density minima holds over 1% of the mass.
int kde_peak_count(const Vector& y);

FeatureValues distr_features(const Sample& sample);
FeatureValues meta_model_features(const Sample& sample);
FeatureValues dispersion_features(const Sample& sample);
FeatureValues information_content_features(const Sample& sample);
FeatureValues nbc_features(const Sample& sample);
FeatureValues pca_features(const Sample& sample);

/// Greedy nearest-neighbour tour over the rows of X starting at row 0.
std::vector<int> nearest_neighbor_tour(const Matrix& X);

/// Slopes (y_{k+1} - y_k) / |x_{k+1} - x_k| along a tour; 0 for coincident points.
std::vector<double> tour_slopes(const Sample& sample, const std::vector<int>& tour);

/// Entropy (base 6) over the six unequal consecutive symbol pairs at threshold eps.
double information_entropy(const std::vector<double>& slopes, double eps);

/// Fraction of sign changes among the non-zero symbols at eps = 0.
double partial_information(const std::vector<double>& slopes);

/// The information-content threshold grid: 0 followed by logspace(-5, 15, 1000).
const std::vector<double>& epsilon_grid();

/// All six groups on one sample.
FeatureVector compute_features(const Sample& sample);

/// Per-feature median over repetitions. A feature is flagged when it was
/// degenerate in more than half of them.
FeatureVector aggregate_repetitions(const std::vector<FeatureVector>& repetitions);

/// Median-aggregated features of one problem instance. When `raw` is given
/// it receives the per-repetition vectors in repetition order.
FeatureVector extract_features(const ProblemInstance& instance, int repetitions, int jobs = 1,
                               std::vector<FeatureVector>* raw = nullptr);

}  // namespace mcx
