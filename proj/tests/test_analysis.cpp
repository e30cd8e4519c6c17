#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "mcx/analysis.hpp"
#include "mcx/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace mcx;

namespace {

ModuleConfiguration row(bool elitist) {
  return ModuleConfiguration::parse(std::string("elitist=") + (elitist ? "true" : "false") +
                                    ";mirrored=mirrored;base_sampler=gaussian;weights=default;restart=off;"
                                    "bounds=saturate;ssa=csa");
}

}  // namespace

TEST(Pairs, TwoRowsDifferingInElitism) {
  const std::vector<ModuleConfiguration> rows{row(true), row(false)};
  const auto pairs = find_pairs(rows, ModuleAxis::elitist);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_FALSE(pairs[0].a.elitist);
  EXPECT_TRUE(pairs[0].b.elitist);
  EXPECT_TRUE(find_pairs(rows, ModuleAxis::mirrored).empty());
  EXPECT_EQ(find_pairs(rows, "elitist").size(), 1u);
}

TEST(Pairs, BruteForceOverUnorderedPairs) {
  const auto configs = synthetic::pair_portfolio(ModuleAxis::elitist, 2);
  ASSERT_EQ(configs.size(), 4u);
  std::size_t brute = 0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      int differing = 0;
      for (const auto a : kAllAxes) differing += configs[i].value(a) != configs[j].value(a);
      brute += differing == 1 && configs[i].elitist != configs[j].elitist;
    }
  EXPECT_EQ(brute, 2u);
  EXPECT_EQ(find_pairs(configs, ModuleAxis::elitist).size(), 2u);
}

TEST(Pairs, OrderOfInputDoesNotMatter) {
  auto configs = default_portfolio();
  const auto forward = find_pairs(configs, ModuleAxis::ssa);
  std::reverse(configs.begin(), configs.end());
  const auto backward = find_pairs(configs, ModuleAxis::ssa);
  ASSERT_EQ(forward.size(), backward.size());
  for (std::size_t i = 0; i < forward.size(); ++i) {
    EXPECT_EQ(forward[i].a, backward[i].a);
    EXPECT_EQ(forward[i].b, backward[i].b);
  }
  EXPECT_EQ(forward.size(), 20u);
  EXPECT_EQ(find_pairs(default_portfolio(), ModuleAxis::elitist).size(), 20u);
  EXPECT_EQ(find_pairs(desk_portfolio(), ModuleAxis::elitist).size(), 4u);
  configs.push_back(configs.front());
  EXPECT_THROW(find_pairs(configs, ModuleAxis::ssa), ConfigurationError);
}

TEST(TopK, DescendingWithIndexTieBreak) {
  Vector v(5);
  v << 0.1, 0.5, 0.5, 0.9, 0.0;
  EXPECT_EQ(top_k_features(v, 3), (std::vector<int>{3, 1, 2}));
  EXPECT_EQ(top_k_features(v, 10).size(), 5u);
}

TEST(Frequency, AllFeaturesCountEveryPairAtFullK) {
  const auto configs = synthetic::pair_portfolio(ModuleAxis::elitist, 11);
  const auto reps = synthetic::random_representations(configs, {500, 2000}, 5, 3);
  const auto pairs = find_pairs(configs, ModuleAxis::elitist);
  const auto cells = topk_frequency(reps, pairs, 46);
  ASSERT_EQ(cells.size(), 4u);
  for (const auto& c : cells)
    for (const int n : c.counts) EXPECT_EQ(n, 11);
  EXPECT_EQ(cells[0].module_value, "false");
  EXPECT_EQ(cells[1].module_value, "true");
}

TEST(Frequency, FeatureTopInEveryConfigCountsAll) {
  const auto configs = synthetic::pair_portfolio(ModuleAxis::elitist, 11);
  auto reps = synthetic::random_representations(configs, {500}, 5, 4);
  for (auto& r : reps) r.values(17) = 5.0;
  const auto cells = topk_frequency(reps, find_pairs(configs, ModuleAxis::elitist), 10);
  int total = 0;
  for (const auto& c : cells) {
    EXPECT_EQ(c.counts[17], 11);
    total += std::accumulate(c.counts.begin(), c.counts.end(), 0);
  }
  EXPECT_EQ(total, 22 * 10);
}

TEST(Frequency, RankInvariantUnderScaling) {
  const auto configs = synthetic::pair_portfolio(ModuleAxis::elitist, 6);
  const auto pairs = find_pairs(configs, ModuleAxis::elitist);
  const auto reps = synthetic::random_representations(configs, {500, 2000}, 5, 8);
  const auto before = frequency_rows(topk_frequency(reps, pairs, 10));
  for (std::size_t i = 0; i < reps.size(); ++i) {
    auto scaled = reps;
    scaled[i].values *= 3.7;
    EXPECT_EQ(frequency_rows(topk_frequency(scaled, pairs, 10)), before);
    scaled[i].values = reps[i].values.array().exp().matrix();
    EXPECT_EQ(frequency_rows(topk_frequency(scaled, pairs, 10)), before);
  }
}

TEST(Frequency, MissingRepresentationIsAnError) {
  const auto configs = synthetic::pair_portfolio(ModuleAxis::elitist, 2);
  auto reps = synthetic::random_representations(configs, {500}, 5, 1);
  reps.pop_back();
  EXPECT_THROW(topk_frequency(reps, find_pairs(configs, ModuleAxis::elitist), 5), MissingInputError);
}

TEST(Classification, FullStudyCardinalities) {
  for (const auto& [axis, count] : {std::pair{ModuleAxis::elitist, 11}, std::pair{ModuleAxis::ssa, 18}}) {
    const auto configs = synthetic::pair_portfolio(axis, count);
    const auto reps = synthetic::random_representations(configs, synthetic::five_budgets(), 5, 2);
    const auto data = classification_dataset(reps, find_pairs(configs, axis), 5);
    EXPECT_EQ(data.X.rows(), count * 2 * 5);
    EXPECT_EQ(data.X.cols(), 46);
    EXPECT_EQ(std::count(data.labels.begin(), data.labels.end(), 1), count * 5);
  }
}

TEST(Classification, LabelMarksLaterValue) {
  const auto configs = synthetic::pair_portfolio(ModuleAxis::ssa, 1);
  const auto reps = synthetic::random_representations(configs, {500}, 5, 2);
  const auto data = classification_dataset(reps, find_pairs(configs, ModuleAxis::ssa), 5);
  ASSERT_EQ(data.labels.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i)
    EXPECT_EQ(data.labels[i], ModuleConfiguration::parse(data.config_ids[i]).ssa == StepSizeAdaptation::psr);
}

TEST(Classification, FoldsKeepUnitsTogetherAndBalanced) {
  std::vector<int> units;
  for (int u = 0; u < 55; ++u) units.insert(units.end(), {u, u});
  const auto folds = unit_folds(units, 5, 3);
  std::vector<int> per_fold(5, 0);
  for (std::size_t i = 0; i < units.size(); i += 2) {
    EXPECT_EQ(folds[i], folds[i + 1]);
    ++per_fold[static_cast<std::size_t>(folds[i])];
  }
  for (const int n : per_fold) EXPECT_EQ(n, 11);

  std::vector<int> labels(100);
  for (int i = 0; i < 100; ++i) labels[static_cast<std::size_t>(i)] = i % 2;
  const auto strat = stratified_folds(labels, 5, 1);
  std::vector<int> ones(5, 0);
  for (int i = 0; i < 100; ++i) ones[static_cast<std::size_t>(strat[static_cast<std::size_t>(i)])] += labels[static_cast<std::size_t>(i)];
  for (const int n : ones) EXPECT_EQ(n, 10);
}

TEST(Classification, SeparableDataIsLearnedPerfectly) {
  const auto configs = synthetic::pair_portfolio(ModuleAxis::elitist, 11);
  auto reps = synthetic::random_representations(configs, synthetic::five_budgets(), 5, 6);
  for (auto& r : reps) r.values(0) = ModuleConfiguration::parse(r.config_id).elitist ? 1.0 : -1.0;
  const auto data = classification_dataset(reps, find_pairs(configs, ModuleAxis::elitist), 5);
  const auto result = classify_module_status(data, 4);
  EXPECT_EQ(result.rows, 110u);
  EXPECT_DOUBLE_EQ(result.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(result.f1, 1.0);
  EXPECT_EQ(result.per_fold.size(), 5u);
}

TEST(Classification, DeterministicAndSingleClassRejected) {
  const auto configs = synthetic::pair_portfolio(ModuleAxis::elitist, 5);
  const auto reps = synthetic::random_representations(configs, {500, 2000}, 5, 9);
  const auto data = classification_dataset(reps, find_pairs(configs, ModuleAxis::elitist), 5);
  const auto a = classify_module_status(data, 2, 5, 1);
  const auto b = classify_module_status(data, 2, 5, 3);
  EXPECT_EQ(a.predictions, b.predictions);
  auto single = data;
  std::fill(single.labels.begin(), single.labels.end(), 1);
  EXPECT_THROW(classify_module_status(single, 2), DomainError);
}
