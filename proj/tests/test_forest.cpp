#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "mcx/forest.hpp"
#include "oracles/random_cases.hpp"
#include "oracles/split_oracle.hpp"

using namespace mcx;

namespace {

Matrix step_X() {
  Matrix X(4, 1);
  X << 0, 1, 2, 3;
  return X;
}

Vector step_y() {
  Vector y(4);
  y << 0, 0, 1, 1;
  return y;
}

DecisionTree leaf(double v) {
  DecisionTree t;
  t.nodes.push_back(TreeNode{-1, 0.0, -1, -1, v});
  return t;
}

}  // namespace

TEST(Tree, StepDataGivesOneStump) {
  for (const int depth : {kUnboundedDepth, 1}) {
    HyperParams p;
    p.max_depth = depth;
    const auto tree = fit_tree(step_X(), step_y(), p, TaskKind::regression, 1);
    ASSERT_EQ(tree.nodes.size(), 3u);
    EXPECT_EQ(tree.nodes[0].feature, 0);
    EXPECT_DOUBLE_EQ(tree.nodes[0].threshold, 1.5);
    EXPECT_EQ(tree.nodes[static_cast<std::size_t>(tree.nodes[0].left)].value, 0.0);
    EXPECT_EQ(tree.nodes[static_cast<std::size_t>(tree.nodes[0].right)].value, 1.0);
  }
}

TEST(Tree, ConstantTargetIsASingleLeaf) {
  const auto tree = fit_tree(step_X(), Vector::Constant(4, 2.5), HyperParams{}, TaskKind::regression, 1);
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_EQ(tree.nodes[0].value, 2.5);
}

TEST(Tree, SplitMatchesExhaustiveEnumeration) {
  for (const auto c : {Criterion::squared_error, Criterion::absolute_error, Criterion::poisson, Criterion::gini}) {
    Rng rng(hash_words({static_cast<std::uint64_t>(c), 99}));
    for (int k = 0; k < 100; ++k) {
      const auto data = oracle::random_split_case(c, rng);
      const std::string problem = oracle::check_stump(c, data, static_cast<std::uint64_t>(k));
      EXPECT_TRUE(problem.empty()) << to_string(c) << " case " << k << ": " << problem;
    }
  }
}

TEST(Tree, NodeImpurityAgreesWithOracleDefinitions) {
  const std::vector<double> y{0, 1, 1, 4, 2, 0, 3};
  for (const auto c : {Criterion::squared_error, Criterion::absolute_error, Criterion::poisson, Criterion::gini})
    EXPECT_NEAR(node_impurity(c, y) * y.size(), oracle::total_impurity(c, y), 1e-12) << to_string(c);
}

TEST(Tree, MemorisesDistinctRows) {
  Rng rng(4);
  const Matrix X = oracle::random_rows(rng, 60, 3);
  Vector y(60);
  for (int i = 0; i < 60; ++i) y(i) = standard_normal(rng);
  HyperParams p;
  p.n_estimators = 1;
  p.bootstrap = false;
  const auto model = fit_forest(X, y, p, TaskKind::regression, 3);
  EXPECT_EQ(model.predict_rows(X), y);
  EXPECT_DOUBLE_EQ(r2_score(y, model.predict_rows(X)), 1.0);
}

TEST(Tree, PoissonRejectsNegativeTargets) {
  HyperParams p;
  p.criterion = Criterion::poisson;
  Vector y = step_y();
  y(1) = -1.0;
  EXPECT_THROW(fit_tree(step_X(), y, p, TaskKind::regression, 1), ContractError);
  EXPECT_THROW(fit_tree(step_X(), step_y(), p, TaskKind::classification, 1), ConfigurationError);
}

TEST(Forest, RegressionAveragesTrees) {
  RandomForestModel m;
  m.n_features = 1;
  m.trees = {leaf(1), leaf(2), leaf(6)};
  EXPECT_DOUBLE_EQ(m.predict(Vector::Zero(1)), 3.0);
}

TEST(Forest, ClassificationVoteTieGoesToLowestLabel) {
  RandomForestModel m;
  m.task = TaskKind::classification;
  m.n_features = 1;
  m.trees = {leaf(1), leaf(0)};
  EXPECT_EQ(m.predict(Vector::Zero(1)), 0.0);
  m.trees.push_back(leaf(1));
  EXPECT_EQ(m.predict(Vector::Zero(1)), 1.0);
}

TEST(Forest, DeterministicAcrossRunsAndWorkers) {
  Rng rng(12);
  const Matrix X = oracle::random_rows(rng, 80, 4);
  const Vector y = X.rowwise().squaredNorm();
  HyperParams p;
  p.n_estimators = 20;
  p.max_features = MaxFeatures::sqrt;
  const auto a = fit_forest(X, y, p, TaskKind::regression, 5, 1);
  const auto b = fit_forest(X, y, p, TaskKind::regression, 5, 3);
  EXPECT_EQ(a, b);
  const Matrix probe = oracle::random_rows(rng, 100, 4);
  EXPECT_EQ(a.predict_rows(probe), b.predict_rows(probe));
  EXPECT_NE(a, fit_forest(X, y, p, TaskKind::regression, 6, 1));
}

TEST(Forest, SerialisationRoundTrip) {
  Rng rng(13);
  const Matrix X = oracle::random_rows(rng, 40, 3);
  const Vector y = X.col(0) * 3.0 + X.col(2);
  HyperParams p;
  p.n_estimators = 5;
  p.criterion = Criterion::absolute_error;
  p.max_depth = 4;
  const auto model = fit_forest(X, y, p, TaskKind::regression, 8);
  std::stringstream buffer;
  save_model(buffer, model);
  const auto loaded = load_model(buffer);
  EXPECT_EQ(loaded, model);
  std::stringstream bad("not a model");
  EXPECT_THROW(load_model(bad), ContractError);
}

TEST(Metrics, RSquaredExamples) {
  Vector t(3), p(3);
  t << 1, 2, 3;
  p << 1, 2, 4;
  EXPECT_DOUBLE_EQ(r2_score(t, t), 1.0);
  EXPECT_DOUBLE_EQ(r2_score(t, Vector::Constant(3, 2.0)), 0.0);
  EXPECT_DOUBLE_EQ(r2_score(t, p), 0.5);
  EXPECT_THROW(r2_score(Vector::Ones(3), p), DomainError);
}

TEST(Metrics, ClassificationExamples) {
  const std::vector<int> truth{1, 1, 0, 0};
  auto m = classification_metrics(truth, truth);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  m = classification_metrics(truth, {0, 0, 1, 1});
  EXPECT_EQ(m.accuracy, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  m = classification_metrics(truth, {1, 0, 0, 0});
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_NEAR(m.f1, (2.0 / 3.0 + 0.8) / 2.0, 1e-15);
}

TEST(Metrics, TargetTransform) {
  EXPECT_DOUBLE_EQ(transform_target(0.0, TargetTransform::log_ratio), 0.0);
  EXPECT_NEAR(transform_target(1e-3, TargetTransform::log_ratio), std::log10((1e-3 + 1e-12) / 1e-12), 1e-12);
  EXPECT_EQ(transform_target(0.25, TargetTransform::raw), 0.25);
}

TEST(Grid, CardinalityAndOrder) {
  const auto full = full_grid();
  ASSERT_EQ(full.size(), 324u);
  std::set<std::string> unique;
  for (const auto& p : full) unique.insert(p.to_string());
  EXPECT_EQ(unique.size(), 324u);
  EXPECT_EQ(full[0].criterion, Criterion::squared_error);
  EXPECT_EQ(full[1].criterion, Criterion::absolute_error);
  EXPECT_EQ(full[2].criterion, Criterion::poisson);
  const auto small = restricted_grid();
  EXPECT_EQ(small.size(), 36u);
  for (const auto& p : small) {
    EXPECT_EQ(p.n_estimators, 100);
    EXPECT_EQ(p.min_samples_split, 2);
  }
}

TEST(Grid, HyperParamsRoundTrip) {
  for (const auto& p : full_grid()) EXPECT_EQ(HyperParams::parse(p.to_string()), p);
  EXPECT_EQ(HyperParams{}.to_string(),
            "n_estimators=100;max_features=auto;max_depth=none;min_samples_split=2;criterion=squared_error;"
            "bootstrap=true");
  EXPECT_THROW(HyperParams::parse("colour=red"), ConfigurationError);
}

namespace {

GroupedDataset five_groups() {
  Rng rng(21);
  GroupedDataset d;
  d.X = oracle::random_rows(rng, 50, 3);
  d.y = d.X.col(0) * 4.0 - d.X.col(1);
  for (int i = 0; i < 50; ++i) {
    d.groups.push_back(1 + i % 5);
    d.keys.emplace_back(1 + i / 5, 1 + i % 5);
  }
  return d;
}

std::vector<HyperParams> small_grid() {
  std::vector<HyperParams> grid;
  for (const int depth : {2, kUnboundedDepth}) {
    HyperParams p;
    p.n_estimators = 10;
    p.max_depth = depth;
    grid.push_back(p);
  }
  return grid;
}

}  // namespace

TEST(Logo, EachRowTrainsInFourFolds) {
  const auto d = five_groups();
  const auto result = logo_grid_search(d, small_grid(), 7);
  ASSERT_EQ(result.fold_groups, (std::vector<int>{1, 2, 3, 4, 5}));
  ASSERT_EQ(result.fold_models.size(), 5u);
  std::vector<int> appearances(50, 0);
  for (std::size_t f = 0; f < 5; ++f) {
    std::vector<Eigen::Index> train;
    for (int i = 0; i < 50; ++i)
      if (d.groups[static_cast<std::size_t>(i)] != result.fold_groups[f]) {
        train.push_back(i);
        ++appearances[static_cast<std::size_t>(i)];
      }
    const auto expected = fit_forest(d.X(train, Eigen::all), d.y(train), result.grid[result.best],
                                     TaskKind::regression, fold_seed(7, result.fold_groups[f]));
    EXPECT_EQ(result.fold_models[f], expected);
  }
  for (const int a : appearances) EXPECT_EQ(a, 4);
}

TEST(Logo, TiesKeepEarlierCandidate) {
  const auto d = five_groups();
  auto grid = small_grid();
  grid = {grid[1], grid[1], grid[0]};
  const auto result = logo_grid_search(d, grid, 3);
  EXPECT_EQ(result.mean_r2[0], result.mean_r2[1]);
  EXPECT_NE(result.best, 1u);
}

TEST(Logo, DeterministicAcrossWorkers) {
  const auto d = five_groups();
  const auto a = logo_grid_search(d, small_grid(), 9, 1);
  const auto b = logo_grid_search(d, small_grid(), 9, 4);
  EXPECT_EQ(a.mean_r2, b.mean_r2);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.fold_models, b.fold_models);
}

TEST(Logo, NeedsTwoGroups) {
  auto d = five_groups();
  std::fill(d.groups.begin(), d.groups.end(), 1);
  EXPECT_THROW(logo_grid_search(d, small_grid(), 1), ContractError);
}
