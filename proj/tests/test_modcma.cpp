#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mcx/modcma.hpp"
#include "oracles/textbook_cma.hpp"

using namespace mcx;

namespace {

ModuleConfiguration plain() { return ModuleConfiguration{}; }

CmaState fresh(int n, const ModuleConfiguration& c, std::uint64_t seed = 1) {
  return make_state(n, default_population_size(n), c, Vector::Zero(n), 1.0, seed);
}

}  // namespace

TEST(ModCma, DefaultPopulationSize) {
  EXPECT_EQ(default_population_size(5), 8);
  EXPECT_EQ(default_population_size(30), 14);
  EXPECT_EQ(default_population_size(2), 6);
}

TEST(ModCma, RecombinationWeights) {
  const Vector eq = recombination_weights(WeightsOption::equal, 8);
  ASSERT_EQ(eq.size(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(eq(i), 0.25);
  const Vector half = recombination_weights(WeightsOption::exp_half, 8);
  const double expected[4] = {8.0 / 15, 4.0 / 15, 2.0 / 15, 1.0 / 15};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(half(i), expected[i], 1e-15);
  const Vector def = recombination_weights(WeightsOption::standard, 8);
  EXPECT_NEAR(def.sum(), 1.0, 1e-15);
  for (int i = 0; i < 4; ++i) EXPECT_GT(def(i), 0.0);
  for (int i = 1; i < 4; ++i) EXPECT_LT(def(i), def(i - 1));
  EXPECT_THROW(recombination_weights(WeightsOption::standard, 3), ConfigurationError);
}

TEST(ModCma, BoundCorrection) {
  const Bounds b;
  EXPECT_DOUBLE_EQ(correct_coordinate(BoundCorrection::toroidal, 5.5, b), -4.5);
  EXPECT_DOUBLE_EQ(correct_coordinate(BoundCorrection::toroidal, -5.5, b), 4.5);
  EXPECT_DOUBLE_EQ(correct_coordinate(BoundCorrection::saturate, 7.0, b), 5.0);
  EXPECT_DOUBLE_EQ(correct_coordinate(BoundCorrection::mirror, 5.5, b), 4.5);
  EXPECT_DOUBLE_EQ(correct_coordinate(BoundCorrection::off, 5.5, b), 5.5);
  EXPECT_DOUBLE_EQ(correct_coordinate(BoundCorrection::mirror, 1.0, b), 1.0);
}

TEST(ModCma, MirroredPairsSumToTwiceTheMean) {
  auto c = plain().with(ModuleAxis::mirrored, "mirrored");
  auto s = make_state(5, 8, c, Vector::Constant(5, 0.3), 1.5, 4);
  const Population p = ask(s, c);
  for (int k = 0; k < 8; k += 2) {
    EXPECT_LT((p.x.col(k) + p.x.col(k + 1) - 2.0 * s.mean).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((p.z.col(k) + p.z.col(k + 1)).cwiseAbs().maxCoeff(), 1e-15);
  }
  auto odd = make_state(5, 7, c, Vector::Zero(5), 1.0, 4);
  const Population po = ask(odd, c);
  EXPECT_EQ(po.pair.back(), -1);
}

TEST(ModCma, SaturateKeepsCandidatesInBox) {
  auto c = plain().with(ModuleAxis::bounds, "saturate");
  auto s = make_state(5, 8, c, Vector::Constant(5, 4.5), 10.0, 2);
  const Population p = ask(s, c);
  EXPECT_LE(p.x.maxCoeff(), 5.0);
  EXPECT_GE(p.x.minCoeff(), -5.0);
}

TEST(ModCma, CsaFixedPoint) {
  const auto k = StrategyConstants::compute(5, recombination_weights(WeightsOption::standard, 8));
  EXPECT_DOUBLE_EQ(csa_step_factor(k.chi_n, k), 1.0);
  EXPECT_GT(csa_step_factor(2 * k.chi_n, k), 1.0);
  EXPECT_LT(csa_step_factor(0.5 * k.chi_n, k), 1.0);
}

TEST(ModCma, PsrSignOnHandBuiltRanking) {
  const auto k = StrategyConstants::compute(5, recombination_weights(WeightsOption::standard, 8));
  Vector prev(4), cur(4);
  prev << 5, 6, 7, 8;
  cur << 1, 2, 3, 4;
  // Merged ranks: current holds 0..3, previous 4..7, z = (22 - 6) / 16 = 1.
  EXPECT_DOUBLE_EQ(psr_success(prev, cur), 1.0);
  EXPECT_GT(psr_step_factor(psr_success(prev, cur), k), 1.0);
  EXPECT_DOUBLE_EQ(psr_success(cur, prev), -1.0);
  EXPECT_LT(psr_step_factor(psr_success(cur, prev), k), 1.0);
}

TEST(ModCma, PsrIncreasesSigmaThroughTell) {
  auto c = plain().with(ModuleAxis::ssa, "psr");
  auto s = fresh(5, c);
  auto p = ask(s, c);
  Vector f = Vector::LinSpaced(8, 100, 107);
  tell(s, c, p, f);
  const double sigma_before = s.sigma;
  p = ask(s, c);
  tell(s, c, p, Vector::LinSpaced(8, 1, 8));
  EXPECT_GT(s.sigma, sigma_before);
}

TEST(ModCma, CovarianceStaysSymmetricAndFloored) {
  for (const auto& c : default_portfolio()) {
    auto s = fresh(5, c, 13);
    const auto inst = make_instance(10, 1, 5);
    for (int g = 0; g < 40; ++g) {
      auto p = ask(s, c);
      Vector f(s.lambda);
      for (int k = 0; k < s.lambda; ++k) f(k) = inst(p.x.col(k));
      tell(s, c, p, f);
      ASSERT_EQ(s.C, s.C.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(s.C);
      ASSERT_GE(es.eigenvalues().minCoeff(), 1e-20 * es.eigenvalues().maxCoeff() * (1 - 1e-9));
    }
  }
}

TEST(ModCma, TellRejectsBadInput) {
  auto c = plain();
  auto s = fresh(5, c);
  auto p = ask(s, c);
  EXPECT_THROW(tell(s, c, p, Vector::Zero(3)), ContractError);
  Vector f = Vector::Zero(8);
  f(2) = NAN;
  EXPECT_THROW(tell(s, c, p, f), NumericalError);
}

TEST(ModCma, ElitistBestParentNeverWorsens) {
  const auto inst = make_instance(15, 1, 5);
  for (const auto& base : {plain(), plain().with(ModuleAxis::ssa, "psr"),
                           plain().with(ModuleAxis::mirrored, "pairwise")}) {
    const auto c = base.with(ModuleAxis::elitist, "true");
    const std::vector<std::int64_t> budgets{3000};
    double previous = INFINITY;
    bool monotone = true;
    run_fixed_budget(inst, c, budgets, 21, [&](const CmaState& s) {
      const double b = s.parent_f.minCoeff();
      if (b > previous) monotone = false;
      previous = b;
    });
    EXPECT_TRUE(monotone) << c.to_string();
  }
}

TEST(ModCma, CheckpointsAreMonotoneAndDeterministic) {
  const auto inst = make_instance(7, 2, 5);
  const std::vector<std::int64_t> budgets{500, 1000, 2000};
  for (const auto& c : default_portfolio()) {
    const auto r = run_fixed_budget(inst, c, budgets, 5);
    ASSERT_EQ(r.checkpoints.size(), 3u);
    EXPECT_LE(r.at(2000), r.at(1000));
    EXPECT_LE(r.at(1000), r.at(500));
    EXPECT_EQ(r.evaluations, 2000);
    EXPECT_EQ(r, run_fixed_budget(inst, c, budgets, 5));
  }
}

TEST(ModCma, IpopDoublesPopulation) {
  const auto inst = make_instance(21, 1, 5);
  const auto c = plain().with(ModuleAxis::restart, "ipop");
  const std::vector<std::int64_t> budgets{20000};
  const auto r = run_fixed_budget(inst, c, budgets, 3);
  ASSERT_GE(r.restarts, 1);
  for (std::size_t k = 0; k < r.population_sizes.size(); ++k)
    EXPECT_EQ(r.population_sizes[k], 8 << k);
}

TEST(ModCma, BipopRestartsWithinBudgetLedger) {
  // On the sphere the local runs stall at precision 0 and restart repeatedly.
  const auto inst = make_instance(1, 1, 5);
  const auto c = plain().with(ModuleAxis::restart, "bipop");
  const std::vector<std::int64_t> budgets{40000};
  const auto r = run_fixed_budget(inst, c, budgets, 3);
  ASSERT_GE(r.restarts, 2);
  ASSERT_EQ(r.population_sizes.size(), static_cast<std::size_t>(r.restarts) + 1);
  EXPECT_EQ(r.population_sizes.front(), 8);
  for (const int l : r.population_sizes) {
    EXPECT_GE(l, 8);
    EXPECT_LE(l, 8 << r.restarts);
  }
  EXPECT_EQ(r.evaluations, 40000);
}

TEST(ModCma, SphereCompetenceMatchesTextbookOracle) {
  const auto inst = make_instance(1, 1, 5);
  std::vector<std::int64_t> budgets;
  for (std::int64_t b = 100; b <= 10000; b += 100) budgets.push_back(b);
  int solved = 0;
  std::vector<double> ours, reference;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = run_fixed_budget(inst, plain(), budgets, seed);
    if (r.at(10000) <= 1e-8) ++solved;
    for (const auto& [b, p] : r.checkpoints)
      if (p <= 1e-8) {
        ours.push_back(static_cast<double>(b));
        break;
      }
    const auto t = oracle::textbook_cma([&](const Eigen::VectorXd& x) { return inst(x); }, inst.f_opt(), 5,
                                        10000, seed);
    reference.push_back(static_cast<double>(oracle::evaluations_to_target(t, 1e-8)));
  }
  EXPECT_GE(solved, 8);
  ASSERT_EQ(ours.size(), 10u);
  std::sort(ours.begin(), ours.end());
  std::sort(reference.begin(), reference.end());
  ASSERT_GT(reference.front(), 0);
  const double ratio = (ours[4] + ours[5]) / (reference[4] + reference[5]);
  EXPECT_GT(ratio, 0.67);
  EXPECT_LT(ratio, 1.5);
}
