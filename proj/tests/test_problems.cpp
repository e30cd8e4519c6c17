#include <gtest/gtest.h>

#include "mcx/problems.hpp"

using namespace mcx;

TEST(Problems, RegistryHas24OrderedFunctions) {
  const auto reg = function_registry();
  ASSERT_EQ(reg.size(), 24u);
  for (int i = 0; i < 24; ++i) EXPECT_EQ(reg[static_cast<std::size_t>(i)].id, i + 1);
  EXPECT_THROW(function_info(0), RegistryError);
  EXPECT_THROW(function_info(25), RegistryError);
  EXPECT_THROW(make_instance(25, 1, 5), RegistryError);
}

TEST(Problems, SphereEvaluatesToOptimumAtShift) {
  const auto inst = make_instance(1, 1, 5);
  EXPECT_NEAR(evaluate(inst, inst.x_opt()), inst.f_opt(), 1e-12);
  const auto again = make_instance(1, 1, 5);
  EXPECT_EQ(inst.x_opt(), again.x_opt());
  EXPECT_EQ(inst.f_opt(), again.f_opt());
}

TEST(Problems, RosenbrockOptimumFromClosedForm) {
  const auto inst = make_instance(8, 2, 5);
  EXPECT_NEAR(evaluate(inst, inst.x_opt()), inst.f_opt(), 1e-9);
}

TEST(Problems, HandBuiltSphere) {
  InstanceTransform t;
  t.shift = Vector::Zero(4);
  const auto inst = make_instance(1, 4, t);
  EXPECT_DOUBLE_EQ(evaluate(inst, Vector::Zero(4)), 0.0);
  Vector e1 = Vector::Zero(4);
  e1(0) = 1.0;
  EXPECT_DOUBLE_EQ(evaluate(inst, e1), 1.0);
}

TEST(Problems, HandBuiltEllipsoidAtOnes) {
  // With zero shift and identity rotation the separable ellipsoid at x = 1
  // is sum_i 10^(6 i/(D-1)) T_osz(x_i - x_opt_i)^2; T_osz(1) = 1.
  const int d = 3;
  InstanceTransform t;
  t.shift = Vector::Zero(d);
  const auto inst = make_instance(2, d, t);
  double expected = 0.0;
  for (int i = 0; i < d; ++i) expected += std::pow(10.0, 6.0 * i / (d - 1));
  EXPECT_NEAR(evaluate(inst, Vector::Ones(d)), expected, 1e-9 * expected);
}

TEST(Problems, PrecisionClipsAtZero) {
  const auto inst = make_instance(1, 1, 2);
  EXPECT_EQ(precision(inst, inst.f_opt()), 0.0);
  EXPECT_NEAR(precision(inst, inst.f_opt() + 1e-3), 1e-3, 1e-12);
  EXPECT_EQ(precision(inst, inst.f_opt() - 1e-12), 0.0);
}

TEST(Problems, EvaluateRejectsBadInput) {
  const auto inst = make_instance(1, 1, 3);
  EXPECT_THROW(evaluate(inst, Vector::Zero(4)), ContractError);
  Vector bad = Vector::Zero(3);
  bad(1) = std::nan("");
  EXPECT_THROW(evaluate(inst, bad), ContractError);
}

TEST(Problems, EvaluationContextCounts) {
  const auto inst = make_instance(1, 1, 2);
  EvaluationContext ctx(inst);
  ctx(Vector::Zero(2));
  ctx(Vector::Ones(2));
  EXPECT_EQ(ctx.evaluations(), 2);
}

class AllFunctions : public ::testing::TestWithParam<int> {};

TEST_P(AllFunctions, OptimumAndLowerBound) {
  const int fid = GetParam();
  for (const int dim : {2, 5}) {
    const auto inst = make_instance(fid, 3, dim);
    const double at_opt = evaluate(inst, inst.x_opt());
    EXPECT_NEAR(at_opt, inst.f_opt(), 1e-6 * std::max(1.0, std::abs(inst.f_opt()))) << "f" << fid;
    Rng rng(hash_words({static_cast<std::uint64_t>(fid), static_cast<std::uint64_t>(dim)}));
    for (int k = 0; k < 100; ++k) {
      Vector x(dim);
      for (int i = 0; i < dim; ++i) x(i) = 10.0 * uniform_open01(rng) - 5.0;
      const double v = evaluate(inst, x);
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, inst.f_opt() - 1e-9) << "f" << fid;
    }
  }
}

TEST_P(AllFunctions, DeterministicConstruction) {
  const int fid = GetParam();
  const auto a = make_instance(fid, 2, 5);
  const auto b = make_instance(fid, 2, 5);
  Rng rng(77);
  for (int k = 0; k < 100; ++k) {
    Vector x(5);
    for (int i = 0; i < 5; ++i) x(i) = 10.0 * uniform_open01(rng) - 5.0;
    ASSERT_EQ(evaluate(a, x), evaluate(b, x));
  }
}

TEST_P(AllFunctions, RotationsAreOrthogonal) {
  const auto inst = make_instance(GetParam(), 1, 5);
  for (const auto& R : inst.rotations())
    EXPECT_LT((R * R.transpose() - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Bbob, AllFunctions, ::testing::Range(1, 25));

TEST(Problems, InstancesDiffer) {
  EXPECT_NE(make_instance(1, 1, 5).x_opt(), make_instance(1, 2, 5).x_opt());
}

TEST(Problems, OutOfBoxPointsAreFinite) {
  for (int fid = 1; fid <= 24; ++fid) {
    const auto inst = make_instance(fid, 1, 3);
    EXPECT_TRUE(std::isfinite(evaluate(inst, Vector::Constant(3, 12.0)))) << fid;
  }
}
