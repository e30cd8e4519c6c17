#pragma once

// Exhaustive interventional Shapley values: enumerate every coalition S of
// the used features, average the tree over the background with features in
// S taken from x, and weight marginal contributions by |S|!(n-|S|-1)!/n!.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "mcx/forest.hpp"

namespace oracle {

inline double tree_value(const mcx::DecisionTree& tree, const Eigen::VectorXd& v) { return tree.predict(v); }

inline Eigen::VectorXd brute_force_shapley(const mcx::DecisionTree& tree, const Eigen::VectorXd& x,
                                           const Eigen::MatrixXd& background) {
  const int n = static_cast<int>(x.size());
  const unsigned full = 1u << n;
  std::vector<double> value(full, 0.0);
  for (unsigned S = 0; S < full; ++S) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < background.rows(); ++r) {
      Eigen::VectorXd v = background.row(r).transpose();
      for (int j = 0; j < n; ++j)
        if (S & (1u << j)) v(j) = x(j);
      acc += tree_value(tree, v);
    }
    value[S] = acc / static_cast<double>(background.rows());
  }
  std::vector<double> fact(n + 1, 1.0);
  for (int k = 1; k <= n; ++k) fact[k] = fact[k - 1] * k;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (unsigned S = 0; S < full; ++S) {
      if (S & (1u << i)) continue;
      const int s = __builtin_popcount(S);
      const double weight = fact[s] * fact[n - s - 1] / fact[n];
      phi(i) += weight * (value[S | (1u << i)] - value[S]);
    }
  return phi;
}

}  // namespace oracle
