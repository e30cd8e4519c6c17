#include "mcx/attribution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace mcx {

namespace {

/// weights[a][b] = (a-1)! b! / (a+b)!: the Shapley weight of a feature that
/// follows the foreground in a leaf reached with `a` foreground and `b`
/// background splits. Its mirror (b-1)! a! / (a+b)! is weights[b][a].
class CoalitionWeights {
 public:
  explicit CoalitionWeights(int max_features) : size_(max_features + 1) {
    table_.assign(static_cast<std::size_t>(size_ * size_), 0.0);
    for (int a = 1; a < size_; ++a)
      for (int b = 0; b + a < size_ + 1 && b < size_; ++b) {
        // (a-1)! b! / (a+b)! = 1 / (a * C(a+b, a))
        double binom = 1.0;
        for (int k = 1; k <= a; ++k) binom = binom * (b + k) / k;
        table_[static_cast<std::size_t>(a * size_ + b)] = 1.0 / (a * binom);
      }
  }
  double operator()(int a, int b) const { return table_[static_cast<std::size_t>(a * size_ + b)]; }

 private:
  int size_;
  std::vector<double> table_;
};

// Feature state along a traversal: 0 unseen, 1 follows x, 2 follows z.
struct Walker {
  const DecisionTree& tree;
  const Eigen::Ref<const Vector>& x;
  const Vector* z = nullptr;
  const CoalitionWeights& weights;
  std::vector<signed char> state;
  std::vector<int> x_features;
  std::vector<int> z_features;
  Vector& phi;

  void visit(int k) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(k)];
    if (node.is_leaf()) {
      const int a = static_cast<int>(x_features.size());
      const int b = static_cast<int>(z_features.size());
      if (a > 0) {
        const double w = weights(a, b) * node.value;
        for (const int f : x_features) phi(f) += w;
      }
      if (b > 0) {
        const double w = weights(b, a) * node.value;
        for (const int f : z_features) phi(f) -= w;
      }
      return;
    }
    const int f = node.feature;
    const int x_child = x(f) <= node.threshold ? node.left : node.right;
    const int z_child = (*z)(f) <= node.threshold ? node.left : node.right;
    auto& s = state[static_cast<std::size_t>(f)];
    if (x_child == z_child) return visit(x_child);
    if (s == 1) return visit(x_child);
    if (s == 2) return visit(z_child);
    s = 1;
    x_features.push_back(f);
    visit(x_child);
    x_features.pop_back();
    s = 2;
    z_features.push_back(f);
    visit(z_child);
    z_features.pop_back();
    s = 0;
  }
};

int feature_span(const DecisionTree& tree) {
  std::set<int> used;
  for (const auto& n : tree.nodes)
    if (!n.is_leaf()) used.insert(n.feature);
  return static_cast<int>(used.size());
}

}  // namespace

Attribution tree_shap(const DecisionTree& tree, const Eigen::Ref<const Vector>& x,
                      const Matrix& background) {
  if (background.rows() == 0) throw ContractError("tree_shap: empty background");
  if (background.cols() != x.size()) throw ContractError("tree_shap: background width differs from x");
  if (tree.nodes.empty()) throw ContractError("tree_shap: empty tree");
  const CoalitionWeights weights(std::max(1, feature_span(tree)));
  Attribution out{Vector::Zero(x.size()), 0.0};
  Walker walker{tree, x, nullptr, weights, std::vector<signed char>(static_cast<std::size_t>(x.size()), 0),
                {}, {}, out.phi};
  for (Eigen::Index r = 0; r < background.rows(); ++r) {
    const Vector zr = background.row(r).transpose();
    walker.z = &zr;
    walker.visit(0);
    out.base += tree.predict(zr);
  }
  const double n = static_cast<double>(background.rows());
  out.phi /= n;
  out.base /= n;
  return out;
}

Attribution forest_shap(const RandomForestModel& model, const Eigen::Ref<const Vector>& x,
                        const Matrix& background) {
  if (model.trees.empty()) throw ContractError("forest_shap: model has no trees");
  if (model.task != TaskKind::regression)
    throw CapabilityError("forest_shap: only regression forests are supported");
  Attribution out{Vector::Zero(x.size()), 0.0};
  for (const auto& tree : model.trees) {
    const Attribution a = tree_shap(tree, x, background);
    out.phi += a.phi;
    out.base += a.base;
  }
  const double n = static_cast<double>(model.trees.size());
  out.phi /= n;
  out.base /= n;
  return out;
}

Vector aggregate_instance(const std::vector<Vector>& fold_attributions) {
  if (fold_attributions.size() != 4)
    throw ContractError("aggregate_instance: expected 4 fold attributions, got " +
                        std::to_string(fold_attributions.size()));
  Vector sum = Vector::Zero(fold_attributions.front().size());
  for (const auto& v : fold_attributions) {
    if (v.size() != sum.size()) throw ContractError("aggregate_instance: length mismatch");
    sum += v;
  }
  return sum / 4.0;
}

std::string_view to_string(RepresentationMode m) {
  return m == RepresentationMode::signed_mean ? "signed_mean" : "mean_abs";
}

RepresentationMode parse_representation_mode(std::string_view text) {
  if (text == "signed_mean" || text == "signed") return RepresentationMode::signed_mean;
  if (text == "mean_abs" || text == "abs") return RepresentationMode::mean_abs;
  throw ConfigurationError("unknown representation mode '" + std::string(text) +
                           "'; expected signed or abs");
}

Vector build_representation(const std::vector<InstanceAttribution>& instances, RepresentationMode mode,
                            const std::vector<std::pair<int, int>>& expected) {
  if (instances.empty()) throw ContractError("build_representation: no instances");
  if (!expected.empty()) {
    std::set<std::pair<int, int>> have;
    for (const auto& i : instances) have.emplace(i.function_id, i.instance_id);
    std::string missing;
    for (const auto& key : expected)
      if (!have.count(key))
        missing += " f" + std::to_string(key.first) + "/i" + std::to_string(key.second);
    if (!missing.empty()) throw ContractError("build_representation: missing instances:" + missing);
  }
  Vector sum = Vector::Zero(instances.front().phi.size());
  for (const auto& i : instances) {
    if (i.phi.size() != sum.size()) throw ContractError("build_representation: length mismatch");
    sum += mode == RepresentationMode::mean_abs ? Vector(i.phi.cwiseAbs()) : i.phi;
  }
  return sum / static_cast<double>(instances.size());
}

}  // namespace mcx
