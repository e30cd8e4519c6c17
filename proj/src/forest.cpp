#include "mcx/forest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

namespace mcx {

namespace {

constexpr std::array<std::string_view, 4> kCriterionNames{"squared_error", "absolute_error", "poisson",
                                                          "gini"};
constexpr std::array<std::string_view, 3> kMaxFeatureNames{"auto", "sqrt", "log2"};
constexpr std::array<std::string_view, 2> kTaskNames{"regression", "classification"};
constexpr std::array<std::string_view, 2> kTransformNames{"log_ratio", "raw"};

template <typename Enum, std::size_t N>
Enum parse_name(std::string_view text, const std::array<std::string_view, N>& names,
                std::string_view what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == text) return static_cast<Enum>(i);
  std::string msg = "invalid " + std::string(what) + " '" + std::string(text) + "'; expected one of";
  for (const auto n : names) msg += " " + std::string(n);
  throw ConfigurationError(msg);
}

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw ContractError("model file: bad number '" + token + "'");
  return v;
}

/// Running sum of |y - median| over an insert-only multiset.
class MedianDeviation {
 public:
  void insert(double v) {
    if (low_.empty() || v <= low_.top()) {
      low_.push(v);
      low_sum_ += v;
    } else {
      high_.push(v);
      high_sum_ += v;
    }
    if (low_.size() > high_.size() + 1) {
      const double t = low_.top();
      low_.pop();
      low_sum_ -= t;
      high_.push(t);
      high_sum_ += t;
    } else if (high_.size() > low_.size()) {
      const double t = high_.top();
      high_.pop();
      high_sum_ -= t;
      low_.push(t);
      low_sum_ += t;
    }
  }

  double deviation() const {
    if (low_.empty()) return 0.0;
    const double med = low_.top();
    return (med * static_cast<double>(low_.size()) - low_sum_) +
           (high_sum_ - med * static_cast<double>(high_.size()));
  }

 private:
  std::priority_queue<double> low_;
  std::priority_queue<double, std::vector<double>, std::greater<>> high_;
  double low_sum_ = 0.0;
  double high_sum_ = 0.0;
};

double median_value(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double midpoint(double lower, double upper) {
  const double t = lower + 0.5 * (upper - lower);
  return (t >= upper || t < lower) ? lower : t;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double cost = std::numeric_limits<double>::infinity();
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, const Vector& y, const HyperParams& params, TaskKind task,
              std::uint64_t seed)
      : X_(X), y_(y), params_(params), task_(task), rng_(seed) {
    if (task == TaskKind::classification) {
      std::set<double> labels(y.data(), y.data() + y.size());
      classes_.assign(labels.begin(), labels.end());
    }
    per_split_ = features_per_split(params.max_features, task, static_cast<int>(X.cols()));
  }

  DecisionTree build(std::vector<int> rows) {
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int class_of(double label) const {
    return static_cast<int>(std::lower_bound(classes_.begin(), classes_.end(), label) - classes_.begin());
  }

  double leaf_value(const std::vector<int>& rows) const {
    std::vector<double> ys;
    ys.reserve(rows.size());
    for (const int r : rows) ys.push_back(y_(r));
    switch (params_.criterion) {
      case Criterion::absolute_error:
        return median_value(ys);
      case Criterion::gini: {
        std::vector<int> counts(classes_.size(), 0);
        for (const double v : ys) ++counts[static_cast<std::size_t>(class_of(v))];
        const auto best = std::max_element(counts.begin(), counts.end()) - counts.begin();
        return classes_[static_cast<std::size_t>(best)];
      }
      default:
        return std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    }
  }

  bool is_pure(const std::vector<int>& rows) const {
    const double first = y_(rows.front());
    bool same = true;
    double sum = 0.0;
    for (const int r : rows) {
      same = same && y_(r) == first;
      sum += y_(r);
    }
    if (same) return true;
    return params_.criterion == Criterion::poisson && sum <= 0.0;
  }

  std::vector<int> candidate_features() {
    const int p = static_cast<int>(X_.cols());
    std::vector<int> all(static_cast<std::size_t>(p));
    std::iota(all.begin(), all.end(), 0);
    if (per_split_ >= p) return all;
    for (int i = 0; i < per_split_; ++i) {
      const auto j = static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(uniform_index(rng_, static_cast<std::uint64_t>(p - i)));
      std::swap(all[static_cast<std::size_t>(i)], all[j]);
    }
    all.resize(static_cast<std::size_t>(per_split_));
    std::sort(all.begin(), all.end());
    return all;
  }

  /// Children cost for every boundary position in `sorted` (rows ordered by
  /// the feature). cost[i] is the cost of putting the first i rows left.
  std::vector<double> boundary_costs(const std::vector<int>& sorted) const {
    const std::size_t n = sorted.size();
    std::vector<double> cost(n, std::numeric_limits<double>::infinity());
    switch (params_.criterion) {
      case Criterion::squared_error: {
        double total_s = 0.0, total_q = 0.0;
        for (const int r : sorted) {
          total_s += y_(r);
          total_q += y_(r) * y_(r);
        }
        double s = 0.0, q = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
          const double v = y_(sorted[i - 1]);
          s += v;
          q += v * v;
          const double nl = static_cast<double>(i);
          const double nr = static_cast<double>(n - i);
          const double rs = total_s - s;
          const double rq = total_q - q;
          cost[i] = (q - s * s / nl) + (rq - rs * rs / nr);
        }
        break;
      }
      case Criterion::absolute_error: {
        std::vector<double> left(n, 0.0), right(n, 0.0);
        MedianDeviation acc;
        for (std::size_t i = 1; i < n; ++i) {
          acc.insert(y_(sorted[i - 1]));
          left[i] = acc.deviation();
        }
        MedianDeviation racc;
        for (std::size_t i = n - 1; i >= 1; --i) {
          racc.insert(y_(sorted[i]));
          right[i] = racc.deviation();
        }
        for (std::size_t i = 1; i < n; ++i) cost[i] = left[i] + right[i];
        break;
      }
      case Criterion::poisson: {
        double total = 0.0;
        for (const int r : sorted) total += y_(r);
        double s = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
          s += y_(sorted[i - 1]);
          const double rs = total - s;
          if (s <= 0.0 || rs <= 0.0) continue;
          const double nl = static_cast<double>(i);
          const double nr = static_cast<double>(n - i);
          cost[i] = -s * std::log(s / nl) - rs * std::log(rs / nr);
        }
        break;
      }
      case Criterion::gini: {
        const std::size_t k = classes_.size();
        std::vector<double> total(k, 0.0), left(k, 0.0);
        for (const int r : sorted) total[static_cast<std::size_t>(class_of(y_(r)))] += 1.0;
        for (std::size_t i = 1; i < n; ++i) {
          left[static_cast<std::size_t>(class_of(y_(sorted[i - 1])))] += 1.0;
          const double nl = static_cast<double>(i);
          const double nr = static_cast<double>(n - i);
          double sl = 0.0, sr = 0.0;
          for (std::size_t c = 0; c < k; ++c) {
            sl += left[c] * left[c];
            sr += (total[c] - left[c]) * (total[c] - left[c]);
          }
          cost[i] = (nl - sl / nl) + (nr - sr / nr);
        }
        break;
      }
    }
    return cost;
  }

  SplitChoice best_split(const std::vector<int>& rows) {
    SplitChoice best;
    std::vector<int> sorted = rows;
    for (const int f : candidate_features()) {
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](int a, int b) { return X_(a, f) < X_(b, f); });
      if (X_(sorted.front(), f) == X_(sorted.back(), f)) continue;
      const std::vector<double> cost = boundary_costs(sorted);
      for (std::size_t i = 1; i < sorted.size(); ++i) {
        const double lo = X_(sorted[i - 1], f);
        const double hi = X_(sorted[i], f);
        if (!(lo < hi)) continue;
        if (cost[i] < best.cost) {
          best.cost = cost[i];
          best.feature = f;
          best.threshold = midpoint(lo, hi);
        }
      }
    }
    return best;
  }

  int grow(const std::vector<int>& rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    const bool depth_reached = params_.max_depth != kUnboundedDepth && depth >= params_.max_depth;
    const bool too_small = static_cast<int>(rows.size()) < std::max(2, params_.min_samples_split);
    SplitChoice split;
    if (!depth_reached && !too_small && !is_pure(rows)) split = best_split(rows);
    if (split.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(index)].value = leaf_value(rows);
      return index;
    }
    std::vector<int> left, right;
    for (const int r : rows) (X_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    node.value = leaf_value(rows);
    return index;
  }

  const Matrix& X_;
  const Vector& y_;
  const HyperParams& params_;
  TaskKind task_;
  Rng rng_;
  std::vector<double> classes_;
  int per_split_ = 1;
  DecisionTree tree_;
};

void validate_training(const Matrix& X, const Vector& y, const HyperParams& params, TaskKind task) {
  if (X.rows() == 0 || X.cols() == 0) throw ContractError("fit: empty data");
  if (X.rows() != y.size()) throw ContractError("fit: X and y disagree in length");
  if (!X.allFinite() || !y.allFinite()) throw ContractError("fit: non-finite training data");
  if ((task == TaskKind::classification) != (params.criterion == Criterion::gini))
    throw ConfigurationError("fit: gini is the only classification criterion");
  if (params.criterion == Criterion::poisson)
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y(i) < 0.0)
        throw ContractError("fit: poisson criterion needs non-negative targets; row " +
                            std::to_string(i) + " has " + format_double(y(i)));
  if (params.n_estimators < 1) throw ConfigurationError("fit: n_estimators must be >= 1");
  if (params.min_samples_split < 2) throw ConfigurationError("fit: min_samples_split must be >= 2");
}

}  // namespace

std::string_view to_string(Criterion c) { return kCriterionNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(MaxFeatures m) { return kMaxFeatureNames[static_cast<std::size_t>(m)]; }
std::string_view to_string(TaskKind t) { return kTaskNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(TargetTransform t) { return kTransformNames[static_cast<std::size_t>(t)]; }

Criterion parse_criterion(std::string_view text) {
  return parse_name<Criterion>(text, kCriterionNames, "criterion");
}
MaxFeatures parse_max_features(std::string_view text) {
  return parse_name<MaxFeatures>(text, kMaxFeatureNames, "max_features");
}
TaskKind parse_task_kind(std::string_view text) {
  return parse_name<TaskKind>(text, kTaskNames, "task");
}
TargetTransform parse_target_transform(std::string_view text) {
  return parse_name<TargetTransform>(text, kTransformNames, "target transform");
}

std::string HyperParams::to_string() const {
  std::ostringstream s;
  s << "n_estimators=" << n_estimators << ";max_features=" << mcx::to_string(max_features)
    << ";max_depth=" << (max_depth == kUnboundedDepth ? std::string("none") : std::to_string(max_depth))
    << ";min_samples_split=" << min_samples_split << ";criterion=" << mcx::to_string(criterion)
    << ";bootstrap=" << (bootstrap ? "true" : "false");
  return s.str();
}

HyperParams HyperParams::parse(std::string_view text) {
  HyperParams p;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = std::min(text.find(';', pos), text.size());
    const auto item = text.substr(pos, end - pos);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigurationError("hyperparameters: bad item");
    const auto key = item.substr(0, eq);
    const std::string value(item.substr(eq + 1));
    if (key == "n_estimators") p.n_estimators = std::stoi(value);
    else if (key == "max_features") p.max_features = parse_max_features(value);
    else if (key == "max_depth") p.max_depth = value == "none" ? kUnboundedDepth : std::stoi(value);
    else if (key == "min_samples_split") p.min_samples_split = std::stoi(value);
    else if (key == "criterion") p.criterion = parse_criterion(value);
    else if (key == "bootstrap") p.bootstrap = value == "true";
    else throw ConfigurationError("hyperparameters: unknown key '" + std::string(key) + "'");
    pos = end + 1;
  }
  return p;
}

int features_per_split(MaxFeatures m, TaskKind task, int p) {
  int k = p;
  switch (m) {
    case MaxFeatures::automatic:
      k = task == TaskKind::regression ? p : static_cast<int>(std::floor(std::sqrt(p)));
      break;
    case MaxFeatures::sqrt: k = static_cast<int>(std::floor(std::sqrt(p))); break;
    case MaxFeatures::log2: k = static_cast<int>(std::floor(std::log2(p))); break;
  }
  return std::clamp(k, 1, p);
}

namespace {

std::vector<HyperParams> grid_over(const std::vector<int>& estimators, const std::vector<int>& splits) {
  std::vector<HyperParams> grid;
  for (const int n : estimators)
    for (const auto mf : {MaxFeatures::automatic, MaxFeatures::sqrt, MaxFeatures::log2})
      for (const int depth : {4, 8, 15, kUnboundedDepth})
        for (const int mss : splits)
          for (const auto c : {Criterion::squared_error, Criterion::absolute_error, Criterion::poisson}) {
            HyperParams p;
            p.n_estimators = n;
            p.max_features = mf;
            p.max_depth = depth;
            p.min_samples_split = mss;
            p.criterion = c;
            grid.push_back(p);
          }
  return grid;
}

}  // namespace

std::vector<HyperParams> full_grid() { return grid_over({100, 500, 1000}, {2, 5, 10}); }

std::vector<HyperParams> restricted_grid() { return grid_over({100}, {2}); }

int DecisionTree::depth() const {
  std::function<int(int)> walk = [&](int k) -> int {
    const TreeNode& n = nodes[static_cast<std::size_t>(k)];
    return n.is_leaf() ? 0 : 1 + std::max(walk(n.left), walk(n.right));
  };
  return nodes.empty() ? 0 : walk(0);
}

double node_impurity(Criterion c, const std::vector<double>& y) {
  if (y.empty()) return 0.0;
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double acc = 0.0;
  switch (c) {
    case Criterion::squared_error:
      for (const double v : y) acc += (v - mean) * (v - mean);
      return acc / n;
    case Criterion::absolute_error: {
      const double med = median_value(y);
      for (const double v : y) acc += std::abs(v - med);
      return acc / n;
    }
    case Criterion::poisson:
      if (mean <= 0.0) return std::numeric_limits<double>::infinity();
      for (const double v : y) acc += (v > 0.0 ? v * std::log(v / mean) : 0.0) - (v - mean);
      return acc / n;
    case Criterion::gini: {
      std::map<double, double> counts;
      for (const double v : y) counts[v] += 1.0;
      double s = 0.0;
      for (const auto& [label, count] : counts) s += (count / n) * (count / n);
      return 1.0 - s;
    }
  }
  return 0.0;
}

DecisionTree fit_tree(const Matrix& X, const Vector& y, const HyperParams& params, TaskKind task,
                      std::uint64_t seed) {
  validate_training(X, y, params, task);
  std::vector<int> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return TreeBuilder(X, y, params, task, seed).build(std::move(rows));
}

double RandomForestModel::predict(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != n_features) throw ContractError("predict: wrong number of features");
  if (task == TaskKind::regression) {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
  }
  std::map<double, int> votes;
  for (const auto& t : trees) ++votes[t.predict(x)];
  double best = votes.begin()->first;
  int count = -1;
  for (const auto& [label, v] : votes)
    if (v > count) {
      best = label;
      count = v;
    }
  return best;
}

Vector RandomForestModel::predict_rows(const Matrix& X) const {
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict(X.row(i).transpose());
  return out;
}

RandomForestModel fit_forest(const Matrix& X, const Vector& y, const HyperParams& params,
                             TaskKind task, std::uint64_t seed, int jobs) {
  validate_training(X, y, params, task);
  RandomForestModel model;
  model.task = task;
  model.params = params;
  model.seed = seed;
  model.n_features = static_cast<int>(X.cols());
  model.baseline = y.mean();
  const auto count = static_cast<std::size_t>(params.n_estimators);
  model.trees.resize(count);
  model.tree_seeds.resize(count);
  for (std::size_t t = 0; t < count; ++t) model.tree_seeds[t] = hash_words({seed, t});

  const auto n = static_cast<std::uint64_t>(X.rows());
  parallel_for(count, jobs, [&](std::size_t t) {
    Rng rng(model.tree_seeds[t]);
    std::vector<int> rows(static_cast<std::size_t>(n));
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<int>(uniform_index(rng, n));
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    model.trees[t] = TreeBuilder(X, y, params, task, rng()).build(std::move(rows));
  });
  return model;
}

void save_model(std::ostream& out, const RandomForestModel& m) {
  out << "mcx-forest 1\n";
  out << "task " << to_string(m.task) << '\n';
  out << "params " << m.params.to_string() << '\n';
  out << "seed " << m.seed << '\n';
  out << "target_transform " << m.target_transform << '\n';
  out << "n_features " << m.n_features << '\n';
  out << "baseline " << hexfloat(m.baseline) << '\n';
  out << "trees " << m.trees.size() << '\n';
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    const auto& nodes = m.trees[t].nodes;
    out << "tree " << m.tree_seeds[t] << ' ' << nodes.size() << '\n';
    for (const auto& n : nodes)
      out << n.feature << ' ' << hexfloat(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
          << hexfloat(n.value) << '\n';
  }
}

RandomForestModel load_model(std::istream& in) {
  auto expect = [&](const std::string& key) {
    std::string token;
    if (!(in >> token) || token != key) throw ContractError("model file: expected '" + key + "'");
  };
  auto read = [&]() {
    std::string token;
    if (!(in >> token)) throw ContractError("model file: truncated");
    return token;
  };
  RandomForestModel m;
  expect("mcx-forest");
  if (read() != "1") throw ContractError("model file: unsupported version");
  expect("task");
  m.task = parse_task_kind(read());
  expect("params");
  m.params = HyperParams::parse(read());
  expect("seed");
  m.seed = std::stoull(read());
  expect("target_transform");
  m.target_transform = read();
  expect("n_features");
  m.n_features = std::stoi(read());
  expect("baseline");
  m.baseline = parse_double(read());
  expect("trees");
  const auto count = std::stoull(read());
  for (std::size_t t = 0; t < count; ++t) {
    expect("tree");
    m.tree_seeds.push_back(std::stoull(read()));
    const auto nodes = std::stoull(read());
    DecisionTree tree;
    tree.nodes.resize(nodes);
    for (auto& n : tree.nodes) {
      n.feature = std::stoi(read());
      n.threshold = parse_double(read());
      n.left = std::stoi(read());
      n.right = std::stoi(read());
      n.value = parse_double(read());
    }
    m.trees.push_back(std::move(tree));
  }
  return m;
}

void save_model(const std::string& path, const RandomForestModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file " + path);
  save_model(out, model);
}

RandomForestModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("missing model file " + path);
  return load_model(in);
}

double transform_target(double precision, TargetTransform t) {
  if (t == TargetTransform::raw) return precision;
  return std::log10((precision + kTargetEpsilon) / kTargetEpsilon);
}

double r2_score(const Vector& y_true, const Vector& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.size() < 2)
    throw ContractError("r2_score: need two equal-length vectors of length >= 2");
  const double ss_tot = (y_true.array() - y_true.mean()).square().sum();
  if (!(ss_tot > 0.0)) throw DomainError("r2_score: y_true has zero variance");
  return 1.0 - (y_true - y_pred).squaredNorm() / ss_tot;
}

ClassificationMetrics classification_metrics(const std::vector<int>& y_true,
                                             const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty())
    throw ContractError("classification_metrics: need equal non-empty label vectors");
  std::set<int> labels(y_true.begin(), y_true.end());
  labels.insert(y_pred.begin(), y_pred.end());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) correct += y_true[i] == y_pred[i];
  double f1_sum = 0.0;
  for (const int c : labels) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      tp += y_true[i] == c && y_pred[i] == c;
      fp += y_true[i] != c && y_pred[i] == c;
      fn += y_true[i] == c && y_pred[i] != c;
    }
    f1_sum += 2 * tp + fp + fn > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
  }
  return {static_cast<double>(correct) / static_cast<double>(y_true.size()),
          f1_sum / static_cast<double>(labels.size())};
}

std::vector<int> GroupedDataset::group_ids() const {
  std::set<int> ids(groups.begin(), groups.end());
  return {ids.begin(), ids.end()};
}

std::uint64_t fold_seed(std::uint64_t seed, int group) {
  return hash_words({seed, static_cast<std::uint64_t>(group), 0x6c6f676fULL});
}

namespace {

struct FoldData {
  Matrix X_train;
  Vector y_train;
  Matrix X_test;
  Vector y_test;
};

FoldData split_fold(const GroupedDataset& data, int group) {
  std::vector<Eigen::Index> train, test;
  for (std::size_t i = 0; i < data.groups.size(); ++i)
    (data.groups[i] == group ? test : train).push_back(static_cast<Eigen::Index>(i));
  FoldData f{data.X(train, Eigen::all), data.y(train), data.X(test, Eigen::all), data.y(test)};
  return f;
}

}  // namespace

GridSearchResult logo_grid_search(const GroupedDataset& data, const std::vector<HyperParams>& grid,
                                  std::uint64_t seed, int jobs) {
  if (data.X.rows() != data.y.size() || data.groups.size() != static_cast<std::size_t>(data.y.size()))
    throw ContractError("logo_grid_search: inconsistent dataset");
  if (grid.empty()) throw ContractError("logo_grid_search: empty grid");
  GridSearchResult result;
  result.grid = grid;
  result.fold_groups = data.group_ids();
  if (result.fold_groups.size() < 2) throw ContractError("logo_grid_search: need at least 2 groups");

  std::vector<FoldData> folds;
  for (const int g : result.fold_groups) folds.push_back(split_fold(data, g));

  const std::size_t n_folds = folds.size();
  std::vector<double> scores(grid.size() * n_folds, std::numeric_limits<double>::quiet_NaN());
  parallel_for(scores.size(), jobs, [&](std::size_t task) {
    const std::size_t c = task / n_folds;
    const std::size_t f = task % n_folds;
    const auto model = fit_forest(folds[f].X_train, folds[f].y_train, grid[c], TaskKind::regression,
                                  fold_seed(seed, result.fold_groups[f]));
    try {
      scores[task] = r2_score(folds[f].y_test, model.predict_rows(folds[f].X_test));
    } catch (const DomainError&) {
      // Unscoreable fold; the candidate stays invalid.
    }
  });

  result.mean_r2.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  result.valid.assign(grid.size(), false);
  bool any = false;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    double sum = 0.0;
    bool ok = true;
    for (std::size_t f = 0; f < n_folds; ++f) {
      const double s = scores[c * n_folds + f];
      ok = ok && std::isfinite(s);
      sum += s;
    }
    if (!ok) continue;
    result.valid[c] = true;
    result.mean_r2[c] = sum / static_cast<double>(n_folds);
    if (!any || result.mean_r2[c] > result.mean_r2[result.best]) {
      result.best = c;
      any = true;
    }
  }
  if (!any) throw NumericalError("logo_grid_search: every candidate is invalid");

  result.fold_models.resize(n_folds);
  parallel_for(n_folds, jobs, [&](std::size_t f) {
    result.fold_models[f] = fit_forest(folds[f].X_train, folds[f].y_train, grid[result.best],
                                       TaskKind::regression, fold_seed(seed, result.fold_groups[f]));
  });
  return result;
}

}  // namespace mcx
