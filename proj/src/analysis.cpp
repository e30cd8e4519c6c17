#include "mcx/analysis.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

namespace mcx {

namespace {

int value_rank(ModuleAxis axis, const std::string& value) {
  const auto values = axis_values(axis);
  return static_cast<int>(std::find(values.begin(), values.end(), value) - values.begin());
}

using RepKey = std::tuple<std::string, int, std::int64_t>;

std::map<RepKey, const Representation*> index_representations(const std::vector<Representation>& reps) {
  std::map<RepKey, const Representation*> out;
  for (const auto& r : reps) out[{r.config_id, r.dimension, r.budget}] = &r;
  return out;
}

const Representation& lookup(const std::map<RepKey, const Representation*>& index, const std::string& id,
                             int dimension, std::int64_t budget) {
  const auto it = index.find({id, dimension, budget});
  if (it == index.end())
    throw MissingInputError("missing representation for " + id + " (dimension " + std::to_string(dimension) +
                            ", budget " + std::to_string(budget) + ")");
  return *it->second;
}

}  // namespace

std::vector<ConfigPair> find_pairs(const std::vector<ModuleConfiguration>& configs, ModuleAxis axis) {
  std::vector<std::pair<std::string, ModuleConfiguration>> sorted;
  for (const auto& c : configs) sorted.emplace_back(c.to_string(), c);
  std::sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].first == sorted[i - 1].first)
      throw ConfigurationError("find_pairs: duplicate configuration " + sorted[i].first);

  std::vector<ConfigPair> pairs;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const auto& a = sorted[i].second;
      const auto& b = sorted[j].second;
      bool differs_only_on_axis = a.value(axis) != b.value(axis);
      for (const auto other : kAllAxes)
        if (other != axis && a.value(other) != b.value(other)) differs_only_on_axis = false;
      if (differs_only_on_axis)
        pairs.push_back(ConfigPair{axis, a, b, static_cast<int>(pairs.size())});
    }
  return pairs;
}

std::vector<ConfigPair> find_pairs(const std::vector<ModuleConfiguration>& configs,
                                   std::string_view axis) {
  return find_pairs(configs, parse_axis(axis));
}

std::vector<int> top_k_features(const Vector& values, int k) {
  std::vector<int> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values(a) > values(b); });
  order.resize(static_cast<std::size_t>(std::clamp<Eigen::Index>(k, 0, values.size())));
  return order;
}

std::vector<FrequencyCell> topk_frequency(const std::vector<Representation>& representations,
                                          const std::vector<ConfigPair>& pairs, int k) {
  if (k < 1) throw ContractError("topk_frequency: k must be >= 1");
  if (pairs.empty()) return {};
  const ModuleAxis axis = pairs.front().axis;
  std::set<std::string> members;
  for (const auto& p : pairs) {
    if (p.axis != axis) throw ContractError("topk_frequency: pairs mix several axes");
    members.insert(p.a.to_string());
    members.insert(p.b.to_string());
  }
  std::set<std::pair<int, std::int64_t>> cells;
  Eigen::Index width = -1;
  for (const auto& r : representations)
    if (members.count(r.config_id)) {
      cells.emplace(r.dimension, r.budget);
      if (width >= 0 && r.values.size() != width)
        throw ContractError("topk_frequency: representations differ in length");
      width = r.values.size();
    }
  const auto index = index_representations(representations);

  std::vector<FrequencyCell> out;
  for (const auto& [dimension, budget] : cells) {
    std::map<int, FrequencyCell> by_value;
    auto count_member = [&](const ModuleConfiguration& c) {
      const Representation& rep = lookup(index, c.to_string(), dimension, budget);
      const std::string value = c.value(axis);
      auto [it, inserted] = by_value.try_emplace(value_rank(axis, value));
      FrequencyCell& cell = it->second;
      if (inserted) {
        cell = FrequencyCell{axis, dimension, budget, value, k,
                             std::vector<int>(static_cast<std::size_t>(width), 0)};
      }
      for (const int f : top_k_features(rep.values, k)) ++cell.counts[static_cast<std::size_t>(f)];
    };
    for (const auto& p : pairs) {
      count_member(p.a);
      count_member(p.b);
    }
    for (auto& [rank, cell] : by_value) out.push_back(std::move(cell));
  }
  return out;
}

ClassificationData classification_dataset(const std::vector<Representation>& representations,
                                          const std::vector<ConfigPair>& pairs, int dimension) {
  std::set<std::int64_t> budgets;
  Eigen::Index width = -1;
  for (const auto& r : representations)
    if (r.dimension == dimension) {
      budgets.insert(r.budget);
      width = r.values.size();
    }
  const auto index = index_representations(representations);
  ClassificationData data;
  std::vector<Vector> rows;
  int unit = 0;
  for (const auto& p : pairs) {
    const int ra = value_rank(p.axis, p.a.value(p.axis));
    const int rb = value_rank(p.axis, p.b.value(p.axis));
    for (const auto budget : budgets) {
      for (const auto* member : {&p.a, &p.b}) {
        const std::string id = member->to_string();
        rows.push_back(lookup(index, id, dimension, budget).values);
        const int mine = member == &p.a ? ra : rb;
        const int other = member == &p.a ? rb : ra;
        data.labels.push_back(mine > other ? 1 : 0);
        data.config_ids.push_back(id);
        data.budgets.push_back(budget);
        data.units.push_back(unit);
      }
      ++unit;
    }
  }
  data.X.resize(static_cast<Eigen::Index>(rows.size()), std::max<Eigen::Index>(width, 0));
  for (std::size_t i = 0; i < rows.size(); ++i) data.X.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return data;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ContractError("stratified_folds: need at least 2 folds");
  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
  std::vector<int> fold(labels.size(), 0);
  std::size_t counter = 0;
  for (auto& [label, rows] : by_class) {
    Rng rng(hash_words({seed, static_cast<std::uint64_t>(label), 0x666f6c64ULL}));
    shuffle_in_place(rows, rng);
    for (const int r : rows) fold[static_cast<std::size_t>(r)] = static_cast<int>(counter++ % folds);
  }
  return fold;
}

std::vector<int> unit_folds(const std::vector<int>& units, int folds, std::uint64_t seed) {
  if (folds < 2) throw ContractError("unit_folds: need at least 2 folds");
  std::vector<int> distinct(units.begin(), units.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  Rng rng(hash_words({seed, 0x756e6974ULL}));
  shuffle_in_place(distinct, rng);
  std::map<int, int> fold_of_unit;
  for (std::size_t k = 0; k < distinct.size(); ++k) fold_of_unit[distinct[k]] = static_cast<int>(k % folds);
  std::vector<int> fold(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) fold[i] = fold_of_unit.at(units[i]);
  return fold;
}

HyperParams default_classifier_params() {
  HyperParams p;
  p.n_estimators = 100;
  p.criterion = Criterion::gini;
  p.max_features = MaxFeatures::sqrt;
  p.max_depth = kUnboundedDepth;
  p.min_samples_split = 2;
  return p;
}

ClassificationResult classify_module_status(const ClassificationData& data, std::uint64_t seed,
                                            int folds, int jobs) {
  const std::size_t n = data.labels.size();
  if (std::set<int>(data.labels.begin(), data.labels.end()).size() < 2)
    throw DomainError("classify_module_status: dataset has a single class");
  if (n < static_cast<std::size_t>(folds))
    throw ContractError("classify_module_status: fewer rows than folds");
  if (!data.units.empty() && data.units.size() != n)
    throw ContractError("classify_module_status: unit ids do not match the rows");
  const std::vector<int> fold_of =
      data.units.empty() ? stratified_folds(data.labels, folds, seed) : unit_folds(data.units, folds, seed);
  ClassificationResult result;
  result.rows = n;
  result.predictions.assign(n, 0);
  result.per_fold.resize(static_cast<std::size_t>(folds));
  const HyperParams params = default_classifier_params();

  parallel_for(static_cast<std::size_t>(folds), jobs, [&](std::size_t f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < n; ++i)
      (fold_of[i] == static_cast<int>(f) ? test : train).push_back(static_cast<Eigen::Index>(i));
    if (test.empty()) return;
    Vector y_train(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i)
      y_train(static_cast<Eigen::Index>(i)) = data.labels[static_cast<std::size_t>(train[i])];
    const auto model = fit_forest(data.X(train, Eigen::all), y_train, params, TaskKind::classification,
                                  hash_words({seed, f, 0x636c6173ULL}));
    std::vector<int> truth, pred;
    for (const auto i : test) {
      const int p = static_cast<int>(model.predict(data.X.row(i).transpose()));
      result.predictions[static_cast<std::size_t>(i)] = p;
      truth.push_back(data.labels[static_cast<std::size_t>(i)]);
      pred.push_back(p);
    }
    result.per_fold[f] = classification_metrics(truth, pred);
  });
  const auto pooled = classification_metrics(data.labels, result.predictions);
  result.accuracy = pooled.accuracy;
  result.f1 = pooled.f1;
  return result;
}

}  // namespace mcx
