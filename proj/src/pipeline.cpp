#include "mcx/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <set>

#include "mcx/attribution.hpp"
#include "mcx/ela.hpp"
#include "mcx/modcma.hpp"
#include "mcx/problems.hpp"

namespace mcx {

namespace fs = std::filesystem;

namespace {

void note(const PipelineOptions& options, const std::string& message) {
  if (options.log) *options.log << message << std::endl;
}

std::string path_in(const ExperimentSpec& spec, const std::string& name) {
  return (fs::path(spec.output) / name).string();
}

int to_int(const std::string& s) { return std::stoi(s); }
std::int64_t to_i64(const std::string& s) { return std::stoll(s); }

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw MissingInputError("malformed number '" + s + "'");
  return v;
}

std::string sanitize(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

std::string missing_list(const std::vector<std::string>& missing) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(missing.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) out += "\n  " + missing[i];
  if (missing.size() > shown) out += "\n  ... and " + std::to_string(missing.size() - shown) + " more";
  return out;
}

struct RunKey {
  std::string config_id;
  int function_id;
  int instance_id;
  int dimension;
  int run;
  auto operator<=>(const RunKey&) const = default;
};

}  // namespace

std::uint64_t run_seed(std::uint64_t master, const std::string& config_id, int function_id,
                       int instance_id, int dimension, int run) {
  return hash_words({master, hash_string(config_id), static_cast<std::uint64_t>(function_id),
                     static_cast<std::uint64_t>(instance_id), static_cast<std::uint64_t>(dimension),
                     static_cast<std::uint64_t>(run)});
}

std::string config_hash(const std::string& config_id) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(config_id)));
  return buf;
}

std::string model_path(const std::string& out_dir, const std::string& config_id, int dimension,
                       std::int64_t budget, int held_out_instance) {
  return (fs::path(out_dir) / "models" /
          (config_hash(config_id) + "_d" + std::to_string(dimension) + "_b" + std::to_string(budget) +
           "_fold" + std::to_string(held_out_instance) + ".txt"))
      .string();
}

BenchmarkSummary cmd_benchmark(const ExperimentSpec& spec, const PipelineOptions& options) {
  spec.validate();
  const std::string path = path_in(spec, "runs.csv");
  const CsvRow header{"config_id", "function_id", "instance_id", "dimension", "run",
                      "seed",      "budget",      "precision",   "status"};

  // Existing rows, grouped by run key; a run counts as done when all budgets are present.
  std::map<RunKey, std::vector<CsvRow>> existing;
  if (fs::exists(path)) {
    const CsvTable table = read_csv(path);
    if (table.header != header) throw MissingInputError(path + " has an unexpected header");
    for (const auto& r : table.rows)
      existing[{r[0], to_int(r[1]), to_int(r[2]), to_int(r[3]), to_int(r[4])}].push_back(r);
  }

  std::vector<RunKey> todo;
  BenchmarkSummary summary;
  for (const auto& c : spec.configs)
    for (const int f : spec.functions)
      for (const int i : spec.instances)
        for (const int d : spec.dimensions)
          for (int run = 0; run < spec.runs; ++run) {
            ++summary.runs_total;
            const RunKey key{c.to_string(), f, i, d, run};
            const auto it = existing.find(key);
            std::set<std::int64_t> have;
            if (it != existing.end())
              for (const auto& r : it->second) have.insert(to_i64(r[6]));
            bool complete = true;
            for (const auto b : spec.budgets) complete = complete && have.count(b);
            if (!complete) todo.push_back(key);
          }
  summary.runs_computed = todo.size();
  note(options, "benchmark: " + std::to_string(todo.size()) + " of " + std::to_string(summary.runs_total) +
                    " runs to compute");
  if (todo.empty() && fs::exists(path)) return summary;

  std::vector<RunRecord> records(todo.size());
  parallel_for(todo.size(), options.jobs, [&](std::size_t t) {
    const RunKey& k = todo[t];
    const auto instance = make_instance(k.function_id, k.instance_id, k.dimension);
    const auto config = ModuleConfiguration::parse(k.config_id);
    records[t] = run_fixed_budget(instance, config, spec.budgets,
                                  run_seed(spec.seed, k.config_id, k.function_id, k.instance_id,
                                           k.dimension, k.run));
  });

  for (std::size_t t = 0; t < todo.size(); ++t) {
    const RunKey& k = todo[t];
    const RunRecord& rec = records[t];
    if (rec.status != "ok") ++summary.failed;
    std::vector<CsvRow> rows;
    for (const auto& [budget, precision] : rec.checkpoints)
      rows.push_back({k.config_id, std::to_string(k.function_id), std::to_string(k.instance_id),
                      std::to_string(k.dimension), std::to_string(k.run), std::to_string(rec.seed),
                      std::to_string(budget), format_double(precision), sanitize(rec.status)});
    existing[k] = std::move(rows);
  }

  CsvTable table{header, {}};
  for (auto& [key, rows] : existing) {
    std::sort(rows.begin(), rows.end(),
              [](const CsvRow& a, const CsvRow& b) { return to_i64(a[6]) < to_i64(b[6]); });
    for (auto& r : rows) table.rows.push_back(std::move(r));
  }
  write_csv(path, table);
  return summary;
}

FeaturesSummary cmd_features(const ExperimentSpec& spec, const PipelineOptions& options) {
  spec.validate();
  const std::string path = path_in(spec, "features.csv");
  const CsvRow header{"function_id", "instance_id", "dimension", "feature_name", "value", "degenerate_flag"};
  const auto& names = feature_names();

  using Key = std::tuple<int, int, int>;
  std::map<Key, std::vector<CsvRow>> existing;
  if (fs::exists(path)) {
    const CsvTable table = read_csv(path);
    if (table.header != header) throw MissingInputError(path + " has an unexpected header");
    for (const auto& r : table.rows) existing[{to_int(r[0]), to_int(r[1]), to_int(r[2])}].push_back(r);
  }
  std::vector<Key> todo;
  FeaturesSummary summary;
  for (const int d : spec.dimensions)
    for (const int f : spec.functions)
      for (const int i : spec.instances) {
        ++summary.instances_total;
        const auto it = existing.find({f, i, d});
        if (it == existing.end() || it->second.size() != names.size() || options.raw_features)
          todo.push_back({f, i, d});
      }
  summary.instances_computed = todo.size();
  note(options, "features: " + std::to_string(todo.size()) + " of " +
                    std::to_string(summary.instances_total) + " instances to compute");
  if (todo.empty() && fs::exists(path)) return summary;

  std::vector<FeatureVector> results(todo.size());
  std::vector<std::vector<FeatureVector>> raw(todo.size());
  parallel_for(todo.size(), options.jobs, [&](std::size_t t) {
    const auto [f, i, d] = todo[t];
    results[t] = extract_features(make_instance(f, i, d), spec.ela_repetitions, 1,
                                  options.raw_features ? &raw[t] : nullptr);
  });

  for (std::size_t t = 0; t < todo.size(); ++t) {
    const auto [f, i, d] = todo[t];
    std::vector<CsvRow> rows;
    for (std::size_t j = 0; j < names.size(); ++j)
      rows.push_back({std::to_string(f), std::to_string(i), std::to_string(d), names[j],
                      format_double(results[t].values[j]), results[t].degenerate[j] ? "1" : "0"});
    existing[todo[t]] = std::move(rows);
  }
  CsvTable table{header, {}};
  for (auto& [key, rows] : existing)
    for (auto& r : rows) table.rows.push_back(std::move(r));
  write_csv(path, table);

  if (options.raw_features) {
    CsvTable raw_table{{"function_id", "instance_id", "dimension", "repetition", "feature_name", "value",
                        "degenerate_flag"},
                       {}};
    for (std::size_t t = 0; t < todo.size(); ++t) {
      const auto [f, i, d] = todo[t];
      for (std::size_t r = 0; r < raw[t].size(); ++r)
        for (std::size_t j = 0; j < names.size(); ++j)
          raw_table.rows.push_back({std::to_string(f), std::to_string(i), std::to_string(d),
                                    std::to_string(r), names[j], format_double(raw[t][r].values[j]),
                                    raw[t][r].degenerate[j] ? "1" : "0"});
    }
    write_csv(path_in(spec, "features_raw.csv"), raw_table);
  }
  return summary;
}

std::map<TargetKey, double> load_mean_precision(const ExperimentSpec& spec) {
  const std::string path = path_in(spec, "runs.csv");
  const CsvTable table = read_csv(path);
  std::map<TargetKey, std::pair<double, int>> acc;
  std::set<std::tuple<std::string, int, int, int, int, std::int64_t>> seen;
  for (const auto& r : table.rows) {
    const TargetKey key{r[0], to_int(r[1]), to_int(r[2]), to_int(r[3]), to_i64(r[6])};
    if (!seen.insert({r[0], to_int(r[1]), to_int(r[2]), to_int(r[3]), to_int(r[4]), to_i64(r[6])}).second)
      continue;
    auto& [sum, count] = acc[key];
    if (to_int(r[4]) < spec.runs) {
      sum += to_double(r[7]);
      ++count;
    }
  }
  std::map<TargetKey, double> out;
  std::vector<std::string> missing;
  for (const auto& c : spec.configs)
    for (const int f : spec.functions)
      for (const int i : spec.instances)
        for (const int d : spec.dimensions)
          for (const auto b : spec.budgets) {
            const TargetKey key{c.to_string(), f, i, d, b};
            const auto it = acc.find(key);
            if (it == acc.end() || it->second.second != spec.runs) {
              missing.push_back("runs for " + c.to_string() + " f" + std::to_string(f) + " i" +
                                std::to_string(i) + " d" + std::to_string(d) + " budget " + std::to_string(b));
              continue;
            }
            out[key] = it->second.first / it->second.second;
          }
  if (!missing.empty())
    throw MissingInputError(path + " is incomplete (" + std::to_string(missing.size()) + " cells):" +
                            missing_list(missing));
  return out;
}

std::map<std::tuple<int, int, int>, Vector> load_features(const ExperimentSpec& spec) {
  const std::string path = path_in(spec, "features.csv");
  const CsvTable table = read_csv(path);
  std::map<std::tuple<int, int, int>, Vector> out;
  for (const auto& r : table.rows) {
    auto& v = out[{to_int(r[0]), to_int(r[1]), to_int(r[2])}];
    if (v.size() == 0) v = Vector::Constant(kFeatureCount, std::nan(""));
    v(feature_index(r[3])) = to_double(r[4]);
  }
  std::vector<std::string> missing;
  for (const int d : spec.dimensions)
    for (const int f : spec.functions)
      for (const int i : spec.instances) {
        const auto it = out.find({f, i, d});
        if (it == out.end() || !it->second.allFinite())
          missing.push_back("features for f" + std::to_string(f) + " i" + std::to_string(i) + " d" +
                            std::to_string(d));
      }
  if (!missing.empty())
    throw MissingInputError(path + " is incomplete:" + missing_list(missing));
  return out;
}

GroupedDataset training_dataset(const ExperimentSpec& spec, const std::map<TargetKey, double>& targets,
                                const std::map<std::tuple<int, int, int>, Vector>& features,
                                const std::string& config_id, int dimension, std::int64_t budget) {
  const auto n = static_cast<Eigen::Index>(spec.functions.size() * spec.instances.size());
  GroupedDataset data;
  data.X.resize(n, kFeatureCount);
  data.y.resize(n);
  Eigen::Index row = 0;
  for (const int f : spec.functions)
    for (const int i : spec.instances) {
      data.X.row(row) = features.at({f, i, dimension}).transpose();
      data.y(row) = transform_target(targets.at({config_id, f, i, dimension, budget}), spec.target_transform);
      data.groups.push_back(i);
      data.keys.emplace_back(f, i);
      ++row;
    }
  return data;
}

TrainSummary cmd_train(const ExperimentSpec& spec, const PipelineOptions& options) {
  spec.validate();
  const auto targets = load_mean_precision(spec);
  const auto features = load_features(spec);
  const auto grid = spec.hyperparameter_grid();
  TrainSummary summary;
  summary.candidates_per_search = grid.size();

  CsvTable results{{"config_id", "dimension", "budget", "candidate_index", "n_estimators", "max_features",
                    "max_depth", "min_samples_split", "criterion", "mean_r2", "selected"},
                   {}};
  for (const auto& c : spec.configs)
    for (const int d : spec.dimensions)
      for (const auto b : spec.budgets) {
        const std::string id = c.to_string();
        const GroupedDataset data = training_dataset(spec, targets, features, id, d, b);
        const std::uint64_t seed = hash_words({spec.seed, hash_string(id), static_cast<std::uint64_t>(d),
                                               static_cast<std::uint64_t>(b), 0x7472616eULL});
        const GridSearchResult search = logo_grid_search(data, grid, seed, options.jobs);
        ++summary.searches;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          const auto& p = grid[k];
          results.rows.push_back(
              {id, std::to_string(d), std::to_string(b), std::to_string(k), std::to_string(p.n_estimators),
               std::string(to_string(p.max_features)),
               p.max_depth == kUnboundedDepth ? "none" : std::to_string(p.max_depth),
               std::to_string(p.min_samples_split), std::string(to_string(p.criterion)),
               search.valid[k] ? format_double(search.mean_r2[k]) : "nan", k == search.best ? "1" : "0"});
        }
        for (std::size_t f = 0; f < search.fold_models.size(); ++f) {
          RandomForestModel model = search.fold_models[f];
          model.target_transform = std::string(to_string(spec.target_transform));
          fs::create_directories(fs::path(spec.output) / "models");
          save_model(model_path(spec.output, id, d, b, search.fold_groups[f]), model);
          ++summary.models_written;
        }
        note(options, "train: " + id + " d" + std::to_string(d) + " b" + std::to_string(b) + " best r2 " +
                          format_double(search.mean_r2[search.best]));
      }
  write_csv(path_in(spec, "grid_results.csv"), results);
  return summary;
}

ExplainSummary cmd_explain(const ExperimentSpec& spec, const PipelineOptions& options) {
  spec.validate();
  const auto targets = load_mean_precision(spec);
  const auto features = load_features(spec);
  const auto& names = feature_names();
  constexpr double kLocalAccuracyTolerance = 1e-9;

  std::vector<std::string> missing;
  for (const auto& c : spec.configs)
    for (const int d : spec.dimensions)
      for (const auto b : spec.budgets)
        for (const int g : spec.instances) {
          const auto p = model_path(spec.output, c.to_string(), d, b, g);
          if (!fs::exists(p)) missing.push_back(p);
        }
  if (!missing.empty())
    throw MissingInputError("missing model files (" + std::to_string(missing.size()) + "):" +
                            missing_list(missing));

  ExplainSummary summary;
  CsvTable shap{{"config_id", "dimension", "budget", "function_id", "instance_id", "feature_name", "phi"}, {}};
  CsvTable reps{{"config_id", "dimension", "budget", "feature_name", "aggregated_phi", "mode"}, {}};
  std::vector<std::pair<int, int>> expected;
  for (const int f : spec.functions)
    for (const int i : spec.instances) expected.emplace_back(f, i);

  for (const auto& c : spec.configs)
    for (const int d : spec.dimensions)
      for (const auto b : spec.budgets) {
        const std::string id = c.to_string();
        const GroupedDataset data = training_dataset(spec, targets, features, id, d, b);
        const auto n = static_cast<std::size_t>(data.X.rows());
        std::vector<std::vector<Vector>> per_row(n);

        for (const int g : spec.instances) {
          const RandomForestModel model = load_model(model_path(spec.output, id, d, b, g));
          std::vector<Eigen::Index> train;
          for (std::size_t r = 0; r < n; ++r)
            if (data.groups[r] != g) train.push_back(static_cast<Eigen::Index>(r));
          const Matrix background = data.X(train, Eigen::all);
          std::vector<Attribution> out(train.size());
          std::vector<double> error(train.size());
          parallel_for(train.size(), options.jobs, [&](std::size_t t) {
            const Vector x = data.X.row(train[t]).transpose();
            out[t] = forest_shap(model, x, background);
            error[t] = std::abs(out[t].base + out[t].phi.sum() - model.predict(x));
          });
          for (std::size_t t = 0; t < train.size(); ++t) {
            if (!(error[t] < kLocalAccuracyTolerance))
              throw NumericalError("attribution breaks local accuracy by " + format_double(error[t]) +
                                   " for " + id);
            summary.max_local_error = std::max(summary.max_local_error, error[t]);
            per_row[static_cast<std::size_t>(train[t])].push_back(out[t].phi);
          }
          summary.attributions += train.size();
        }

        std::vector<InstanceAttribution> instances;
        for (std::size_t r = 0; r < n; ++r) {
          Vector phi;
          if (per_row[r].size() == 4) {
            phi = aggregate_instance(per_row[r]);
          } else {
            phi = Vector::Zero(kFeatureCount);
            for (const auto& v : per_row[r]) phi += v;
            phi /= static_cast<double>(per_row[r].size());
          }
          const auto [f, i] = data.keys[r];
          instances.push_back({f, i, phi});
          for (std::size_t j = 0; j < names.size(); ++j)
            shap.rows.push_back({id, std::to_string(d), std::to_string(b), std::to_string(f), std::to_string(i),
                                 names[j], format_double(phi(static_cast<Eigen::Index>(j)))});
        }
        for (const auto mode : {RepresentationMode::signed_mean, RepresentationMode::mean_abs}) {
          const Vector rep = build_representation(instances, mode, expected);
          for (std::size_t j = 0; j < names.size(); ++j)
            reps.rows.push_back({id, std::to_string(d), std::to_string(b), names[j],
                                 format_double(rep(static_cast<Eigen::Index>(j))), std::string(to_string(mode))});
        }
        note(options, "explain: " + id + " d" + std::to_string(d) + " b" + std::to_string(b));
      }
  write_csv(path_in(spec, "shap.csv"), shap);
  write_csv(path_in(spec, "representations.csv"), reps);
  return summary;
}

std::vector<Representation> load_representations(const ExperimentSpec& spec, RepresentationMode mode) {
  const CsvTable table = read_csv(path_in(spec, "representations.csv"));
  const std::string wanted(to_string(mode));
  std::map<std::tuple<std::string, int, std::int64_t>, Vector> acc;
  for (const auto& r : table.rows) {
    if (r[5] != wanted) continue;
    auto& v = acc[{r[0], to_int(r[1]), to_i64(r[2])}];
    if (v.size() == 0) v = Vector::Constant(kFeatureCount, std::nan(""));
    v(feature_index(r[3])) = to_double(r[4]);
  }
  std::vector<Representation> out;
  std::vector<std::string> missing;
  for (const auto& c : spec.configs)
    for (const int d : spec.dimensions)
      for (const auto b : spec.budgets) {
        const auto it = acc.find({c.to_string(), d, b});
        if (it == acc.end() || !it->second.allFinite()) {
          missing.push_back("representation for " + c.to_string() + " d" + std::to_string(d) + " b" +
                            std::to_string(b));
          continue;
        }
        out.push_back({c.to_string(), d, b, it->second});
      }
  if (!missing.empty()) throw MissingInputError("representations.csv is incomplete:" + missing_list(missing));
  return out;
}

std::vector<CsvRow> frequency_rows(const std::vector<FrequencyCell>& cells) {
  std::vector<CsvRow> rows;
  const auto& names = feature_names();
  for (const auto& cell : cells)
    for (std::size_t j = 0; j < cell.counts.size(); ++j)
      rows.push_back({std::string(axis_key(cell.axis)), std::to_string(cell.dimension), std::to_string(cell.budget),
                      cell.module_value, names[j], std::to_string(cell.counts[j]), std::to_string(cell.k)});
  return rows;
}

ReportSummary cmd_report(const ExperimentSpec& spec, const PipelineOptions& options) {
  spec.validate();
  const auto reps = load_representations(spec, spec.shap_mode);
  ReportSummary summary;
  CsvTable frequency{{"axis", "dimension", "budget", "module_value", "feature_name", "count", "k"}, {}};
  CsvTable classification{{"axis", "dimension", "rows", "accuracy", "f1", "seed"}, {}};

  for (const auto axis : spec.axes) {
    const auto pairs = find_pairs(spec.configs, axis);
    const std::string axis_name(axis_key(axis));
    if (pairs.empty()) {
      note(options, "report: no configuration pairs differ only in " + axis_name + "; skipped");
      continue;
    }
    for (const int k : spec.topk) {
      const auto cells = topk_frequency(reps, pairs, k);
      for (auto& r : frequency_rows(cells)) frequency.rows.push_back(std::move(r));
      for (const int d : spec.dimensions) {
        std::vector<FrequencyCell> slice;
        for (const auto& c : cells)
          if (c.dimension == d) slice.push_back(c);
        const std::string name = "heatmap_" + axis_name + "_d" + std::to_string(d) + "_k" + std::to_string(k) + ".svg";
        write_text_file(path_in(spec, name),
                        heatmap_svg(slice, static_cast<int>(pairs.size()),
                                    "Top-" + std::to_string(k) + " frequency, axis " + axis_name + ", D=" +
                                        std::to_string(d) + ", " + std::to_string(pairs.size()) + " pairs"));
        summary.heatmaps.push_back(name);
      }
    }
    for (const int d : spec.dimensions) {
      const ClassificationData data = classification_dataset(reps, pairs, d);
      const std::uint64_t seed =
          hash_words({spec.seed, static_cast<std::uint64_t>(axis), static_cast<std::uint64_t>(d), 0x636c73ULL});
      if (data.labels.size() < 5) {
        note(options, "report: too few rows to classify " + axis_name + " at D=" + std::to_string(d));
        continue;
      }
      const auto result = classify_module_status(data, seed, 5, options.jobs);
      summary.classification.push_back({axis, d, result.rows, result.accuracy, result.f1, seed});
      classification.rows.push_back({axis_name, std::to_string(d), std::to_string(result.rows),
                                     format_double(result.accuracy), format_double(result.f1),
                                     std::to_string(seed)});
      note(options, "report: " + axis_name + " D=" + std::to_string(d) + " accuracy " +
                        format_double(result.accuracy) + " f1 " + format_double(result.f1));
    }
  }
  summary.frequency_rows = frequency.rows.size();
  write_csv(path_in(spec, "frequency.csv"), frequency);
  write_csv(path_in(spec, "classification.csv"), classification);
  return summary;
}

PipelineSummary cmd_all(const ExperimentSpec& spec, const PipelineOptions& options) {
  PipelineSummary s;
  s.benchmark = cmd_benchmark(spec, options);
  s.features = cmd_features(spec, options);
  s.train = cmd_train(spec, options);
  s.explain = cmd_explain(spec, options);
  s.report = cmd_report(spec, options);
  return s;
}

}  // namespace mcx
