#include "mcx/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mcx/ela.hpp"
#include "mcx/modcma.hpp"
#include "mcx/problems.hpp"

namespace mcx {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto end = std::min(s.find(',', pos), s.size());
    const std::string item = trim(s.substr(pos, end - pos));
    if (!item.empty()) out.push_back(item);
    pos = end + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw SpecError("spec key '" + key + "': '" + text + "' is not an integer");
  return value;
}

template <typename T>
std::vector<T> parse_numbers(const std::string& text, const std::string& key) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<T>(item, key));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream s;
  for (std::size_t i = 0; i < values.size(); ++i) s << (i ? "," : "") << values[i];
  return s.str();
}

std::vector<ModuleConfiguration> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot read configuration list " + path);
  std::vector<ModuleConfiguration> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line.substr(0, line.find('#')));
    if (!t.empty()) out.push_back(ModuleConfiguration::parse(t));
  }
  return out;
}

}  // namespace

std::string_view to_string(GridKind g) { return g == GridKind::full ? "full" : "restricted"; }

GridKind parse_grid_kind(std::string_view text) {
  if (text == "full") return GridKind::full;
  if (text == "restricted") return GridKind::restricted;
  throw SpecError("grid must be 'full' or 'restricted', got '" + std::string(text) + "'");
}

void ExperimentSpec::validate() const {
  auto fail = [](const std::string& msg) { throw SpecError("invalid experiment spec: " + msg); };
  if (configs.empty()) fail("no configurations");
  std::set<std::string> ids;
  for (const auto& c : configs)
    if (!ids.insert(c.to_string()).second) fail("duplicate configuration " + c.to_string());
  if (functions.empty()) fail("no functions");
  for (const int f : functions)
    if (f < 1 || f > 24) fail("function id " + std::to_string(f) + " outside 1..24");
  if (std::set<int>(functions.begin(), functions.end()).size() != functions.size())
    fail("duplicate function ids");
  if (instances.empty()) fail("no instances");
  for (const int i : instances)
    if (i < 1) fail("instance ids must be positive");
  if (std::set<int>(instances.begin(), instances.end()).size() != instances.size())
    fail("duplicate instance ids");
  if (dimensions.empty()) fail("no dimensions");
  for (const int d : dimensions)
    if (d < 2 || d > SobolSequence::max_dimension()) fail("dimension " + std::to_string(d) + " unsupported");
  if (budgets.empty()) fail("no budgets");
  for (std::size_t i = 0; i < budgets.size(); ++i)
    if (budgets[i] < 1 || (i > 0 && budgets[i] <= budgets[i - 1]))
      fail("budgets must be positive and strictly ascending");
  for (const int d : dimensions)
    if (budgets.back() < default_population_size(d))
      fail("largest budget is below the population size for D=" + std::to_string(d));
  if (runs < 1) fail("runs must be >= 1");
  if (ela_repetitions < 1) fail("ela_repetitions must be >= 1");
  if (topk.empty()) fail("no top-k values");
  for (const int k : topk)
    if (k < 1 || k > kFeatureCount) fail("top-k values must lie in 1..46");
  if (output.empty()) fail("empty output directory");
}

std::string ExperimentSpec::to_text() const {
  std::ostringstream s;
  s << "# mcx experiment specification\n";
  s << "functions = " << join(functions) << '\n';
  s << "instances = " << join(instances) << '\n';
  s << "dimensions = " << join(dimensions) << '\n';
  s << "budgets = " << join(budgets) << '\n';
  s << "runs = " << runs << '\n';
  s << "ela_repetitions = " << ela_repetitions << '\n';
  s << "seed = " << seed << '\n';
  s << "topk = " << join(topk) << '\n';
  std::vector<std::string> axis_names;
  for (const auto a : axes) axis_names.emplace_back(axis_key(a));
  s << "axes = " << join(axis_names) << '\n';
  s << "grid = " << to_string(grid) << '\n';
  s << "shap_mode = " << (shap_mode == RepresentationMode::mean_abs ? "abs" : "signed") << '\n';
  s << "target_transform = " << to_string(target_transform) << '\n';
  s << "output = " << output << '\n';
  for (const auto& c : configs) s << "config = " << c.to_string() << '\n';
  return s.str();
}

ExperimentSpec ExperimentSpec::parse(std::string_view text, const std::string& base_dir) {
  ExperimentSpec spec;
  spec.configs.clear();
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      const std::string content = trim(line.substr(0, line.find('#')));
      if (content.empty()) continue;
      const auto eq = content.find('=');
      if (eq == std::string::npos) throw SpecError("expected 'key = value'");
      const std::string key = trim(std::string_view(content).substr(0, eq));
      const std::string value = trim(std::string_view(content).substr(eq + 1));
      if (key != "config" && !seen.insert(key).second) throw SpecError("key '" + key + "' given twice");
      if (key == "config") spec.configs.push_back(ModuleConfiguration::parse(value));
      else if (key == "config_file") {
        const auto path = std::filesystem::path(value).is_absolute()
                              ? std::filesystem::path(value)
                              : std::filesystem::path(base_dir) / value;
        for (auto& c : read_config_file(path.string())) spec.configs.push_back(c);
      } else if (key == "functions") spec.functions = parse_numbers<int>(value, key);
      else if (key == "instances") spec.instances = parse_numbers<int>(value, key);
      else if (key == "dimensions") spec.dimensions = parse_numbers<int>(value, key);
      else if (key == "budgets") spec.budgets = parse_numbers<std::int64_t>(value, key);
      else if (key == "runs") spec.runs = parse_number<int>(value, key);
      else if (key == "ela_repetitions") spec.ela_repetitions = parse_number<int>(value, key);
      else if (key == "seed") spec.seed = parse_number<std::uint64_t>(value, key);
      else if (key == "topk") spec.topk = parse_numbers<int>(value, key);
      else if (key == "axes") {
        spec.axes.clear();
        for (const auto& a : split_list(value)) spec.axes.push_back(parse_axis(a));
      } else if (key == "grid") spec.grid = parse_grid_kind(value);
      else if (key == "shap_mode") spec.shap_mode = parse_representation_mode(value);
      else if (key == "target_transform") spec.target_transform = parse_target_transform(value);
      else if (key == "output") spec.output = value;
      else throw SpecError("unknown key '" + key + "'");
    }
  } catch (const SpecError& e) {
    throw SpecError("spec line " + std::to_string(line_no) + ": " + e.what());
  } catch (const ConfigurationError& e) {
    throw SpecError("spec line " + std::to_string(line_no) + ": " + e.what());
  }
  spec.validate();
  return spec;
}

std::vector<HyperParams> ExperimentSpec::hyperparameter_grid() const {
  return grid == GridKind::full ? full_grid() : restricted_grid();
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot read spec file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ExperimentSpec::parse(buf.str(), std::filesystem::path(path).parent_path().string());
}

void save_spec(const std::string& path, const ExperimentSpec& spec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write spec file " + path);
  out << spec.to_text();
}

ExperimentSpec paper_profile() {
  ExperimentSpec s;
  s.configs = default_portfolio();
  for (int f = 1; f <= 24; ++f) s.functions.push_back(f);
  return s;
}

ExperimentSpec desk_profile() {
  ExperimentSpec s;
  s.configs = desk_portfolio();
  s.functions = {1, 2, 3, 5, 6, 8, 10, 12, 15, 17, 21, 24};
  s.dimensions = {5};
  s.budgets = {500, 2000};
  s.runs = 5;
  s.ela_repetitions = 5;
  s.axes = {ModuleAxis::elitist};
  s.grid = GridKind::restricted;
  return s;
}

ExperimentSpec profile(std::string_view name) {
  if (name == "paper") return paper_profile();
  if (name == "desk") return desk_profile();
  throw SpecError("unknown profile '" + std::string(name) + "'; expected paper or desk");
}

}  // namespace mcx
