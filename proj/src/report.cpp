#include "mcx/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mcx/ela.hpp"

namespace mcx {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw MissingInputError("CSV column '" + name + "' not found");
}

namespace {

CsvRow split_line(const std::string& line) {
  CsvRow out;
  std::size_t pos = 0;
  while (true) {
    const auto end = line.find(',', pos);
    out.push_back(line.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("missing input file " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw MissingInputError("empty CSV file " + path);
  table.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CsvRow row = split_line(line);
    if (row.size() != table.header.size())
      throw MissingInputError("malformed row in " + path + ": " + line);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, target);
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::string out;
  auto append = [&](const CsvRow& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].find(',') != std::string::npos)
        throw ContractError("CSV field contains a comma: " + row[i]);
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  };
  append(table.header);
  for (const auto& r : table.rows) append(r);
  write_text_file(path, out);
}

std::string heatmap_svg(const std::vector<FrequencyCell>& cells, int max_count, const std::string& title) {
  const auto& names = feature_names();
  constexpr int kLabelWidth = 260;
  constexpr int kCell = 16;
  constexpr int kHeader = 70;
  const int cols = static_cast<int>(cells.size());
  const int rows = static_cast<int>(names.size());
  const int width = kLabelWidth + cols * 3 * kCell + 20;
  const int height = kHeader + rows * kCell + 20;
  char buf[512];
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  s << "<text x=\"4\" y=\"14\" font-size=\"12\">" << title << "</text>\n";
  for (int c = 0; c < cols; ++c) {
    const auto& cell = cells[static_cast<std::size_t>(c)];
    const int x = kLabelWidth + c * 3 * kCell;
    s << "<text x=\"" << x << "\" y=\"36\">B=" << cell.budget << "</text>\n";
    s << "<text x=\"" << x << "\" y=\"50\">" << cell.module_value << "</text>\n";
  }
  for (int r = 0; r < rows; ++r) {
    const int y = kHeader + r * kCell;
    s << "<text x=\"4\" y=\"" << y + 12 << "\">" << names[static_cast<std::size_t>(r)] << "</text>\n";
    for (int c = 0; c < cols; ++c) {
      const int count = cells[static_cast<std::size_t>(c)].counts[static_cast<std::size_t>(r)];
      const double shade = max_count > 0 ? static_cast<double>(count) / max_count : 0.0;
      const int level = static_cast<int>(255.0 - 200.0 * shade + 0.5);
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"rgb(%d,%d,255)\" "
                    "stroke=\"#ccc\"/><text x=\"%d\" y=\"%d\" text-anchor=\"middle\">%d</text>\n",
                    kLabelWidth + c * 3 * kCell, y, 3 * kCell, kCell, level, level,
                    kLabelWidth + c * 3 * kCell + 3 * kCell / 2, y + 12, count);
      s << buf;
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace mcx
