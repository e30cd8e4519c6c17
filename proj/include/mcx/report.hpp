#pragma once

#include <string>
#include <vector>

#include "mcx/analysis.hpp"

namespace mcx {

using CsvRow = std::vector<std::string>;

/// Comma-separated table with a header row. Fields never contain commas.
struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;

  /// Column position by name; throws MissingInputError when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

/// Writes `content` to `path` only through a temporary file and rename, so
/// readers never see a partial file.
void write_text_file(const std::string& path, const std::string& content);

/// Heatmap of one (axis, dimension, k) slice: features on rows, one column
/// per (budget, module value) cell, shade proportional to count / max_count.
std::string heatmap_svg(const std::vector<FrequencyCell>& cells, int max_count, const std::string& title);

}  // namespace mcx
