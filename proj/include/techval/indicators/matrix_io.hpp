#pragma once

#include <sstream>
#include <string>

#include "techval/core/csv.hpp"
#include "techval/core/fs.hpp"
#include "techval/indicators/indicators.hpp"

namespace techval {

/// CSV layout: patent_id, the 50 indicator columns, label (VP/NVP).
inline std::string feature_matrix_to_csv(const FeatureMatrix& m) {
  std::ostringstream out;
  std::vector<std::string> header{"patent_id"};
  header.insert(header.end(), m.feature_names.begin(), m.feature_names.end());
  header.emplace_back("label");
  csv::write_row(out, header);
  for (std::size_t r = 0; r < m.size(); ++r) {
    std::vector<std::string> fields{m.patent_ids[r]};
    for (double v : m.rows.row(r)) fields.push_back(format_double(v));
    fields.emplace_back(m.labels[r] ? "VP" : "NVP");
    csv::write_row(out, fields);
  }
  return out.str();
}

inline FeatureMatrix feature_matrix_from_csv(std::istream& in, const std::string& source = "feature_matrix.csv") {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw ParseError(source + ": empty file");
  const auto& h = header->fields;
  if (h.size() < 3 || h.front() != "patent_id" || h.back() != "label") {
    throw ParseError(source + ": header must be patent_id, <features...>, label");
  }
  FeatureMatrix m;
  m.feature_names.assign(h.begin() + 1, h.end() - 1);
  m.rows = Matrix(0, m.feature_names.size());
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;
    const auto where = source + ":" + std::to_string(row->line) + ": ";
    if (row->fields.size() != h.size()) throw ParseError(where + "wrong number of columns");
    std::vector<double> values;
    try {
      for (std::size_t i = 1; i + 1 < row->fields.size(); ++i) values.push_back(parse_double(row->fields[i]));
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
    const auto& label = row->fields.back();
    if (label != "VP" && label != "NVP") throw ParseError(where + "label must be VP or NVP");
    m.patent_ids.push_back(row->fields.front());
    m.rows.append_row(values);
    m.labels.push_back(label == "VP" ? 1 : 0);
  }
  return m;
}

inline FeatureMatrix load_feature_matrix(const fs::path& path) {
  std::istringstream in(read_file(path));
  return feature_matrix_from_csv(in, path.filename().string());
}

}  // namespace techval
