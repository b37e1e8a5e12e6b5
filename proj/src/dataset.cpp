#include "grhmc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace grhmc {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

LogisticRegressionData load_csv_dataset(const std::string& path,
                                        const std::string& response_column,
                                        bool standardize,
                                        double prior_variance) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open dataset: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ModelError("empty dataset: " + path);
  const auto header = split_record(line);

  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto rec = split_record(line);
    if (rec.size() != header.size()) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected " << header.size()
          << " fields, got " << rec.size();
      throw ModelError(msg.str());
    }
    rows.push_back(std::move(rec));
  }
  if (rows.empty()) throw ModelError("dataset has no rows: " + path);

  const auto resp_it = std::find(header.begin(), header.end(), response_column);
  if (resp_it == header.end())
    throw ModelError("response column '" + response_column + "' not found");
  const auto resp_idx = static_cast<std::size_t>(resp_it - header.begin());

  const auto n = static_cast<Eigen::Index>(rows.size());
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto v = parse_number(rows[i][resp_idx]);
    if (!v || (*v != 0.0 && *v != 1.0))
      throw ModelError("response '" + response_column +
                       "' is not binary at row " + std::to_string(i + 1));
    y[i] = *v;
  }

  // Build covariate blocks column by column.
  std::vector<Vector> columns;
  std::vector<std::string> names{"(intercept)"};
  columns.push_back(Vector::Ones(n));
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == resp_idx) continue;
    Vector numeric(n);
    bool is_numeric = true;
    for (Eigen::Index i = 0; i < n && is_numeric; ++i) {
      const auto v = parse_number(rows[i][c]);
      if (v) numeric[i] = *v;
      else is_numeric = false;
    }
    if (is_numeric) {
      if (standardize) {
        const double mean = numeric.mean();
        const double sd =
            std::sqrt((numeric.array() - mean).square().sum() / (n - 1.0));
        if (!(sd > 0.0))
          throw ModelError("covariate '" + header[c] + "' is constant");
        numeric = (numeric.array() - mean) / sd;
      }
      columns.push_back(std::move(numeric));
      names.push_back(header[c]);
      continue;
    }
    std::map<std::string, int> levels;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (rows[i][c].empty())
        throw ModelError("missing value in column '" + header[c] + "'");
      levels.emplace(rows[i][c], 0);
    }
    int index = 0;
    for (auto& [level, id] : levels) id = index++;
    for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
      Vector indicator(n);
      for (Eigen::Index i = 0; i < n; ++i)
        indicator[i] = rows[i][c] == it->first ? 1.0 : 0.0;
      columns.push_back(std::move(indicator));
      names.push_back(header[c] + "=" + it->first);
    }
  }

  LogisticRegressionData data;
  data.x.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j)
    data.x.col(static_cast<Eigen::Index>(j)) = columns[j];
  data.y = std::move(y);
  data.prior_variance = prior_variance;
  data.column_names = std::move(names);

  Eigen::ColPivHouseholderQR<Matrix> qr(data.x);
  if (qr.rank() < data.x.cols())
    throw ModelError("design matrix is rank deficient (rank " +
                     std::to_string(qr.rank()) + " < " +
                     std::to_string(data.x.cols()) + ")");
  return data;
}

}  // namespace grhmc
