#include "grhmc/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace grhmc {
namespace {

using Table = std::vector<std::vector<std::string>>;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string scale_cell(const CoordinateRow& row) {
  return fmt("%.2f", row.scale_mean) + " (" + fmt("%.3f", row.scale_sd) + ")";
}

std::string ess_cell(const CoordinateRow& row) {
  return row.ess.undefined ? "NA" : fmt("%.0f", row.ess.value);
}

std::string to_csv(const Table& t) {
  std::string out;
  for (const auto& row : t) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      const bool quote = row[i].find_first_of(",\" ") != std::string::npos;
      if (quote) {
        out += '"';
        for (char c : row[i]) out += c == '"' ? std::string("\"\"") : std::string(1, c);
        out += '"';
      } else {
        out += row[i];
      }
    }
    out += '\n';
  }
  return out;
}

// First `left` columns are left aligned, the rest right aligned.
std::string to_text(const Table& t, std::size_t left) {
  std::vector<std::size_t> width;
  for (const auto& row : t) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    std::string line;
    for (std::size_t i = 0; i < t[r].size(); ++i) {
      if (i) line += "  ";
      const std::string pad(width[i] - t[r][i].size(), ' ');
      line += i < left ? t[r][i] + pad : pad + t[r][i];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      out += std::string(total > 2 ? total - 2 : 0, '-') + '\n';
    }
  }
  return out;
}

Table experiment_table(const ExperimentResult& result) {
  Table t{{"coordinate", "name", "ESS", "mean", "sd", "mean_se", "S_mean", "S_sd",
           "efficiency"}};
  if (!result.report) return t;
  for (const CoordinateRow& row : result.report->table_rows()) {
    const auto j = static_cast<std::size_t>(row.coordinate);
    t.push_back({row.label,
                 j < result.coordinate_names.size() ? result.coordinate_names[j] : "",
                 ess_cell(row), fmt("%.4f", row.mean), fmt("%.4f", row.sd),
                 fmt("%.4f", row.mean_se), fmt("%.4f", row.scale_mean),
                 fmt("%.4f", row.scale_sd), fmt("%.1f", row.efficiency)});
  }
  return t;
}

std::string experiment_footer(const ExperimentResult& result) {
  std::ostringstream os;
  const auto& c = result.config;
  os << "experiment " << c.name << ", method " << to_string(c.method) << ", replicas "
     << c.replicas << " (" << result.failures() << " failed), N per replica " << c.samples
     << ", t_sample " << c.t_sample << ", seed " << c.seed << "\n";
  if (result.report)
    os << "N_ode total " << result.report->n_ode_total << ", samples total "
       << result.report->total_samples << "\n";
  return os.str();
}

Table comparison_table(const std::vector<const ExperimentResult*>& results,
                       const std::vector<std::string>& target_order) {
  std::vector<Method> methods;
  for (const auto* r : results)
    if (std::find(methods.begin(), methods.end(), r->config.method) == methods.end())
      methods.push_back(r->config.method);

  Table t;
  std::vector<std::string> header{"target", "coordinate"};
  for (const char* group : {"ESS", "mean(S) (SD(S))", "ESS*100000/N_ode"})
    for (Method m : methods) header.push_back(std::string(group) + " " + to_string(m));
  t.push_back(header);

  for (const std::string& name : target_order) {
    std::vector<std::vector<CoordinateRow>> per_method;
    std::size_t n_rows = 0;
    for (Method m : methods) {
      std::vector<CoordinateRow> rows;
      for (const auto* r : results)
        if (r->config.name == name && r->config.method == m && r->report)
          rows = r->report->table_rows();
      n_rows = std::max(n_rows, rows.size());
      per_method.push_back(std::move(rows));
    }
    if (n_rows == 0) {
      std::vector<std::string> line{name, "failed"};
      line.resize(header.size(), "");
      t.push_back(line);
      continue;
    }
    for (std::size_t i = 0; i < n_rows; ++i) {
      std::string label;
      for (const auto& rows : per_method)
        if (i < rows.size()) {
          label = rows[i].label;
          break;
        }
      std::vector<std::string> line{i == 0 ? name : "", label};
      for (int group = 0; group < 3; ++group)
        for (const auto& rows : per_method) {
          if (i >= rows.size()) {
            line.push_back("-");
            continue;
          }
          const CoordinateRow& row = rows[i];
          line.push_back(group == 0   ? ess_cell(row)
                         : group == 1 ? scale_cell(row)
                                      : fmt("%.0f", row.efficiency));
        }
      t.push_back(line);
    }
  }
  return t;
}

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
}

nlohmann::json vector_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

std::string replica_stem(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "replica_%02d", index);
  return buf;
}

}  // namespace

void write_samples_csv(const std::filesystem::path& file, const std::vector<std::string>& names,
                       const Matrix& samples) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", samples(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

std::pair<std::vector<std::string>, Matrix> read_samples_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(file.string() + " is empty");
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  std::vector<double> values;
  long rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++n;
    }
    if (n != names.size())
      throw std::runtime_error(file.string() + ": row " + std::to_string(rows + 1) +
                               " has the wrong number of columns");
    ++rows;
  }
  Matrix m(rows, static_cast<Eigen::Index>(names.size()));
  for (long i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = values[static_cast<std::size_t>(i * m.cols() + j)];
  return {names, m};
}

std::string replica_metadata_json(const ExperimentResult& result, const ReplicaResult& replica) {
  nlohmann::ordered_json j;
  j["experiment"] = result.config.name;
  j["method"] = to_string(result.config.method);
  j["replica"] = replica.index;
  j["seed"] = replica.seed;
  if (replica.chain) {
    const ChainOutput& c = *replica.chain;
    j["n_ode"] = c.n_ode;
    j["lambda"] = c.lambda;
    j["m"] = vector_json(c.scaling.m);
    j["S"] = vector_json(c.scaling.s);
    j["samples"] = c.samples.rows();
    j["sample_spacing"] = result.config.sample_spacing();
    nlohmann::ordered_json phases = nlohmann::ordered_json::array();
    for (const auto& p : c.phases)
      phases.push_back({{"name", p.name}, {"t_begin", p.t_begin}, {"t_end", p.t_end},
                        {"rhs_evals", p.rhs_evals}, {"refreshes", p.refreshes},
                        {"crossings", p.crossings}});
    j["phases"] = phases;
    if (c.time_average_mean.size()) {
      j["time_average_mean"] = vector_json(c.time_average_mean);
      j["time_average_second_moment"] = vector_json(c.time_average_second_moment);
    }
  } else {
    j["error"] = replica.error;
    j["error_time"] = replica.error_time;
    if (replica.error_position.size()) j["error_position"] = vector_json(replica.error_position);
  }
  if (!replica.mct_stages.empty()) {
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const auto& s : replica.mct_stages)
      stages.push_back({{"t_begin", s.t_begin}, {"t_end", s.t_end},
                        {"m", vector_json(s.output.m)}, {"S", vector_json(s.output.s)},
                        {"updates", s.updates}});
    j["mct_stages"] = stages;
  }
  return j.dump(2) + "\n";
}

std::string experiment_table_csv(const ExperimentResult& result) {
  return to_csv(experiment_table(result));
}

std::string experiment_table_text(const ExperimentResult& result) {
  return to_text(experiment_table(result), 2) + "\n" + experiment_footer(result);
}

std::string comparison_table_csv(const std::vector<const ExperimentResult*>& results,
                                 const std::vector<std::string>& target_order) {
  return to_csv(comparison_table(results, target_order));
}

std::string comparison_table_text(const std::vector<const ExperimentResult*>& results,
                                  const std::vector<std::string>& target_order) {
  return to_text(comparison_table(results, target_order), 2);
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const ReplicaResult& r : result.replicas) {
    const std::string stem = replica_stem(r.index);
    if (r.chain && result.config.write_samples)
      write_samples_csv(dir / (stem + ".csv"), result.coordinate_names, r.chain->samples);
    write_file(dir / (stem + ".json"), replica_metadata_json(result, r));
  }
  write_file(dir / "table.csv", experiment_table_csv(result));
  write_file(dir / "table.txt", experiment_table_text(result));
}

void write_suite_tables(const SuiteConfig& suite, const std::vector<ExperimentResult>& results,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<const ExperimentResult*> ptrs;
  for (const auto& r : results) ptrs.push_back(&r);
  write_file(dir / "comparison.csv", comparison_table_csv(ptrs, suite.target_order));
  write_file(dir / "comparison.txt", comparison_table_text(ptrs, suite.target_order));
}

}  // namespace grhmc
