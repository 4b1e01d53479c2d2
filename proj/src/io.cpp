#include "lfm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace lfm::io {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

void append_indexed(std::vector<std::string>& header, const std::string& prefix, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) header.push_back(prefix + std::to_string(i));
}

constexpr double kBlank = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Eigen::Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<Eigen::Index>(i);
  }
  return -1;
}

CsvTable parse_csv(std::istream& in, const std::string& origin) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cells = split(t);
    if (!have_header) {
      for (const auto& c : cells) {
        if (c.empty()) fail(origin, line_no, "empty column name in header");
      }
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      fail(origin, line_no, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].empty()) {
        row.push_back(kBlank);
        continue;
      }
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[i].size()) {
        fail(origin, line_no, "field '" + table.header[i] + "' is not a number: '" + cells[i] + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw ConfigError(origin + ": missing CSV header");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (!std::isnan(row[i])) out << format_double(row[i]);
    }
    out << '\n';
  }
}

CsvTable trajectory_table(const Trajectory& traj) {
  CsvTable table;
  table.header.push_back("t");
  append_indexed(table.header, "x", traj.states.rows());
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::vector<double> row{traj.times[k]};
    for (Eigen::Index i = 0; i < traj.states.rows(); ++i) row.push_back(traj.states(i, static_cast<Eigen::Index>(k)));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Trajectory trajectory_from_table(const CsvTable& table, const std::string& origin) {
  if (table.header.empty() || table.header[0] != "t") throw ConfigError(origin + ": first column must be 't'");
  Trajectory traj;
  const auto dim = static_cast<Eigen::Index>(table.header.size()) - 1;
  traj.states.resize(dim, static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    traj.times.push_back(table.rows[k][0]);
    for (Eigen::Index i = 0; i < dim; ++i) {
      traj.states(i, static_cast<Eigen::Index>(k)) = table.rows[k][static_cast<std::size_t>(i + 1)];
    }
  }
  return traj;
}

CsvTable observations_table(const std::vector<Observation>& data, Eigen::Index dim_y) {
  CsvTable table;
  table.header.push_back("t");
  append_indexed(table.header, "y", dim_y);
  for (const auto& o : data) {
    std::vector<double> row{o.t};
    for (Eigen::Index i = 0; i < dim_y; ++i) row.push_back(o.y ? (*o.y)(i) : kBlank);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<Observation> observations_from_table(const CsvTable& table, const std::string& origin) {
  if (table.header.size() < 2 || table.header[0] != "t") {
    throw ConfigError(origin + ": expected header t,y0,...");
  }
  const auto dim = static_cast<Eigen::Index>(table.header.size()) - 1;
  std::vector<Observation> data;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& row = table.rows[k];
    if (!std::isfinite(row[0])) throw ConfigError(origin + ": row " + std::to_string(k + 1) + " has no time");
    if (k > 0 && !(row[0] > data.back().t)) {
      throw ConfigError(origin + ": time column not strictly increasing at row " + std::to_string(k + 1));
    }
    Observation o{row[0], std::nullopt};
    Vec y(dim);
    int blanks = 0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      y(i) = row[static_cast<std::size_t>(i + 1)];
      if (std::isnan(y(i))) ++blanks;
    }
    if (blanks == 0) {
      o.y = y;
    } else if (blanks != dim) {
      throw ConfigError(origin + ": row " + std::to_string(k + 1) + " is partially observed");
    }
    data.push_back(std::move(o));
  }
  return data;
}

CsvTable filter_table(const FilterResult& result, Eigen::Index dim_y) {
  const Eigen::Index n = result.initial.m.size();
  CsvTable table;
  table.header.push_back("t");
  append_indexed(table.header, "m_", n);
  append_indexed(table.header, "diagP_", n);
  append_indexed(table.header, "y_", dim_y);
  append_indexed(table.header, "mu_", dim_y);
  append_indexed(table.header, "S_diag_", dim_y);
  for (const auto& s : result.steps) {
    std::vector<double> row{s.t};
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(s.m(i));
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(s.P(i, i));
    for (Eigen::Index i = 0; i < dim_y; ++i) row.push_back(s.has_measurement ? s.y(i) : kBlank);
    for (Eigen::Index i = 0; i < dim_y; ++i) row.push_back(s.has_measurement ? s.mu(i) : kBlank);
    for (Eigen::Index i = 0; i < dim_y; ++i) row.push_back(s.has_measurement ? s.S(i, i) : kBlank);
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable smoother_table(const SmootherResult& result) {
  const Eigen::Index n = result.means.empty() ? 0 : result.means.front().size();
  CsvTable table;
  table.header.push_back("t");
  append_indexed(table.header, "m_", n);
  append_indexed(table.header, "diagP_", n);
  for (std::size_t k = 0; k < result.times.size(); ++k) {
    std::vector<double> row{result.times[k]};
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(result.means[k](i));
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(result.covs[k](i, i));
    table.rows.push_back(std::move(row));
  }
  return table;
}

nlohmann::json run_summary(double loglik, std::size_t n_steps, bool diverged) {
  nlohmann::json j;
  j["loglik"] = std::isfinite(loglik) ? nlohmann::json(loglik) : nlohmann::json(nullptr);
  j["n_steps"] = n_steps;
  j["diverged"] = diverged;
  return j;
}

CsvTable chain_table(const estim::McmcChain& chain, const std::vector<std::string>& names) {
  CsvTable table;
  table.header = {"iter", "logpost"};
  table.header.insert(table.header.end(), names.begin(), names.end());
  for (Eigen::Index i = 0; i < chain.natural.rows(); ++i) {
    std::vector<double> row{static_cast<double>(i), chain.logpost(i)};
    for (Eigen::Index k = 0; k < chain.natural.cols(); ++k) row.push_back(chain.natural(i, k));
    table.rows.push_back(std::move(row));
  }
  return table;
}

nlohmann::json chain_summary(const estim::McmcChain& chain, const std::vector<std::string>& names,
                             double burn_in_fraction) {
  const Vec mean = chain.mean(burn_in_fraction);
  const Vec sd = chain.stddev(burn_in_fraction);
  nlohmann::json j;
  j["acceptance_rate"] = chain.acceptance_rate;
  j["n_samples"] = chain.natural.rows();
  j["burn_in"] = burn_in_fraction;
  j["seed"] = chain.seed;
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    params[names[k]] = {{"mean", mean(i)}, {"std", sd(i)}};
  }
  j["parameters"] = params;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
  std::ostringstream ss;
  write_csv(ss, table);
  write_text(path, ss.str());
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace lfm::io
