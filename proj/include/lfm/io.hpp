#pragma once

#include "lfm/cdgauss.hpp"
#include "lfm/estim.hpp"
#include "lfm/ssm.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace lfm::io {

/// Shortest "%.17g" rendering; round-trips every finite double.
std::string format_double(double v);

/// Numeric CSV with a header row. Empty cells read as NaN.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  Eigen::Index column(const std::string& name) const;  ///< -1 if absent
};

/// Throws ConfigError naming the file and line of the first malformed row.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::istream& in, const std::string& origin);

void write_csv(std::ostream& out, const CsvTable& table);

/// t,x0,...,x{dim-1}
CsvTable trajectory_table(const Trajectory& traj);
Trajectory trajectory_from_table(const CsvTable& table, const std::string& origin);

/// t,y0,...; rows with every y blank are prediction-only points.
CsvTable observations_table(const std::vector<Observation>& data, Eigen::Index dim_y);
std::vector<Observation> observations_from_table(const CsvTable& table, const std::string& origin);

/// t,m_*,diagP_*,y_*,mu_*,S_diag_*; blank measurement cells on prediction-only steps.
CsvTable filter_table(const FilterResult& result, Eigen::Index dim_y);

/// t,m_*,diagP_*
CsvTable smoother_table(const SmootherResult& result);

/// {"loglik", "n_steps", "diverged"}
nlohmann::json run_summary(double loglik, std::size_t n_steps, bool diverged);

/// iter,logpost,<names...> on the natural scale.
CsvTable chain_table(const estim::McmcChain& chain, const std::vector<std::string>& names);

/// {"acceptance_rate", "n_samples", "burn_in", "seed", "parameters": {name: {mean, std}}}
nlohmann::json chain_summary(const estim::McmcChain& chain, const std::vector<std::string>& names,
                             double burn_in_fraction = 0.05);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace lfm::io
