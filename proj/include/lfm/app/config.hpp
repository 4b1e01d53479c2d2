#pragma once

#include "lfm/types.hpp"

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lfm::app {

/// Sectioned key-value configuration (INI syntax; full-line '#' or ';' comments).
/// Keys are addressed as "section.key".
class Config {
 public:
  Config() = default;
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text, const std::string& origin = "<config>");

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated numbers.
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Relative paths resolve against the directory holding the config file.
  std::filesystem::path resolve(const std::string& path) const;

  void set(const std::string& key, const std::string& value);
  const std::string& origin() const { return origin_; }

 private:
  boost::property_tree::ptree tree_;
  std::string origin_ = "<config>";
  std::filesystem::path base_dir_;

  std::optional<std::string> raw(const std::string& key) const;
  [[noreturn]] void bad(const std::string& key, const std::string& what) const;
};

/// Command-line overrides applied on top of the file.
struct RunOverrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<int> threads;
};

struct ExperimentConfig {
  std::string id;  ///< tf | ballistic | orbit | custom
  std::uint64_t seed = 0;
  int reps = 1;
  int threads = 1;
  int substeps = 10;
  std::filesystem::path out_dir;
  Config raw;
};

/// Reads [experiment] id/seed/reps/threads/substeps/out. The output directory falls back to
/// $LFM_KIT_OUT, then to "out/<id>". Throws ConfigError on missing or invalid values.
ExperimentConfig load_experiment(const std::filesystem::path& path, const RunOverrides& overrides = {});
ExperimentConfig make_experiment(Config raw, const RunOverrides& overrides = {});

}  // namespace lfm::app
