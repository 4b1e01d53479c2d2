#include "lfm/app/config.hpp"

#include <boost/property_tree/ini_parser.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace lfm::app {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, c.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Config c = parse(ss.str(), path.string());
  c.base_dir_ = std::filesystem::absolute(path).parent_path();
  return c;
}

std::optional<std::string> Config::raw(const std::string& key) const {
  if (auto v = tree_.get_optional<std::string>(key)) return trim(*v);
  return std::nullopt;
}

void Config::bad(const std::string& key, const std::string& what) const {
  throw ConfigError(origin_ + ": " + key + ": " + what);
}

bool Config::has(const std::string& key) const { return raw(key).has_value(); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

std::string Config::require_string(const std::string& key) const {
  auto v = raw(key);
  if (!v || v->empty()) bad(key, "required setting is missing");
  return *v;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(*v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v->size()) bad(key, "expected a number, got '" + *v + "'");
  return d;
}

double Config::require_double(const std::string& key) const {
  if (!has(key)) bad(key, "required setting is missing");
  return get_double(key, 0.0);
}

long long Config::get_int(const std::string& key, long long fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::size_t used = 0;
  long long i = 0;
  try {
    i = std::stoll(*v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v->size()) bad(key, "expected an integer, got '" + *v + "'");
  return i;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::size_t used = 0;
  unsigned long long i = 0;
  try {
    if (!v->empty() && (*v)[0] == '-') throw std::invalid_argument("negative");
    i = std::stoull(*v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v->size()) bad(key, "expected a non-negative integer, got '" + *v + "'");
  return i;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "on" || *v == "1") return true;
  if (*v == "false" || *v == "no" || *v == "off" || *v == "0") return false;
  bad(key, "expected true/false, got '" + *v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) bad(key, "expected a list of numbers, got '" + *v + "'");
    out.push_back(d);
  }
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key,
                                             const std::vector<std::string>& fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  return split_list(*v);
}

std::filesystem::path Config::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir_.empty()) return p;
  return base_dir_ / p;
}

void Config::set(const std::string& key, const std::string& value) { tree_.put(key, value); }

ExperimentConfig make_experiment(Config raw, const RunOverrides& overrides) {
  ExperimentConfig cfg;
  cfg.id = raw.require_string("experiment.id");
  if (cfg.id != "tf" && cfg.id != "ballistic" && cfg.id != "orbit" && cfg.id != "custom") {
    throw ConfigError(raw.origin() + ": experiment.id: unknown experiment '" + cfg.id +
                      "' (tf | ballistic | orbit | custom)");
  }
  if (!raw.has("experiment.seed")) {
    throw ConfigError(raw.origin() + ": experiment.seed: an explicit seed is required");
  }
  cfg.seed = overrides.seed.value_or(raw.get_u64("experiment.seed", 0));
  cfg.reps = overrides.reps.value_or(static_cast<int>(raw.get_int("experiment.reps", 1)));
  cfg.threads = overrides.threads.value_or(static_cast<int>(raw.get_int("experiment.threads", 1)));
  cfg.substeps = static_cast<int>(raw.get_int("experiment.substeps", 10));
  if (cfg.reps < 1) throw ConfigError(raw.origin() + ": experiment.reps must be >= 1");
  if (cfg.threads < 1) throw ConfigError(raw.origin() + ": experiment.threads must be >= 1");
  if (cfg.substeps < 1) throw ConfigError(raw.origin() + ": experiment.substeps must be >= 1");
  if (overrides.out_dir) {
    cfg.out_dir = *overrides.out_dir;
  } else if (raw.has("experiment.out")) {
    cfg.out_dir = raw.resolve(raw.get_string("experiment.out", ""));
  } else if (const char* env = std::getenv("LFM_KIT_OUT"); env && *env) {
    cfg.out_dir = std::filesystem::path(env) / cfg.id;
  } else {
    cfg.out_dir = std::filesystem::path("out") / cfg.id;
  }
  cfg.raw = std::move(raw);
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path, const RunOverrides& overrides) {
  return make_experiment(Config::load(path), overrides);
}

}  // namespace lfm::app
