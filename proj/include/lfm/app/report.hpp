#pragma once

#include "lfm/io.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace lfm::app {

struct ReplicationMetrics {
  int index = 0;
  std::uint64_t seed = 0;
  std::string label;
  double rmse = std::numeric_limits<double>::quiet_NaN();        ///< latent force
  double state_rmse = std::numeric_limits<double>::quiet_NaN();
  double coverage = std::numeric_limits<double>::quiet_NaN();    ///< 95% band
  bool diverged = false;
  std::string note;
  double seconds = 0.0;  ///< wall clock; never written to result files
  std::map<std::string, double> extra;
};

struct MetricsReport {
  std::string experiment;
  std::vector<ReplicationMetrics> replications;
  nlohmann::json summary = nlohmann::json::object();

  double total_seconds() const;
};

/// metrics.csv (index,label,seed,rmse,state_rmse,coverage,diverged,<extra...>) and summary.json.
void write_report(const std::filesystem::path& dir, const MetricsReport& report);

/// Runs body(i) for i in [0, n) on `threads` workers. Results must be stored by index.
/// The first exception thrown by any task is rethrown after all workers stop.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

/// Seconds elapsed while running fn.
double timed(const std::function<void()>& fn);

}  // namespace lfm::app
