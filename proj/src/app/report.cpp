#include "lfm/app/report.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace lfm::app {

double MetricsReport::total_seconds() const {
  double s = 0.0;
  for (const auto& r : replications) s += r.seconds;
  return s;
}

void write_report(const std::filesystem::path& dir, const MetricsReport& report) {
  std::set<std::string> extra_keys;
  for (const auto& r : report.replications) {
    for (const auto& [k, v] : r.extra) extra_keys.insert(k);
  }
  io::CsvTable table;
  table.header = {"index", "label", "seed", "rmse", "state_rmse", "coverage", "diverged"};
  table.header.insert(table.header.end(), extra_keys.begin(), extra_keys.end());
  std::string csv;
  for (std::size_t i = 0; i < table.header.size(); ++i) csv += (i ? "," : "") + table.header[i];
  csv += '\n';
  const auto num = [](double v) { return std::isnan(v) ? std::string() : io::format_double(v); };
  for (const auto& r : report.replications) {
    csv += std::to_string(r.index) + "," + r.label + "," + std::to_string(r.seed) + "," + num(r.rmse) + "," +
           num(r.state_rmse) + "," + num(r.coverage) + "," + (r.diverged ? "1" : "0");
    for (const auto& k : extra_keys) {
      const auto it = r.extra.find(k);
      csv += "," + (it == r.extra.end() ? std::string() : num(it->second));
    }
    csv += '\n';
  }
  io::write_text(dir / "metrics.csv", csv);

  nlohmann::json j = report.summary;
  j["experiment"] = report.experiment;
  j["replications"] = report.replications.size();
  io::write_json_file(dir / "summary.json", j);
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (n <= 0) return;
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double timed(const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace lfm::app
