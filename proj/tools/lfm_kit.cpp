#include "lfm/app/config.hpp"
#include "lfm/app/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

namespace {

const char* kExperiments[] = {"tf", "ballistic", "orbit", "custom"};
const char* kStages[] = {"simulate", "filter", "smooth", "fit", "mcmc"};

int run(const std::string& command, const std::string& config_path, const lfm::app::RunOverrides& overrides,
        int rep, const std::string& data) {
  using namespace lfm::app;
  const ExperimentConfig cfg = load_experiment(config_path, overrides);
  if (command == "run") {
    const MetricsReport report = run_experiment(cfg);
    std::fprintf(stderr, "%s: %zu replications in %.2f s -> %s\n", cfg.id.c_str(), report.replications.size(),
                 report.total_seconds(), cfg.out_dir.string().c_str());
    return 0;
  }
  for (const char* id : kExperiments) {
    if (command == id) {
      if (cfg.id != command) {
        throw lfm::ConfigError(config_path + ": experiment.id is '" + cfg.id + "', expected '" + command + "'");
      }
      const MetricsReport report = run_experiment(cfg);
      std::fprintf(stderr, "%s: %zu replications in %.2f s -> %s\n", cfg.id.c_str(), report.replications.size(),
                   report.total_seconds(), cfg.out_dir.string().c_str());
      return 0;
    }
  }
  const double seconds = timed([&] { run_pipeline(parse_stage(command), cfg, rep, data); });
  std::fprintf(stderr, "%s (%s, rep %d) in %.2f s -> %s\n", command.c_str(), cfg.id.c_str(), rep, seconds,
               cfg.out_dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent force model toolkit"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int reps = 0;
  int threads = 0;
  int rep = 0;
  std::string data;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment configuration file")->required();
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--reps", reps, "Replication count")->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  };
  add_common(app.add_subcommand("run", "Run the experiment named in the config"));
  for (const char* id : kExperiments) add_common(app.add_subcommand(id, std::string("Run the ") + id + " experiment"));
  for (const char* stage : kStages) {
    CLI::App* sub = app.add_subcommand(stage, std::string("Pipeline stage: ") + stage);
    add_common(sub);
    sub->add_option("--rep", rep, "Replication index")->check(CLI::NonNegativeNumber);
    sub->add_option("--data", data, "Measurement CSV (default: <out>/measurements.csv)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  lfm::app::RunOverrides overrides;
  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--out") > 0) overrides.out_dir = out;
  if (sub->count("--seed") > 0) overrides.seed = seed;
  if (sub->count("--reps") > 0) overrides.reps = reps;
  if (sub->count("--threads") > 0) overrides.threads = threads;

  try {
    return run(sub->get_name(), config_path, overrides, rep, data);
  } catch (const lfm::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 1;
  } catch (const lfm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
