#include "lfm/app/config.hpp"
#include "lfm/app/orbit_experiment.hpp"
#include "lfm/app/pipeline.hpp"
#include "lfm/app/tf_experiment.hpp"
#include "lfm/io.hpp"

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace lfm;
using namespace lfm::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lfm_test_app_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

int kit(const std::string& args) {
  const char* bin = std::getenv("LFM_KIT_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "LFM_KIT_BIN is not set");
  const std::string cmd = std::string(bin) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string config_path(const std::string& name) { return std::string(LFM_SOURCE_DIR) + "/configs/" + name; }

const char* kSmallTf = R"(
[experiment]
id = tf
seed = 5
reps = 3

[tf]
rows = saturation:1, exponential:1
write_replications = 2
)";

}  // namespace

TEST_CASE("config parsing") {
  const Config c = Config::parse(R"(
# comment
[a]
x = 2.5
n = 7
flag = true
list = 1, 2,3
names = a, b
empty =
)",
                                 "inline");
  CHECK(c.get_double("a.x", 0.0) == 2.5);
  CHECK(c.get_int("a.n", 0) == 7);
  CHECK(c.get_bool("a.flag", false));
  CHECK(c.get_doubles("a.list", {}) == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(c.get_strings("a.names", {}) == std::vector<std::string>{"a", "b"});
  CHECK(c.get_double("a.missing", -1.0) == -1.0);
  CHECK_THROWS_AS(c.require_double("a.missing"), ConfigError);
  CHECK_THROWS_AS(c.require_string("a.empty"), ConfigError);

  const Config bad = Config::parse("[a]\nx = abc\nn = 1.5\nflag = maybe\n", "inline");
  CHECK_THROWS_AS(bad.get_double("a.x", 0.0), ConfigError);
  CHECK_THROWS_AS(bad.get_int("a.n", 0), ConfigError);
  CHECK_THROWS_AS(bad.get_bool("a.flag", false), ConfigError);

  try {
    Config::parse("[a]\nx = 1\nnot a key value line\n", "broken.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("broken.cfg:3") != std::string::npos);
  }
}

TEST_CASE("experiment config validation and output precedence") {
  CHECK_THROWS_AS(make_experiment(Config::parse("[experiment]\nid = tf\n")), ConfigError);
  CHECK_THROWS_AS(make_experiment(Config::parse("[experiment]\nid = nope\nseed = 1\n")), ConfigError);
  CHECK_THROWS_AS(make_experiment(Config::parse("[experiment]\nid = tf\nseed = 1\nreps = 0\n")), ConfigError);
  CHECK_THROWS_AS(load_experiment("/nonexistent/lfm.cfg"), ConfigError);

  const Config raw = Config::parse("[experiment]\nid = tf\nseed = 1\nout = from_file\n");
  CHECK(make_experiment(raw).out_dir == fs::path("from_file"));
  RunOverrides o;
  o.out_dir = "from_cli";
  o.seed = 99;
  o.reps = 4;
  const ExperimentConfig cfg = make_experiment(raw, o);
  CHECK(cfg.out_dir == fs::path("from_cli"));
  CHECK(cfg.seed == 99);
  CHECK(cfg.reps == 4);

  ::setenv("LFM_KIT_OUT", "/tmp/env_out", 1);
  CHECK(make_experiment(Config::parse("[experiment]\nid = tf\nseed = 1\n")).out_dir == fs::path("/tmp/env_out/tf"));
  ::unsetenv("LFM_KIT_OUT");
  CHECK(make_experiment(Config::parse("[experiment]\nid = tf\nseed = 1\n")).out_dir == fs::path("out/tf"));
}

TEST_CASE("shipped configs load") {
  for (const std::string name : {"tf.cfg", "ballistic.cfg", "orbit.cfg", "custom.cfg"}) {
    CAPTURE(name);
    const ExperimentConfig cfg = load_experiment(config_path(name));
    CHECK(make_scenario(cfg, 0) != nullptr);
  }
  const ExperimentConfig tf = load_experiment(config_path("tf.cfg"));
  const TfSettings s = TfSettings::from(tf.raw, tf.substeps);
  CHECK(s.rows.size() == 5);
  CHECK(s.grid_points == 363);
  CHECK(s.n_obs == 13);
}

TEST_CASE("setting validation") {
  const auto tf_with = [](const std::string& line) {
    return make_experiment(Config::parse("[experiment]\nid = tf\nseed = 1\n[tf]\n" + line + "\n"));
  };
  CHECK_THROWS_AS(make_scenario(tf_with("rows = sigmoid:1"), 0), ConfigError);
  CHECK_THROWS_AS(make_scenario(tf_with("noise_std = -1"), 0), ConfigError);
  CHECK_THROWS_AS(make_scenario(tf_with("nu = 2"), 0), ConfigError);
  CHECK_THROWS_AS(make_scenario(tf_with("rows = saturation:1\n[pipeline]\nrow = 3"), 0), ConfigError);
  const auto orbit = make_experiment(
      Config::parse("[experiment]\nid = orbit\nseed = 1\n[orbit]\ngravity_file = /nonexistent/gravity.txt\n"));
  CHECK_THROWS_AS(make_scenario(orbit, 0), ConfigError);
}

TEST_CASE("csv errors name the line") {
  std::istringstream in("t,y0\n# note\n0.5,1\n1.0,x\n");
  try {
    io::parse_csv(in, "data.csv");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("data.csv:4") != std::string::npos);
  }
  std::istringstream short_row("t,y0,y1\n0.5,1,2\n1.0,3\n");
  CHECK_THROWS_WITH_AS(io::parse_csv(short_row, "d.csv"), doctest::Contains("d.csv:3"), ConfigError);

  std::istringstream decreasing("t,y0\n1,0.1\n0.5,0.2\n");
  const io::CsvTable table = io::parse_csv(decreasing, "dec.csv");
  CHECK_THROWS_AS(io::observations_from_table(table, "dec.csv"), ConfigError);

  std::istringstream partial("t,y0,y1\n1,0.1,\n");
  CHECK_THROWS_AS(io::observations_from_table(io::parse_csv(partial, "p.csv"), "p.csv"), ConfigError);
}

TEST_CASE("csv round trip and schemas") {
  Trajectory traj;
  traj.times = {0.0, 0.1, 1.0 / 3.0};
  traj.states = Mat::Random(2, 3);
  const io::CsvTable t = io::trajectory_table(traj);
  CHECK(t.header == std::vector<std::string>{"t", "x0", "x1"});
  std::ostringstream out;
  io::write_csv(out, t);
  std::istringstream in(out.str());
  const Trajectory back = io::trajectory_from_table(io::parse_csv(in, "traj"), "traj");
  CHECK(back.times == traj.times);
  CHECK(back.states == traj.states);

  std::vector<Observation> data{{0.5, std::nullopt}, {1.0, Vec::Constant(2, 0.25)}};
  const io::CsvTable o = io::observations_table(data, 2);
  CHECK(o.header == std::vector<std::string>{"t", "y0", "y1"});
  std::ostringstream oo;
  io::write_csv(oo, o);
  CHECK(oo.str() == "t,y0,y1\n0.5,,\n1,0.25,0.25\n");
  std::istringstream oi(oo.str());
  const auto parsed = io::observations_from_table(io::parse_csv(oi, "obs"), "obs");
  REQUIRE(parsed.size() == 2);
  CHECK(!parsed[0].y);
  CHECK(parsed[1].y->isApprox(Vec::Constant(2, 0.25)));

  const auto scenario = make_scenario(load_experiment(config_path("ballistic.cfg")), 0);
  const SyntheticRun run = scenario->simulate();
  const FilterResult fr = run_filter(*scenario, scenario->true_parameters(), run.data);
  CHECK(io::filter_table(fr, 1).header ==
        std::vector<std::string>{"t", "m_0", "m_1", "m_2", "m_3", "m_4", "diagP_0", "diagP_1", "diagP_2", "diagP_3",
                                 "diagP_4", "y_0", "mu_0", "S_diag_0"});
  CHECK(io::smoother_table(smooth(fr)).header ==
        std::vector<std::string>{"t", "m_0", "m_1", "m_2", "m_3", "m_4", "diagP_0", "diagP_1", "diagP_2", "diagP_3",
                                 "diagP_4"});
  const auto summary = io::run_summary(fr.loglik, fr.steps.size(), false);
  CHECK(summary.contains("loglik"));
  CHECK(summary.contains("n_steps"));
  CHECK(summary.contains("diverged"));
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("exit");
  CHECK(kit("--help") == 0);
  CHECK(kit("") == 2);
  CHECK(kit("filter") == 2);
  CHECK(kit("run --config " + (dir / "missing.cfg").string()) == 2);

  spit(dir / "bad.cfg", "[experiment]\nid = tf\n");
  CHECK(kit("run --config " + (dir / "bad.cfg").string() + " --out " + dir.string()) == 2);
  CHECK(kit("ballistic --config " + config_path("tf.cfg") + " --out " + dir.string()) == 2);

  // Time column not strictly increasing.
  spit(dir / "tf.cfg", kSmallTf);
  spit(dir / "bad.csv", "t,y0,y1,y2\n1,0,0,0\n0.5,0,0,0\n");
  CHECK(kit("filter --config " + (dir / "tf.cfg").string() + " --out " + dir.string() + " --data " +
            (dir / "bad.csv").string()) == 2);
  spit(dir / "malformed.csv", "t,y0,y1,y2\n1,0,0\n");
  CHECK(kit("filter --config " + (dir / "tf.cfg").string() + " --out " + dir.string() + " --data " +
            (dir / "malformed.csv").string()) == 2);

  // Near-deterministic gene levels with one RK4 step per leg lose definiteness.
  const fs::path div = scratch("divergence");
  spit(div / "tf.cfg", std::string(kSmallTf) + "x0_var = 1e-12\nsubsteps = 1\n");
  CHECK(kit("simulate --config " + (div / "tf.cfg").string() + " --out " + div.string()) == 0);
  CHECK(kit("filter --config " + (div / "tf.cfg").string() + " --out " + div.string()) == 1);
  const auto j = io::read_json_file(div / "filter.json");
  CHECK(j["diverged"] == true);
  CHECK(j["loglik"].is_null());
}

TEST_CASE("simulate then filter reproduces experiment intermediates") {
  const fs::path exp = scratch("tf_experiment");
  const fs::path stages = scratch("tf_stages");
  spit(exp / "tf.cfg", kSmallTf);
  CHECK(kit("run --config " + (exp / "tf.cfg").string() + " --out " + (exp / "out").string()) == 0);
  for (int rep : {0, 1}) {
    const fs::path dir = stages / std::to_string(rep);
    const std::string common = " --config " + (exp / "tf.cfg").string() + " --out " + dir.string() +
                               " --rep " + std::to_string(rep);
    CHECK(kit("simulate" + common) == 0);
    CHECK(kit("smooth" + common) == 0);
    const fs::path ref = exp / "out" / "saturation_1" / ("rep00" + std::to_string(rep));
    for (const std::string f : {"truth.csv", "measurements.csv", "filter.csv", "filter.json", "smoother.csv",
                                "smoother.json"}) {
      CAPTURE(f);
      CHECK(slurp(dir / f) == slurp(ref / f));
    }
  }
}

TEST_CASE("experiment outputs are byte-identical across runs and thread counts") {
  const fs::path dir = scratch("determinism");
  spit(dir / "tf.cfg", kSmallTf);
  const std::string cfg = " --config " + (dir / "tf.cfg").string();
  CHECK(kit("run" + cfg + " --out " + (dir / "a").string()) == 0);
  CHECK(kit("run" + cfg + " --out " + (dir / "b").string() + " --threads 3") == 0);
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), dir / "a");
    CAPTURE(rel.string());
    CHECK(slurp(entry.path()) == slurp(dir / "b" / rel));
    ++files;
  }
  CHECK(files >= 8);
  const std::string header = slurp(dir / "a" / "summary.csv").substr(0, 26);
  CHECK(header == "link,gamma,mean_rmse,n_div");
  CHECK(slurp(dir / "a" / "metrics.csv").rfind("index,label,seed,rmse,state_rmse,coverage,diverged", 0) == 0);

  CHECK(kit("run" + cfg + " --out " + (dir / "c").string() + " --seed 6") == 0);
  CHECK(slurp(dir / "a" / "metrics.csv") != slurp(dir / "c" / "metrics.csv"));
}

TEST_CASE("fit on linear-Gaussian data recovers the noise level") {
  const fs::path dir = scratch("custom_fit");
  const std::string common = " --config " + config_path("custom.cfg") + " --out " + dir.string();
  CHECK(kit("simulate" + common) == 0);
  CHECK(kit("fit" + common) == 0);
  const auto fit = io::read_json_file(dir / "fit.json");
  const double noise = fit["parameters"]["noise_std"].get<double>();
  CHECK(noise == doctest::Approx(0.2).epsilon(0.2));
  CHECK(kit("mcmc" + common) == 0);
  const auto chain = io::read_json_file(dir / "chain.json");
  CHECK(chain["acceptance_rate"].get<double>() > 0.0);
  CHECK(chain["parameters"].contains("noise_std"));
}

TEST_CASE("orbit predictors agree without an injected force") {
  const Config raw = Config::parse(R"(
[experiment]
id = orbit
seed = 3

[orbit]
obs_days = 0.25
pred_days = 0.5
harmonics = 1, 1, 1
inject_std = 0
inject_bias_std = 0
sigma_pos = 1e-3
sigma_vel = 1e-6
substeps = 20
third_body = 0
srp = 0
)");
  const OrbitSettings s = OrbitSettings::from(raw, 20);
  const OrbitPrediction zero = run_orbit_prediction(OrbitScenario(s, 11));
  CHECK(zero.err_lfm.back() < 0.5);
  CHECK(zero.err_det.back() < 0.5);

  OrbitSettings forced = s;
  forced.inject_std = 3.0;
  forced.inject_bias_std = 3.0;
  const OrbitPrediction with_force = run_orbit_prediction(OrbitScenario(forced, 11));
  CHECK(with_force.err_det.back() > 10.0 * zero.err_det.back());
  CHECK(with_force.err_lfm.back() < with_force.err_det.back());
}
