#include "lfm/cdgauss.hpp"
#include "lfm/estim.hpp"
#include "lfm/gp_sde.hpp"

#include <doctest.h>

#include <cmath>

using namespace lfm;
using namespace lfm::estim;

TEST_CASE("parameter transforms round-trip") {
  ParamSpace space;
  space.add("a", 1e-6, 1e6);
  space.add("b", -5.0, 5.0);
  space.add(Parameter{"c", 0.1, 10.0, Transform::Identity});
  CHECK(space.params()[0].transform == Transform::Log);
  CHECK(space.params()[1].transform == Transform::Identity);
  Vec x(3);
  x << 3.7e-3, -1.25, 2.0;
  const Vec back = space.to_natural(space.to_unconstrained(x));
  CHECK((back - x).cwiseAbs().maxCoeff() <= 1e-12 * x.cwiseAbs().maxCoeff());
  CHECK(space.contains(x));
  x(1) = 7.0;
  CHECK_FALSE(space.contains(x));
  CHECK(space.clamp(x)(1) == 5.0);
  CHECK_THROWS_AS(space.add("bad", 2.0, 1.0), ConfigError);
  CHECK_THROWS_AS(space.add(Parameter{"neg", -1.0, 1.0, Transform::Log}), ConfigError);
}

TEST_CASE("maximize finds the peak of a quadratic bowl") {
  ParamSpace space;
  space.add("x", -10.0, 10.0);
  const MaximizeResult r = maximize([](const Vec& v) { return -(v(0) - 2.0) * (v(0) - 2.0); }, space,
                                    Vec::Zero(1));
  CHECK(std::abs(r.theta(0) - 2.0) < 1e-4);
  CHECK_FALSE(r.on_boundary);
  CHECK(r.evaluations == static_cast<int>(r.best_trace.size()));
  for (std::size_t i = 1; i < r.best_trace.size(); ++i) CHECK(r.best_trace[i] >= r.best_trace[i - 1]);
}

TEST_CASE("maximize handles multiple dimensions and log-scale parameters") {
  ParamSpace space;
  space.add("s", 1e-3, 1e3);
  space.add("m", -5.0, 5.0);
  const auto objective = [](const Vec& v) {
    return -std::pow(std::log(v(0)) - std::log(4.0), 2) - 3.0 * std::pow(v(1) + 1.0, 2);
  };
  Vec start(2);
  start << 1.0, 0.0;
  const MaximizeResult r = maximize(objective, space, start);
  CHECK(r.theta(0) == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(r.theta(1) == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("optimum outside the bounds is clamped and flagged") {
  ParamSpace space;
  space.add("x", 0.0, 1.0);
  const MaximizeResult r = maximize([](const Vec& v) { return -(v(0) - 3.0) * (v(0) - 3.0); }, space,
                                    Vec::Constant(1, 0.5));
  CHECK(r.on_boundary);
  CHECK(r.theta(0) <= 1.0);
  CHECK(r.theta(0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("non-finite objective values are treated as -infinity") {
  ParamSpace space;
  space.add("x", -4.0, 4.0);
  const auto objective = [](const Vec& v) {
    if (v(0) < -1.0) return std::nan("");
    return -(v(0) - 0.5) * (v(0) - 0.5);
  };
  const MaximizeResult r = maximize(objective, space, Vec::Constant(1, 0.0));
  CHECK(r.theta(0) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("OU length scale is recovered from the marginal likelihood") {
  const double ell = 1.0;
  const double noise = 0.1;
  const LtiSde truth = matern_to_sde(make_matern(0.5, 1.0, ell));
  const AugmentedModel tm = AugmentedModel::linear(truth.F, truth.L, truth.q);
  std::vector<double> times{0.0};
  for (int k = 1; k <= 500; ++k) times.push_back(0.5 * k);
  Rng rng(2024);
  const Vec x0 = sample_gaussian(Vec::Zero(1), truth.prior_cov, rng);
  const Trajectory path = simulate(tm, x0, times, rng, 20);
  std::normal_distribution<double> normal;
  std::vector<Observation> data;
  for (std::size_t k = 1; k < times.size(); ++k) {
    data.push_back({times[k], Vec::Constant(1, path.states(0, static_cast<Eigen::Index>(k)) + noise * normal(rng))});
  }
  const ProblemBuilder builder = [noise](const Vec& theta) {
    const LtiSde s = matern_to_sde(make_matern(0.5, 1.0, theta(0)));
    return StateSpaceProblem{AugmentedModel::linear(s.F, s.L, s.q),
                             MeasurementModel::linear(Mat::Identity(1, 1), Mat::Constant(1, 1, noise * noise)),
                             GaussianState{0.0, Vec::Zero(1), s.prior_cov}};
  };
  ParamSpace space;
  space.add("ell", 0.05, 50.0);
  const MaximizeResult r = maximize([&](const Vec& th) { return log_marginal(builder, data, th, 5); }, space,
                                    Vec::Constant(1, 0.7));
  CHECK(std::abs(r.theta(0) - ell) < 0.2 * ell);
}

TEST_CASE("random-walk Metropolis samples a standard normal") {
  ParamSpace space;
  space.add("x", -1e6, 1e6);
  const auto logpost = [](const Vec& v) { return -0.5 * v(0) * v(0); };
  const McmcChain chain = rw_metropolis(logpost, space, Vec::Zero(1), 10000, Vec::Constant(1, 2.4), 5u);
  CHECK(chain.natural.rows() == 10000);
  CHECK(std::abs(chain.mean()(0)) < 0.1);
  CHECK(std::abs(chain.stddev()(0) - 1.0) < 0.1);
  CHECK(chain.acceptance_rate > 0.2);
  CHECK(chain.acceptance_rate < 0.7);

  const McmcChain again = rw_metropolis(logpost, space, Vec::Zero(1), 10000, Vec::Constant(1, 2.4), 5u);
  CHECK(again.natural == chain.natural);
  CHECK(again.acceptance_rate == chain.acceptance_rate);

  const McmcChain tiny = rw_metropolis(logpost, space, Vec::Zero(1), 2000, Vec::Constant(1, 1e-9), 5u);
  CHECK(tiny.acceptance_rate > 0.99);
}

TEST_CASE("Metropolis respects a two-state detailed balance") {
  // Target on the unconstrained scale: mixture of two well separated narrow bumps with 3:1 mass.
  ParamSpace space;
  space.add("x", -10.0, 10.0);
  const auto logpost = [](const Vec& v) {
    const double a = std::log(0.75) - 0.5 * std::pow((v(0) + 1.0) / 0.3, 2);
    const double b = std::log(0.25) - 0.5 * std::pow((v(0) - 1.0) / 0.3, 2);
    const double hi = std::max(a, b);
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
  };
  const McmcChain chain = rw_metropolis(logpost, space, Vec::Zero(1), 40000, Vec::Constant(1, 1.5), 9u);
  double left = 0.0;
  for (Eigen::Index i = 0; i < chain.natural.rows(); ++i) left += chain.natural(i, 0) < 0.0 ? 1.0 : 0.0;
  CHECK(left / static_cast<double>(chain.natural.rows()) == doctest::Approx(0.75).epsilon(0.05));
}

TEST_CASE("Metropolis rejects a non-finite start and stays within bounds") {
  ParamSpace space;
  space.add("x", 0.0, 1.0);
  const auto flat = [](const Vec&) { return 0.0; };
  const McmcChain chain = rw_metropolis(flat, space, Vec::Constant(1, 0.5), 3000, Vec::Constant(1, 0.5), 3u);
  CHECK(chain.natural.minCoeff() >= 0.0);
  CHECK(chain.natural.maxCoeff() <= 1.0);
  const auto broken = [](const Vec&) { return -std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_AS(rw_metropolis(broken, space, Vec::Constant(1, 0.5), 10, Vec::Ones(1), 1u), ConfigError);
}
