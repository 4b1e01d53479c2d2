#include "lfm/cdgauss.hpp"
#include "lfm/linalg.hpp"
#include "lfm/models/ballistic.hpp"
#include "lfm/models/tf.hpp"
#include "lfm/ssm.hpp"

#include <doctest.h>

#include <cmath>

using namespace lfm;

namespace {

MechanisticModel scalar_decay() {
  MechanisticModel mech;
  mech.dim_x = 1;
  mech.n_forces = 1;
  mech.drift = [](const Vec& x, const Vec& u, double) -> Vec { return -x + u; };
  return mech;
}

}  // namespace

TEST_CASE("augmented dimensions") {
  models::TfParams tf;
  tf.basal = Vec::Constant(3, 0.05);
  tf.decay = Vec::Ones(3);
  tf.initial = Vec::Zero(3);
  tf.sensitivity = Mat::Ones(3, 1);
  const AugmentedModel a = augment(models::tf_mechanistic(tf), {matern_to_sde(make_matern(1.5, 1.0, 2.0))});
  CHECK(a.dim == 5);

  const AugmentedModel b = augment(models::ballistic_mechanistic({}), {matern_to_sde(make_matern(2.5, 50.0, 5.0))});
  CHECK(b.dim == 5);

  MechanisticModel none;
  none.dim_x = 2;
  none.n_forces = 0;
  none.drift = [](const Vec& x, const Vec& u, double) -> Vec {
    CHECK(u.size() == 0);
    return Vec::Constant(2, x.sum());
  };
  const AugmentedModel c = augment(none, {});
  CHECK(c.dim == 2);
  Vec x(2);
  x << 1.0, 2.0;
  CHECK(c.drift(x, 0.0) == Vec::Constant(2, 3.0));
}

TEST_CASE("coupling mismatches are rejected") {
  const LtiSde force = matern_to_sde(make_matern(0.5, 1.0, 1.0));
  CHECK_THROWS_AS(augment(scalar_decay(), {force, force}), DimensionError);
  CHECK_THROWS_AS(augment(scalar_decay(), {force}, {}), DimensionError);
  // Two blocks summed into the single input is allowed.
  const AugmentedModel sum = augment(scalar_decay(), {force, force}, {0, 0});
  CHECK(sum.dim == 3);
  Vec x(3);
  x << 0.0, 0.25, 0.5;
  CHECK(sum.drift(x, 0.0)(0) == doctest::Approx(0.75));
}

TEST_CASE("force blocks ignore the output states") {
  const AugmentedModel model = augment(models::ballistic_mechanistic({}),
                                       {matern_to_sde(make_matern(2.5, 50.0, 5.0))});
  Vec x(5);
  x << 60000.0, 2900.0, 3.0, -1.0, 0.5;
  const Vec base = model.drift(x, 0.0);
  Vec perturbed = x;
  perturbed(0) += 1234.0;
  perturbed(1) -= 50.0;
  const Vec other = model.drift(perturbed, 0.0);
  CHECK(base.tail(3) == other.tail(3));
  CHECK(base(0) != other(0));
}

TEST_CASE("initial state is block diagonal with stationary force blocks") {
  MechanisticModel empty;
  empty.drift = [](const Vec&, const Vec&, double) -> Vec { return Vec(0); };
  empty.n_forces = 1;
  const AugmentedModel only_force = augment(empty, {matern_to_sde(make_matern(0.5, 1.0, 1.0))});
  const GaussianState s0 = initial_state(only_force, Vec(0), Mat(0, 0));
  CHECK(s0.m.size() == 1);
  CHECK(s0.m(0) == 0.0);
  CHECK(s0.P(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  MechanisticModel one = scalar_decay();
  one.n_forces = 0;
  const AugmentedModel plain = augment(one, {});
  const GaussianState s1 = initial_state(plain, Vec::Constant(1, 3.0), Mat::Constant(1, 1, 4.0));
  CHECK(s1.P(0, 0) == 4.0);
  CHECK(s1.m(0) == 3.0);

  models::TfParams tf;
  tf.basal = Vec::Constant(3, 0.05);
  tf.decay = Vec::Ones(3);
  tf.initial = Vec::Zero(3);
  tf.sensitivity = Mat::Ones(3, 1);
  const AugmentedModel tfm = augment(models::tf_mechanistic(tf), {matern_to_sde(make_matern(1.5, 1.0, 2.0))});
  const GaussianState s2 = initial_state(tfm, Vec::Zero(3), 0.01 * Mat::Identity(3, 3));
  CHECK(s2.P.rows() == 5);
  CHECK(s2.P(3, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s2.P(4, 4) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(s2.P.topRightCorner(3, 2).isZero());
  CHECK(std::abs(s2.P(3, 4)) < 1e-12);

  Mat bad(1, 1);
  bad << -1.0;
  CHECK_THROWS_AS(initial_state(plain, Vec::Zero(1), bad), ConfigError);
  CHECK_THROWS_AS(initial_state(plain, Vec::Zero(2), Mat::Identity(2, 2)), DimensionError);
}

TEST_CASE("noise-free linear simulation follows the matrix exponential") {
  Mat F(2, 2);
  F << -0.5, 1.0, -1.0, -0.3;
  const AugmentedModel model = AugmentedModel::linear(F, Mat::Zero(2, 1), Vec::Zero(1));
  Vec x0(2);
  x0 << 1.0, -0.5;
  const Trajectory traj = simulate(model, x0, {0.0, 1.0, 2.0}, 3u, 20000);
  for (int k = 0; k < 3; ++k) {
    const Vec expected = expm(F * k) * x0;
    CHECK((traj.states.col(k) - expected).cwiseAbs().maxCoeff() < 1e-4);
  }

  const AugmentedModel still = AugmentedModel::linear(Mat::Zero(2, 2), Mat::Zero(2, 1), Vec::Zero(1));
  const Trajectory flat = simulate(still, x0, {0.0, 0.5, 3.0}, 3u);
  CHECK(flat.states.col(2) == x0);
}

TEST_CASE("OU simulation visits its stationary variance") {
  const LtiSde ou = matern_to_sde(make_matern(0.5, 1.0, 1.0));
  const AugmentedModel model = AugmentedModel::linear(ou.F, ou.L, ou.q);
  std::vector<double> times;
  for (int i = 0; i <= 5000; ++i) times.push_back(0.01 * i);
  double mean_var = 0.0;
  const int paths = 40;
  for (int p = 0; p < paths; ++p) {
    const Trajectory traj = simulate(model, Vec::Zero(1), times, derive_seed(99, p), 10);
    const auto& row = traj.states.row(0);
    const double mu = row.mean();
    mean_var += (row.array() - mu).square().mean();
  }
  mean_var /= paths;
  CHECK(mean_var > 0.9);
  CHECK(mean_var < 1.1);
}

TEST_CASE("simulation is deterministic given the seed") {
  const AugmentedModel model = augment(models::ballistic_mechanistic({}),
                                       {matern_to_sde(make_matern(2.5, 50.0, 5.0))});
  Vec x0 = Vec::Zero(5);
  x0(0) = 65000.0;
  x0(1) = 3000.0;
  std::vector<double> times{0.0, 1.0, 2.0, 3.0};
  const Trajectory a = simulate(model, x0, times, 42u);
  const Trajectory b = simulate(model, x0, times, 42u);
  const Trajectory c = simulate(model, x0, times, 43u);
  CHECK(a.states == b.states);
  CHECK(a.states != c.states);
}

TEST_CASE("simulation validates its grid and reports blow-ups") {
  const AugmentedModel model = AugmentedModel::linear(Mat::Identity(1, 1) * 800.0, Mat::Zero(1, 1), Vec::Zero(1));
  CHECK_THROWS_AS(simulate(model, Vec::Ones(1), {0.0, 0.0}, 1u), ConfigError);
  try {
    simulate(model, Vec::Ones(1), {0.0, 10.0}, 1u, 200);
    FAIL("expected a divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() <= 10.0);
  }
}

TEST_CASE("residual force noise enters through the input gain") {
  ResonatorSpec spec;
  spec.f0 = 0.1;
  spec.n_harmonics = 1;
  spec.q_per_harmonic = {0.0};
  spec.q_eps = 0.5;
  const LtiSde res = resonator_to_sde(spec);
  MechanisticModel mech = scalar_decay();
  mech.input_gain = [](const Vec& x, double) -> Mat { return Mat::Constant(1, 1, 2.0 + x(0)); };
  mech.state_dependent_dispersion = true;
  const AugmentedModel model = augment(mech, {res});
  CHECK(model.noise_dim() == 2);
  CHECK(model.q(1) == 0.5);
  Vec x = Vec::Zero(3);
  x(0) = 1.0;
  const Mat L = model.dispersion(x, 0.0);
  CHECK(L(0, 1) == 3.0);
  CHECK(L(2, 0) == 1.0);

  mech.input_gain = nullptr;
  CHECK_THROWS_AS(augment(mech, {res}), ConfigError);
}

TEST_CASE("linear ensemble matches predicted moments") {
  const AugmentedModel model = augment(scalar_decay(), {matern_to_sde(make_matern(0.5, 1.0, 0.5))});
  Vec m0(2);
  m0 << 1.5, -0.5;
  Mat P0(2, 2);
  P0 << 0.2, 0.05, 0.05, 0.3;
  const double T = 1.5;
  const PredictStep pred = predict(model, {0.0, m0, P0}, T, 50);
  const Vec& m = pred.predicted.m;
  const Mat& P = pred.predicted.P;

  const int n = 4000;
  Rng rng(2024);
  Mat ends(2, n);
  for (int i = 0; i < n; ++i) {
    const Vec x0 = sample_gaussian(m0, P0, rng);
    ends.col(i) = simulate(model, x0, {0.0, T}, rng, 600).states.col(1);
  }
  const Vec mean = ends.rowwise().mean();
  const Mat dev = ends.colwise() - mean;
  const Mat cov = dev * dev.transpose() / (n - 1);
  for (Eigen::Index i = 0; i < 2; ++i) {
    CAPTURE(i);
    CHECK(std::abs(mean(i) - m(i)) < 3.0 * std::sqrt(P(i, i) / n));
    CHECK(std::abs(cov(i, i) - P(i, i)) < 3.0 * P(i, i) * std::sqrt(2.0 / (n - 1)));
  }
  CHECK(std::abs(cov(0, 1) - P(0, 1)) < 3.0 * std::sqrt((P(0, 0) * P(1, 1) + P(0, 1) * P(0, 1)) / n));
}
