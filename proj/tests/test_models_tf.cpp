#include "lfm/models/tf.hpp"

#include <doctest.h>

#include <cmath>

using namespace lfm;
using namespace lfm::models;

TEST_CASE("link functions") {
  CHECK(tf_link(TfLink::Saturation, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK(tf_link(TfLink::Repression, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK(tf_link(TfLink::Exponential, 1.0, 0.0) == 1.0);
  CHECK(tf_link(TfLink::Saturation, 0.1, 2.0) == doctest::Approx(std::exp(2.0) / (0.1 + std::exp(2.0))));
  CHECK(tf_link(TfLink::Repression, 0.1, 2.0) == doctest::Approx(1.0 / (0.1 + std::exp(2.0))));
  CHECK(tf_link(TfLink::Exponential, 1.0, 100.0) == std::exp(kExpClamp));
}

TEST_CASE("links stay finite and within their ranges") {
  for (double gamma : {0.1, 1.0, 10.0}) {
    for (double u = -800.0; u <= 800.0; u += 7.3) {
      const double s = tf_link(TfLink::Saturation, gamma, u);
      const double r = tf_link(TfLink::Repression, gamma, u);
      const double e = tf_link(TfLink::Exponential, gamma, u);
      CHECK(std::isfinite(s));
      CHECK(std::isfinite(r));
      CHECK(std::isfinite(e));
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
      CHECK(r >= 0.0);
      CHECK(r <= 1.0 / gamma);
      CHECK(e >= 0.0);
      if (std::abs(u) < 30.0) {
        CHECK(s > 0.0);
        CHECK(r > 0.0);
        CHECK(e > 0.0);
      }
    }
  }
}

TEST_CASE("link names") {
  CHECK(parse_tf_link("saturation") == TfLink::Saturation);
  CHECK(parse_tf_link("repression") == TfLink::Repression);
  CHECK(parse_tf_link("exponential") == TfLink::Exponential);
  CHECK(to_string(TfLink::Repression) == "repression");
  CHECK_THROWS_AS(parse_tf_link("hill"), ConfigError);
}

TEST_CASE("TF drift") {
  TfParams p;
  p.basal = Vec::Constant(1, 0.05);
  p.decay = Vec::Ones(1);
  p.initial = Vec::Zero(1);
  p.sensitivity = Mat::Ones(1, 1);
  CHECK(tf_drift(p, Vec::Zero(1), Vec::Zero(1))(0) == doctest::Approx(0.55));
  CHECK(tf_drift(p, Vec::Constant(1, 2.0), Vec::Zero(1))(0) == doctest::Approx(-1.45));

  TfParams multi;
  multi.basal = Vec::Zero(2);
  multi.decay = Vec::Zero(2);
  multi.initial = Vec::Zero(2);
  multi.sensitivity = Mat(2, 2);
  multi.sensitivity << 1.0, 2.0, 0.0, 3.0;
  multi.link = TfLink::Exponential;
  const Vec dx = tf_drift(multi, Vec::Zero(2), Vec::Zero(2));
  CHECK(dx(0) == doctest::Approx(3.0));
  CHECK(dx(1) == doctest::Approx(3.0));
}

TEST_CASE("TF parameter validation") {
  TfParams p;
  p.basal = Vec::Zero(2);
  p.decay = Vec::Ones(3);
  p.initial = Vec::Zero(2);
  p.sensitivity = Mat::Ones(2, 1);
  CHECK_THROWS_AS(p.validate(), DimensionError);
  p.decay = -Vec::Ones(2);
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.decay = Vec::Ones(2);
  p.gamma = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("replication draws follow the stated ranges") {
  Rng rng(7);
  for (int k = 0; k < 20; ++k) {
    const TfParams p = sample_tf_params(3, 1, TfLink::Saturation, 1.0, rng);
    CHECK(p.genes() == 3);
    CHECK(p.forces() == 1);
    CHECK(p.basal.minCoeff() >= 0.0);
    CHECK(p.basal.maxCoeff() <= 0.1);
    CHECK(p.decay.minCoeff() >= 0.0);
    CHECK(p.decay.maxCoeff() <= 2.0);
    CHECK(p.initial.cwiseAbs().maxCoeff() <= 0.1);
    CHECK(p.sensitivity.minCoeff() >= 0.0);
    CHECK(p.sensitivity.maxCoeff() <= 1.0);
  }
}

TEST_CASE("TF mechanistic model") {
  TfParams p;
  p.basal = Vec::Constant(2, 0.01);
  p.decay = Vec::Ones(2);
  p.initial = Vec::Zero(2);
  p.sensitivity = Mat::Constant(2, 1, 0.5);
  const MechanisticModel m = tf_mechanistic(p);
  CHECK(m.dim_x == 2);
  CHECK(m.n_forces == 1);
  CHECK(m.drift(Vec::Zero(2), Vec::Zero(1), 0.0)(0) == doctest::Approx(0.26));
}
