#include "slr/affinity.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace slr;

TEST_CASE("cosine_affinity basics") {
  Eigen::MatrixXd e(2, 2);
  e << 3, 4, 3, 4;
  auto a = cosine_affinity(e);
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 0) == 1.0);
  CHECK(a(0, 0) == 0.0);
  CHECK(a(1, 1) == 0.0);

  e << 1, 0, 0, 1;
  CHECK(cosine_affinity(e)(0, 1) == 0.0);

  e << 1, 0, -1, 0;
  CHECK(cosine_affinity(e)(0, 1) == 1.0);

  Eigen::MatrixXd single(1, 3);
  single << 1, 2, 3;
  CHECK(cosine_affinity(single).isZero());
}

TEST_CASE("cosine_affinity is templated on the scalar") {
  Eigen::MatrixXf e(3, 2);
  e << 1, 0, 1, 1, 0, 2;
  Eigen::MatrixXf a = cosine_affinity(e);
  CHECK(a(0, 1) == doctest::Approx(std::sqrt(0.5f)).epsilon(1e-6));
  CHECK(a(0, 2) == 0.0f);
}

TEST_CASE("attenuation_factor: stepwise and polynomial equations") {
  const auto step = AttenuationConfig::stepwise(0.25);
  CHECK(attenuation_factor(10, 0.3, step) == 1.0);
  CHECK(attenuation_factor(5, 3, step) == 0.25);
  CHECK(attenuation_factor(0.5, 0.9, step) == 0.00390625);
  CHECK(attenuation_factor(8, 0.1, step) == 1.0);  // inclusive lower bound
  CHECK(attenuation_factor(1, 0.1, step) == 0.25 * 0.25 * 0.25);

  CHECK(attenuation_factor(4, 1, AttenuationConfig::polynomial(1)) == 0.5);
  CHECK(attenuation_factor(4, 1, AttenuationConfig::polynomial(2)) == 0.25);
  for (double beta : {0.0, 1.0, 3.5, 16.0}) CHECK(attenuation_factor(9, 1, AttenuationConfig::polynomial(beta)) == 1.0);
  CHECK(attenuation_factor(6, 1, AttenuationConfig::polynomial(1, 12.0)) == 0.5);

  CHECK(attenuation_factor(0.1, 0.2, AttenuationConfig::none()) == 1.0);
}

TEST_CASE("attenuation_factor is monotone in the longer duration") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> alpha(0.0, 1.0), beta(0.0, 20.0), dur(0.01, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    const AttenuationConfig cfgs[] = {AttenuationConfig::stepwise(alpha(rng)), AttenuationConfig::polynomial(beta(rng))};
    for (const auto& cfg : cfgs) {
      double a = dur(rng), b = dur(rng);
      if (a > b) std::swap(a, b);
      const double ca = attenuation_factor(a, 0.001, cfg), cb = attenuation_factor(b, 0.001, cfg);
      CHECK(ca <= cb);
      CHECK(ca >= 0.0);
      CHECK(cb <= 1.0);
    }
  }
}

TEST_CASE("attenuate preserves structure and bounds") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> dur(0.2, 12.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 9;
    Eigen::MatrixXd e(n, 4);
    for (auto& v : e.reshaped()) v = gauss(rng);
    Eigen::VectorXd t(n);
    for (auto& v : t) v = dur(rng);
    const auto a = cosine_affinity(e);
    for (const auto& cfg : {AttenuationConfig::stepwise(0.3), AttenuationConfig::polynomial(2.0)}) {
      const auto att = attenuate(a, t, cfg);
      CHECK(att == att.transpose());
      CHECK(att.diagonal().isZero(0.0));
      CHECK((att.array() >= 0.0).all());
      CHECK((att.array() <= a.array()).all());
      CHECK((a.array() <= 1.0).all());
    }
    // Identity settings.
    CHECK(attenuate(a, t, AttenuationConfig::stepwise(1.0)) == a);
    CHECK(attenuate(a, t, AttenuationConfig::polynomial(0.0)) == a);
    CHECK(attenuate(a, t, AttenuationConfig::none()) == a);

    // alpha = 0 with every segment under 8 s removes every edge.
    Eigen::VectorXd short_t = t.cwiseMin(7.99);
    CHECK(attenuate(a, short_t, AttenuationConfig::stepwise(0.0)).isZero(0.0));

    // Scale and sign invariance of the cosine affinity.
    Eigen::MatrixXd scaled = e;
    scaled.row(0) *= -3.7;
    CHECK(cosine_affinity(scaled).isApprox(a, 1e-12));
  }
}

TEST_CASE("attenuate rejects mismatched durations") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd t(2);
  t << 1, 2;
  CHECK_THROWS_AS(attenuate(a, t, AttenuationConfig::stepwise(0.5)), ValidationError);
}

TEST_CASE("parse_attenuation") {
  CHECK(parse_attenuation("none").mode == AttenuationMode::none);
  auto s = parse_attenuation("step:0.25");
  CHECK(s.mode == AttenuationMode::stepwise);
  CHECK(s.alpha == 0.25);
  auto p = parse_attenuation("poly:4");
  CHECK(p.mode == AttenuationMode::polynomial);
  CHECK(p.beta == 4.0);
  CHECK(p.knee == 8.0);
  CHECK_THROWS_AS(parse_attenuation("step:1.5"), ValidationError);
  CHECK_THROWS_AS(parse_attenuation("poly:-1"), ValidationError);
  CHECK_THROWS_AS(parse_attenuation("step:"), ValidationError);
  CHECK_THROWS_AS(parse_attenuation("gauss:1"), ValidationError);
  CHECK(to_string(s) == "step:0.25");
}

TEST_CASE("write_matrix_rows dumps decimal rows") {
  Eigen::MatrixXd m(2, 2);
  m << 0, 0.5, 0.5, 0;
  std::ostringstream out;
  write_matrix_rows(m, out);
  CHECK(out.str() == "0 0.5\n0.5 0\n");
}
