#include "doctest.h"

#include <array>
#include <cmath>
#include <random>

#include "anova/rng.hpp"
#include "anova/theory_linear.hpp"

using namespace anova;

namespace {

ModelParams random_params(std::mt19937_64& rng, bool with_lambda = true) {
  std::uniform_real_distribution<double> ua(0.3, 3.0);
  std::uniform_real_distribution<double> us(0.0, 1.0);
  std::uniform_real_distribution<double> up(0.05, 1.0);
  std::uniform_real_distribution<double> ud(0.1, 5.0);
  std::uniform_real_distribution<double> ul(std::log(1e-3), std::log(5.0));
  return {ua(rng), us(rng), up(rng), ud(rng),
          with_lambda ? std::exp(ul(rng)) : 0.0};
}

}  // namespace

TEST_CASE("ANOVA components sum to the direct variance formula") {
  auto rng = make_stream(21, 0, 0, Role::data);
  for (int k = 0; k < 300; ++k) {
    const auto p = random_params(rng);
    const auto v = variance_components(p);
    CHECK(std::abs(v.total() - total_variance(p)) < 1e-10);
    CHECK(v.v_l == 0.0);
    CHECK(v.v_li == 0.0);
  }
}

TEST_CASE("all six ordered decompositions reach the same total") {
  auto rng = make_stream(22, 0, 0, Role::data);
  const std::array<Source, 3> orders[6] = {
      {Source::s, Source::l, Source::i}, {Source::s, Source::i, Source::l},
      {Source::l, Source::s, Source::i}, {Source::l, Source::i, Source::s},
      {Source::i, Source::s, Source::l}, {Source::i, Source::l, Source::s}};
  for (int k = 0; k < 100; ++k) {
    const auto p = random_params(rng);
    const double total = total_variance(p);
    for (const auto& ord : orders) {
      const auto d = ordered_decomposition(p, ord);
      CHECK(std::abs(d.term_a + d.term_b + d.term_c - total) < 1e-10);
    }
    // The l-s-i ordered split matches the named variance components.
    const auto r = risk_decomposition(p);
    const auto lsi =
        ordered_decomposition(p, {Source::l, Source::s, Source::i});
    CHECK(lsi.term_a == doctest::Approx(r.sigma_label).epsilon(1e-9));
    CHECK(lsi.term_b == doctest::Approx(r.sigma_sample).epsilon(1e-9));
    CHECK(lsi.term_c == doctest::Approx(r.sigma_init).epsilon(1e-9));
  }
  CHECK_THROWS_AS(
      ordered_decomposition(random_params(rng),
                            {Source::s, Source::s, Source::i}),
      std::invalid_argument);
}

TEST_CASE("mse = bias2 + variance + sigma2") {
  auto rng = make_stream(23, 0, 0, Role::data);
  for (int k = 0; k < 100; ++k) {
    const auto p = random_params(rng);
    const auto r = risk_decomposition(p);
    CHECK(std::abs(r.mse - r.bias2 - r.variance - p.sigma2) < 1e-12);
    CHECK(std::abs(r.variance - total_variance(p)) < 1e-10);
  }
}

TEST_CASE("optimal penalty value and degenerate case") {
  ModelParams p{1.0, 0.09, 0.8, 1.25, 0.0};
  CHECK(optimal_lambda(p) == doctest::Approx(0.3625).epsilon(1e-14));
  ModelParams degenerate{1.0, 0.0, 1.0, 1.0, 0.0};
  CHECK_THROWS_AS(optimal_lambda(degenerate), std::domain_error);
}

TEST_CASE("risk at optimum: closed forms and the bias-variance balance") {
  ModelParams example{1.0, 0.25, 1.0, 1.0, 0.0};
  const auto r = risk_at_optimum(example);
  CHECK(r.mse == doctest::Approx(0.640388).epsilon(1e-5));
  CHECK(r.bias2 == doctest::Approx(0.152403).epsilon(1e-4));
  CHECK(r.variance == doctest::Approx(0.237986).epsilon(1e-4));

  auto rng = make_stream(24, 0, 0, Role::data);
  for (int k = 0; k < 200; ++k) {
    auto p = random_params(rng, false);
    p.sigma2 = std::max(p.sigma2, 0.01);
    const auto ro = risk_at_optimum(p);
    const double bias = std::sqrt(ro.bias2);
    CHECK(std::abs(ro.variance - bias * (std::sqrt(p.alpha2) - bias)) < 1e-10);
    ModelParams q = p;
    q.lambda = optimal_lambda(p);
    const auto rd = risk_decomposition(q);
    CHECK(std::abs(rd.mse - ro.mse) < 1e-10);
    CHECK(std::abs(rd.bias2 - ro.bias2) < 1e-10);
    CHECK(std::abs(rd.variance - ro.variance) < 1e-10);
  }
}

TEST_CASE("added training noise reproduces the two-layer optimum") {
  auto rng = make_stream(25, 0, 0, Role::data);
  for (int k = 0; k < 50; ++k) {
    auto p = random_params(rng, false);
    p.pi = std::min(p.pi, 0.98);
    const double extra = added_noise_delta(p);
    CHECK(extra >= 0.0);
    ModelParams one{p.alpha2, p.sigma2 + extra, 1.0, p.delta, 0.0};
    const double excess_one = risk_at_optimum(one).mse - one.sigma2;
    const double excess_two = risk_at_optimum(p).mse - p.sigma2;
    CHECK(std::abs(excess_one - excess_two) < 1e-9);
  }
}

TEST_CASE("one-layer optimum: variance peak and bias-variance crossing") {
  const auto peak = one_layer_risk(1.0, 0.5);
  CHECK(peak.variance == doctest::Approx(2.0 / (2.0 * std::sqrt(2.0)) - 0.5)
                             .epsilon(1e-10));
  CHECK(peak.bias2 == doctest::Approx(peak.variance).epsilon(1e-10));
  CHECK(one_layer_risk(1.0, 0.4).variance < peak.variance);
  CHECK(one_layer_risk(1.0, 0.6).variance < peak.variance);
  CHECK(std::abs(peak.mse - peak.bias2 - peak.variance) < 1e-12);
}

TEST_CASE("label-noise component scales with sigma2") {
  ModelParams p{1.0, 0.25, 0.7, 1.5, 0.2};
  ModelParams q = p;
  q.sigma2 = 4.0 * p.sigma2;
  CHECK(risk_decomposition(q).sigma_label ==
        doctest::Approx(4.0 * risk_decomposition(p).sigma_label)
            .epsilon(1e-12));
  CHECK(risk_decomposition(q).bias2 ==
        doctest::Approx(risk_decomposition(p).bias2).epsilon(1e-12));
}

TEST_CASE("fixed-lambda bias grows with the penalty") {
  ModelParams p{1.0, 0.09, 0.8, 1.25, 0.0};
  double prev = -1.0;
  for (double la : {0.01, 0.05, 0.2, 1.0, 5.0}) {
    p.lambda = la;
    const double b = risk_decomposition(p).bias2;
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("near-interpolation divergence: v_si grows like 1/sqrt(lambda)") {
  const double pi = 0.8;
  ModelParams p{1.0, 0.09, pi, 1.0 / pi, 0.0};
  double scaled[3];
  const double lambdas[3] = {1e-3, 1e-4, 1e-5};
  for (int i = 0; i < 3; ++i) {
    p.lambda = lambdas[i];
    scaled[i] = variance_components(p).v_si * std::sqrt(lambdas[i]);
  }
  CHECK(std::abs(scaled[1] / scaled[0] - 1.0) < 0.1);
  CHECK(std::abs(scaled[2] / scaled[1] - 1.0) < 0.1);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(variance_components(ModelParams{1.0, 0.1, 1.2, 1.0, 0.1}),
                  std::domain_error);
  CHECK_THROWS_AS(variance_components(ModelParams{1.0, 0.1, 0.5, -1.0, 0.1}),
                  std::domain_error);
  CHECK_THROWS_AS(risk_decomposition(ModelParams{1.0, 0.1, 0.5, 1.0, 0.0}),
                  std::domain_error);
}
