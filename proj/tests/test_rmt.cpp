#include "doctest.h"

#include <cmath>
#include <random>

#include "anova/rmt.hpp"
#include "anova/rng.hpp"

using namespace anova;

namespace {

// Quadrature oracle for the resolvent moments: integrate against the bulk
// density sqrt((b-x)(x-a)) / (2 pi gamma x) on [a,b] with the trigonometric
// substitution x = m + h*sin(phi) (which removes the edge singularities),
// plus the point mass max(0, 1 - 1/gamma) at zero.
double moment_oracle(double gamma, double lambda, int power) {
  const double a = (1.0 - std::sqrt(gamma)) * (1.0 - std::sqrt(gamma));
  const double b = (1.0 + std::sqrt(gamma)) * (1.0 + std::sqrt(gamma));
  const double m = 0.5 * (a + b), h = 0.5 * (b - a);
  const double pi = std::acos(-1.0);
  const int n = 800000;
  long double sum = 0.0L;
  for (int i = 0; i < n; ++i) {
    const double phi = -pi / 2 + pi * (i + 0.5) / n;
    const double x = m + h * std::sin(phi);
    const double w = h * h * std::cos(phi) * std::cos(phi);
    sum += w / (2.0 * pi * gamma * x * std::pow(x + lambda, power));
  }
  double val = static_cast<double>(sum * pi / n);
  if (gamma > 1.0) val += (1.0 - 1.0 / gamma) / std::pow(lambda, power);
  return val;
}

}  // namespace

TEST_CASE("resolvent moments match closed forms at gamma = lambda = 1") {
  const auto m = resolvent_moments(1.0, 1.0);
  CHECK(m.theta1 == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-14));
  CHECK(m.theta2 == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("resolvent moments match the density quadrature oracle") {
  for (double gamma : {0.3, 1.0, 2.0, 5.0}) {
    for (double lambda : {0.1, 1.0}) {
      const auto m = resolvent_moments(gamma, lambda);
      const double o1 = moment_oracle(gamma, lambda, 1);
      const double o2 = moment_oracle(gamma, lambda, 2);
      CHECK(std::abs(m.theta1 - o1) < 1e-9 * std::max(1.0, std::abs(o1)));
      CHECK(std::abs(m.theta2 - o2) < 1e-9 * std::max(1.0, std::abs(o2)));
    }
  }
}

TEST_CASE("quadratic identities hold across the parameter box") {
  auto rng = make_stream(7, 0, 0, Role::data);
  std::uniform_real_distribution<double> ug(0.05, 20.0);
  std::uniform_real_distribution<double> ul(std::log(1e-4), std::log(10.0));
  for (int k = 0; k < 2000; ++k) {
    const auto m = resolvent_moments(ug(rng), std::exp(ul(rng)));
    // Residuals scale with the size of the cancelling terms, so measure them
    // relative to that size.
    const double g = m.gamma, la = m.lambda;
    const double scale1 = 1.0 + la * g * m.theta1 * m.theta1 +
                          std::abs((la - g + 1.0) * m.theta1);
    const double scale2 = 1.0 + std::abs((g - 1.0) * m.theta1) +
                          2.0 * la * la * g * m.theta1 * m.theta2 +
                          std::abs(la * (la - g + 1.0) * m.theta2);
    CHECK(std::abs(mp_identity1_residual(m)) / scale1 < 1e-10);
    CHECK(std::abs(mp_identity2_residual(m)) / scale2 < 1e-10);
  }
}

TEST_CASE("theta2 is minus the lambda derivative of theta1") {
  for (double gamma : {0.2, 1.0, 3.0}) {
    for (double lambda : {1e-3, 0.05, 1.0, 5.0}) {
      const double h = 3e-4 * lambda;
      const double fd = -(resolvent_moments(gamma, lambda + h).theta1 -
                          resolvent_moments(gamma, lambda - h).theta1) /
                        (2.0 * h);
      const auto m = resolvent_moments(gamma, lambda);
      CHECK(std::abs(fd - m.theta2) / m.theta2 < 1e-5);
    }
  }
}

TEST_CASE("adjusted penalty: closed value, root residual, ordering") {
  const auto a = adjusted_penalty(0.8, 1.25, 0.01);
  CHECK(a.lambda_tilde == doctest::Approx(0.0362812).epsilon(1e-4));
  CHECK(std::abs(adjusted_penalty_residual(a)) < 1e-12);
  CHECK(a.lambda_tilde > a.lambda);

  const auto full = adjusted_penalty(1.0, 2.0, 0.3);
  CHECK(full.lambda_tilde == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("fixed point agrees with the adjusted penalty for any split") {
  auto rng = make_stream(11, 0, 0, Role::data);
  std::uniform_real_distribution<double> upi(0.05, 1.0);
  std::uniform_real_distribution<double> ude(0.1, 5.0);
  std::uniform_real_distribution<double> ula(std::log(1e-3), std::log(5.0));
  for (int k = 0; k < 50; ++k) {
    const double pi = upi(rng), de = ude(rng), la = std::exp(ula(rng));
    const auto adj = adjusted_penalty(pi, de, la);
    for (double t : {0.25, 0.5, 0.75}) {
      const auto fp = solve_fixed_point(pi, de, t * la, (1.0 - t) * la);
      CHECK(fp.e_bar > 0.0);
      CHECK(fp.e_bar <= 1.0);
      CHECK(std::abs(t * la + (1.0 - t) * la / fp.e_bar - adj.lambda_tilde) <
            1e-8);
    }
  }
}

TEST_CASE("fixed point at pi = 1 is explicit") {
  const auto fp = solve_fixed_point(1.0, 2.0, 0.1, 0.4);
  CHECK(fp.e_bar == 1.0);
  const double expect = 1.0 - 0.4 * resolvent_moments(2.0, 0.5).theta1;
  CHECK(fp.e == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("domain validation") {
  CHECK_THROWS_AS(resolvent_moments(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(resolvent_moments(1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(adjusted_penalty(1.5, 1.0, 0.1), std::domain_error);
  CHECK_THROWS_AS(solve_fixed_point(0.5, 1.0, 0.0, 0.1), std::domain_error);
}
