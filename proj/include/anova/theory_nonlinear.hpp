#ifndef ANOVA_THEORY_NONLINEAR_HPP
#define ANOVA_THEORY_NONLINEAR_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

#include "anova/activation.hpp"
#include "anova/rmt.hpp"
#include "anova/theory_linear.hpp"

// Asymptotic risk of the two-layer network with a zero-mean nonlinear
// activation after the Haar orthogonal first layer. Valid for Gaussian data;
// the resolvent moments enter at penalty lambda/v.

namespace anova {

struct NonlinearRisk {
  double bias2;
  double variance;
  double mse;  // bias2 + variance + sigma2
  double lambda_star;
};

inline double optimal_lambda_nl(const ModelParams& p,
                                const ActivationSpec& act) {
  p.validate(false);
  const double mu = act.mu(), v = act.v();
  if (mu == 0.0)
    throw std::domain_error("optimal_lambda_nl: mu = 0 is degenerate");
  return (v * v / (mu * mu)) *
         (p.delta * (1.0 - p.pi + p.sigma2 / p.alpha2) +
          (v - mu * mu) * p.gamma() / v);
}

inline NonlinearRisk nonlinear_risk(const ModelParams& p,
                                    const ActivationSpec& act) {
  p.validate();
  const double mu = act.mu(), v = act.v();
  const double mu2 = mu * mu;
  const double g = p.gamma(), la = p.lambda, pi = p.pi, de = p.delta;
  const auto m = resolvent_moments(g, la / v);
  const double t1 = m.theta1, t2 = m.theta2;
  const double a2 = p.alpha2, s2 = p.sigma2;

  // Shared tail (v - mu^2) * (gamma/v * t1 + 1/v - lambda*gamma/v^2 * t2).
  const double nl_tail =
      (v - mu2) * (g / v * t1 + 1.0 / v - la * g / (v * v) * t2);
  const double label_term = s2 * g * (t1 - la / v * t2);
  const double bias_core = pi * mu2 / v * (1.0 - la / v * t1) - 1.0;

  NonlinearRisk r{};
  r.mse = a2 * pi *
              (1.0 / pi - 1.0 + de * (1.0 - pi) * t1 +
               la / v * (la * mu2 / (v * v) - de * (1.0 - pi)) * t2 + nl_tail) +
          label_term + s2;
  r.bias2 = a2 * bias_core * bias_core;
  const double shrink = 1.0 - la / v * t1;
  r.variance =
      a2 * pi *
          (2.0 * mu2 / v - 1.0 +
           (-2.0 * la * mu2 / (v * v) + de * (1.0 - pi)) * t1 +
           la / v * (la * mu2 / (v * v) - de * (1.0 - pi)) * t2 -
           pi * mu2 * mu2 / (v * v) * shrink * shrink + nl_tail) +
      label_term;
  r.lambda_star = (mu == 0.0) ? std::numeric_limits<double>::quiet_NaN()
                              : optimal_lambda_nl(p, act);
  return r;
}

inline NonlinearRisk nonlinear_risk_at_optimum(const ModelParams& p,
                                               const ActivationSpec& act) {
  ModelParams q = p;
  q.lambda = optimal_lambda_nl(p, act);
  return nonlinear_risk(q, act);
}

}  // namespace anova

#endif  // ANOVA_THEORY_NONLINEAR_HPP
