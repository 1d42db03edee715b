#ifndef ANOVA_RMT_HPP
#define ANOVA_RMT_HPP

#include <cmath>
#include <stdexcept>
#include <string>

// Resolvent moments of the Marchenko-Pastur law and the adjusted penalty
// that arises from partial-orthogonal (Haar) projections.

namespace anova {

template <typename Real = double>
struct ResolventMoments {
  Real gamma;
  Real lambda;
  Real theta1;  // int 1/(x+lambda) dF_gamma(x)
  Real theta2;  // int 1/(x+lambda)^2 dF_gamma(x) = -d theta1 / d lambda
};

template <typename Real = double>
struct AdjustedPenalty {
  Real pi;
  Real delta;
  Real lambda;
  Real lambda_tilde;
  Real theta1_tilde;  // theta1(delta, lambda_tilde)
  Real theta2_tilde;  // theta2(delta, lambda_tilde)
};

template <typename Real = double>
struct FixedPointSolution {
  Real e_bar;  // in (0,1]
  Real e;
  Real lambda1;
  Real lambda2;
  int iterations;
};

// theta1 in the rationalized form 2/(sqrt(D) + lambda + 1 - gamma),
// D = (gamma - 1 - lambda)^2 + 4*lambda*gamma. The subtractive form
// (-lambda+gamma-1+sqrt(D))/(2*lambda*gamma) cancels catastrophically for
// small lambda when gamma <= 1.
template <typename Real>
ResolventMoments<Real> resolvent_moments(Real gamma, Real lambda) {
  if (!(gamma > Real(0)) || !(lambda > Real(0)))
    throw std::domain_error("resolvent_moments: gamma and lambda must be > 0");
  const Real u = gamma - Real(1) - lambda;
  const Real sqrt_d = std::sqrt(u * u + Real(4) * lambda * gamma);
  // Pick whichever equivalent form of the positive quadratic root avoids
  // subtracting nearly equal quantities.
  const Real theta1 = u > Real(0)
                          ? (u + sqrt_d) / (Real(2) * lambda * gamma)
                          : Real(2) / (sqrt_d - u);
  // Differentiating lambda*gamma*t1^2 + (lambda-gamma+1)*t1 - 1 = 0 gives
  // theta2 = t1*(gamma*t1 + 1) / sqrt(D), which stays stable where the
  // explicit 1/lambda^2 form cancels.
  const Real theta2 = theta1 * (gamma * theta1 + Real(1)) / sqrt_d;
  return {gamma, lambda, theta1, theta2};
}

// Residuals of the two quadratic identities satisfied by (theta1, theta2).
template <typename Real>
Real mp_identity1_residual(const ResolventMoments<Real>& m) {
  return m.lambda * m.gamma * m.theta1 * m.theta1 +
         (m.lambda - m.gamma + Real(1)) * m.theta1 - Real(1);
}

template <typename Real>
Real mp_identity2_residual(const ResolventMoments<Real>& m) {
  return Real(1) + (m.gamma - Real(1)) * m.theta1 -
         Real(2) * m.lambda * m.lambda * m.gamma * m.theta1 * m.theta2 -
         m.lambda * (m.lambda - m.gamma + Real(1)) * m.theta2;
}

// lambda_tilde = lambda + (1-pi)/(2*pi) * [lambda + 1 - gamma +
// sqrt((lambda+gamma-1)^2 + 4*lambda)], gamma = pi*delta. The tilde moments
// are taken at aspect ratio delta, not gamma.
template <typename Real>
AdjustedPenalty<Real> adjusted_penalty(Real pi, Real delta, Real lambda) {
  if (!(pi > Real(0)) || pi > Real(1))
    throw std::domain_error("adjusted_penalty: pi must lie in (0,1]");
  if (!(delta > Real(0)) || !(lambda > Real(0)))
    throw std::domain_error("adjusted_penalty: delta and lambda must be > 0");
  const Real gamma = pi * delta;
  const Real s = std::sqrt((lambda + gamma - Real(1)) * (lambda + gamma - Real(1)) +
                           Real(4) * lambda);
  const Real lt = lambda + (Real(1) - pi) / (Real(2) * pi) *
                               (lambda + Real(1) - gamma + s);
  const auto m = resolvent_moments(delta, lt);
  return {pi, delta, lambda, lt, m.theta1, m.theta2};
}

// h(x) whose larger root is lambda_tilde; used as a substitution check.
template <typename Real>
Real adjusted_penalty_residual(const AdjustedPenalty<Real>& a) {
  const Real gamma = a.pi * a.delta;
  const Real x = a.lambda_tilde;
  return a.pi * x * x -
         ((Real(1) + a.pi) * a.lambda + (Real(1) - a.pi) * (Real(1) - gamma)) * x +
         a.lambda * (a.lambda + (Real(1) - a.delta) * (Real(1) - a.pi));
}

// Solves the self-consistent pair
//   e_bar = pi * (e + 1 - e*e_bar)^(-1)
//   e     = (1/e_bar) * [1 - (lambda2/e_bar) * theta1(delta, lambda1 + lambda2/e_bar)]
// by bisection on g(x) = [1 - (lambda2/x) theta1(delta, lambda1+lambda2/x)]
// - (pi-x)/(1-x), which is increasing on (0,1).
template <typename Real>
FixedPointSolution<Real> solve_fixed_point(Real pi, Real delta, Real lambda1,
                                           Real lambda2) {
  if (!(pi > Real(0)) || pi > Real(1))
    throw std::domain_error("solve_fixed_point: pi must lie in (0,1]");
  if (!(delta > Real(0)))
    throw std::domain_error("solve_fixed_point: delta must be > 0");
  if (!(lambda1 > Real(0)) || !(lambda2 > Real(0)))
    throw std::domain_error("solve_fixed_point: lambda1, lambda2 must be > 0");

  if (pi == Real(1)) {
    const Real e = Real(1) -
                   lambda2 * resolvent_moments(delta, lambda1 + lambda2).theta1;
    return {Real(1), e, lambda1, lambda2, 0};
  }

  const auto g = [&](Real x) {
    const Real lt = lambda1 + lambda2 / x;
    return (Real(1) - (lambda2 / x) * resolvent_moments(delta, lt).theta1) -
           (pi - x) / (Real(1) - x);
  };

  constexpr Real eps = Real(1e-12);
  constexpr Real tol = Real(1e-14);
  constexpr int max_iter = 200;
  Real lo = eps, hi = Real(1) - eps;
  Real glo = g(lo), ghi = g(hi);
  if (glo > Real(0) || ghi < Real(0))
    throw std::runtime_error("solve_fixed_point: root not bracketed in (0,1)");
  int it = 0;
  while (hi - lo > tol && it < max_iter) {
    const Real mid = Real(0.5) * (lo + hi);
    if (g(mid) < Real(0))
      lo = mid;
    else
      hi = mid;
    ++it;
  }
  if (hi - lo > tol)
    throw std::runtime_error("solve_fixed_point: no convergence, bracket [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
  const Real e_bar = Real(0.5) * (lo + hi);
  const Real lt = lambda1 + lambda2 / e_bar;
  const Real e = (Real(1) -
                  (lambda2 / e_bar) * resolvent_moments(delta, lt).theta1) /
                 e_bar;
  return {e_bar, e, lambda1, lambda2, it};
}

}  // namespace anova

#endif  // ANOVA_RMT_HPP
