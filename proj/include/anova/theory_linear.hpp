#ifndef ANOVA_THEORY_LINEAR_HPP
#define ANOVA_THEORY_LINEAR_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "anova/rmt.hpp"

// Closed-form asymptotic risk of the two-layer linear network with Haar
// orthogonal first layer and ridge-trained second layer, in the proportional
// regime p/d -> pi, d/n -> delta.

namespace anova {

struct ModelParams {
  double alpha2;  // signal strength, > 0
  double sigma2;  // label-noise variance, >= 0
  double pi;      // lim p/d, in (0,1]
  double delta;   // lim d/n, > 0
  double lambda;  // ridge penalty, > 0 for all closed forms

  double gamma() const { return pi * delta; }

  void validate(bool need_lambda = true) const {
    if (!(alpha2 > 0)) throw std::domain_error("alpha2 must be > 0");
    if (!(sigma2 >= 0)) throw std::domain_error("sigma2 must be >= 0");
    if (!(pi > 0) || pi > 1) throw std::domain_error("pi must lie in (0,1]");
    if (!(delta > 0)) throw std::domain_error("delta must be > 0");
    if (need_lambda && !(lambda > 0))
      throw std::domain_error("lambda must be > 0");
  }
};

// The seven ANOVA terms. s = samples X, l = label noise, i = initialization W.
struct VarianceComponents {
  double v_s, v_l, v_i, v_sl, v_si, v_li, v_sli;

  double total() const { return v_s + v_l + v_i + v_sl + v_si + v_li + v_sli; }
  double get(const std::string& name) const;
};

struct RiskDecomposition {
  double bias2;
  double variance;
  double mse;  // bias2 + variance + sigma2
  double sigma_label, sigma_sample, sigma_init;  // l-s-i ordered split of variance
};

enum class Source { s, l, i };

struct OrderedDecomposition {
  std::array<Source, 3> order;
  double term_a, term_b, term_c;  // sum to the total variance
};

inline VarianceComponents variance_components(const ModelParams& p) {
  p.validate();
  const double g = p.gamma();
  const auto m = resolvent_moments(g, p.lambda);
  const auto a = adjusted_penalty(p.pi, p.delta, p.lambda);
  const double t1 = m.theta1, t2 = m.theta2;
  const double lt = a.lambda_tilde, tt1 = a.theta1_tilde, tt2 = a.theta2_tilde;
  const double one_m_lt1 = 1.0 - p.lambda * t1;
  const double a2 = p.alpha2, s2 = p.sigma2, pi = p.pi, de = p.delta;

  VarianceComponents v{};
  v.v_s = a2 * (1.0 - 2.0 * lt * tt1 + lt * lt * tt2 -
                pi * pi * one_m_lt1 * one_m_lt1);
  v.v_l = 0.0;
  v.v_i = a2 * pi * (1.0 - pi) * one_m_lt1 * one_m_lt1;
  v.v_sl = s2 * de * (tt1 - lt * tt2);
  v.v_li = 0.0;
  v.v_si = a2 * (pi * (1.0 - 2.0 * p.lambda * t1 + p.lambda * p.lambda * t2 +
                       (1.0 - pi) * de * (t1 - p.lambda * t2)) -
                 pi * (1.0 - pi) * one_m_lt1 * one_m_lt1 - 1.0 +
                 2.0 * lt * tt1 - lt * lt * tt2);
  v.v_sli = s2 * de * (pi * (t1 - p.lambda * t2) - (tt1 - lt * tt2));
  return v;
}

inline double total_variance(const ModelParams& p) {
  p.validate();
  const auto m = resolvent_moments(p.gamma(), p.lambda);
  const double t1 = m.theta1, t2 = m.theta2;
  const double la = p.lambda, pi = p.pi, de = p.delta;
  return p.alpha2 * pi *
             (1.0 - pi + (pi - 1.0) * (2.0 * la - de) * t1 -
              pi * la * la * t1 * t1 + la * (la - de + pi * de) * t2) +
         p.sigma2 * pi * de * (t1 - la * t2);
}

inline RiskDecomposition risk_decomposition(const ModelParams& p) {
  p.validate();
  const auto m = resolvent_moments(p.gamma(), p.lambda);
  const double t1 = m.theta1, t2 = m.theta2;
  const double la = p.lambda, pi = p.pi, de = p.delta;
  const double b = 1.0 - pi + la * pi * t1;

  RiskDecomposition r{};
  r.bias2 = p.alpha2 * b * b;
  r.sigma_label = p.sigma2 * pi * de * (t1 - la * t2);
  r.sigma_sample =
      p.alpha2 * pi *
      (-la * la * t1 * t1 + la * la * t2 + (1.0 - pi) * de * (t1 - la * t2));
  const double one_m_lt1 = 1.0 - la * t1;
  r.sigma_init = p.alpha2 * pi * (1.0 - pi) * one_m_lt1 * one_m_lt1;
  r.variance = r.sigma_label + r.sigma_sample + r.sigma_init;
  r.mse = r.bias2 + r.variance + p.sigma2;
  return r;
}

// Sequential decomposition in the order (a,b,c):
//   term_a = V_a + V_ab + V_ac + V_abc, term_b = V_b + V_bc, term_c = V_c.
inline OrderedDecomposition ordered_decomposition(
    const ModelParams& p, const std::array<Source, 3>& order) {
  if (!((order[0] != order[1]) && (order[1] != order[2]) &&
        (order[0] != order[2])))
    throw std::invalid_argument("order must be a permutation of {s,l,i}");
  const auto v = variance_components(p);

  const auto main_effect = [&](Source a) {
    switch (a) {
      case Source::s: return v.v_s;
      case Source::l: return v.v_l;
      default: return v.v_i;
    }
  };
  const auto pair_effect = [&](Source a, Source b) {
    const auto has = [&](Source x) { return a == x || b == x; };
    if (has(Source::s) && has(Source::l)) return v.v_sl;
    if (has(Source::s) && has(Source::i)) return v.v_si;
    return v.v_li;
  };

  OrderedDecomposition d{};
  d.order = order;
  d.term_a = main_effect(order[0]) + pair_effect(order[0], order[1]) +
             pair_effect(order[0], order[2]) + v.v_sli;
  d.term_b = main_effect(order[1]) + pair_effect(order[1], order[2]);
  d.term_c = main_effect(order[2]);
  return d;
}

// lambda* = delta * (1 - pi + sigma2/alpha2); undefined only at pi=1, sigma=0.
inline double optimal_lambda(const ModelParams& p) {
  p.validate(false);
  if (p.pi == 1.0 && p.sigma2 == 0.0)
    throw std::domain_error(
        "optimal_lambda: degenerate at pi=1, sigma=0 (lambda*=0)");
  return p.delta * (1.0 - p.pi + p.sigma2 / p.alpha2);
}

// Closed forms at lambda*. Writing c = delta*(1+sigma2/alpha2)+1 and
// B = (delta*(1-sigma2/alpha2) - 1 + sqrt(c^2-4*gamma)) / (2*delta):
//   Bias^2 = alpha2*B^2, MSE = alpha2*B + sigma2, Var = alpha2*B*(1-B),
// which is the Var = Bias*(alpha - Bias) balance.
inline RiskDecomposition risk_at_optimum(const ModelParams& p) {
  const double la = optimal_lambda(p);
  const double snr = p.sigma2 / p.alpha2;
  const double c = p.delta * (1.0 + snr) + 1.0;
  const double root = std::sqrt(c * c - 4.0 * p.gamma());
  const double b = (p.delta * (1.0 - snr) - 1.0 + root) / (2.0 * p.delta);

  ModelParams q = p;
  q.lambda = la;
  RiskDecomposition r = risk_decomposition(q);
  r.bias2 = p.alpha2 * b * b;
  r.variance = p.alpha2 * b * (1.0 - b);
  r.mse = p.alpha2 * b + p.sigma2;
  return r;
}

// Effective extra training noise that makes the one-layer (pi=1) model match
// the two-layer optimum.
inline double added_noise_delta(const ModelParams& p) {
  p.validate(false);
  const double g = p.gamma();
  if (!(g > 0)) throw std::domain_error("added_noise_delta: gamma must be > 0");
  const double c = p.delta * (1.0 + p.sigma2 / p.alpha2) + 1.0;
  return p.alpha2 * (1.0 - p.pi) * (c + std::sqrt(c * c - 4.0 * g)) / (2.0 * g);
}

// One-layer ridge at its optimal penalty lambda* = gamma/alpha2. The MSE here
// excludes the test-noise floor; the variance is gamma*(theta1 - lambda*theta2).
inline RiskDecomposition one_layer_risk(double alpha2, double gamma) {
  if (!(gamma > 0)) throw std::domain_error("one_layer_risk: gamma must be > 0");
  if (!(alpha2 > 0)) throw std::domain_error("one_layer_risk: alpha2 must be > 0");
  const double la = gamma / alpha2;
  const auto m = resolvent_moments(gamma, la);
  RiskDecomposition r{};
  r.bias2 = alpha2 * la * la * m.theta2;
  r.variance = gamma * (m.theta1 - la * m.theta2);
  r.mse = gamma * m.theta1;
  r.sigma_label = r.sigma_sample = r.sigma_init = 0.0;
  return r;
}

inline double VarianceComponents::get(const std::string& name) const {
  if (name == "v_s") return v_s;
  if (name == "v_l") return v_l;
  if (name == "v_i") return v_i;
  if (name == "v_sl") return v_sl;
  if (name == "v_si") return v_si;
  if (name == "v_li") return v_li;
  if (name == "v_sli") return v_sli;
  throw std::invalid_argument("unknown component: " + name);
}

}  // namespace anova

#endif  // ANOVA_THEORY_LINEAR_HPP
