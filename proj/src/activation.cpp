#include "anova/activation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace anova {

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials:
// zero diagonal, off-diagonal sqrt(k). Eigenvalues are the nodes; weights are
// the squared first eigenvector components (the N(0,1) weight has total mass 1).
GaussHermiteRule::GaussHermiteRule(int n) {
  if (n < 2) throw std::invalid_argument("GaussHermiteRule: need n >= 2");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(static_cast<double>(k));
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("GaussHermiteRule: eigensolver failed");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double q = es.eigenvectors()(0, i);
    weights[i] = q * q;
  }
}

double GaussHermiteRule::expect(const std::function<double(double)>& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
  return acc;
}

namespace {

// Composite Simpson of f(x) phi(x) over [-12, 12]; the Gaussian tail beyond
// is ~1e-32. Piecewise-smooth integrands (e.g. ReLU kinks) only cost local
// accuracy, which the doubling loop absorbs.
double simpson_expect(const std::function<double(double)>& f, int panels) {
  const double lo = -12.0, hi = 12.0;
  const double h = (hi - lo) / panels;
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const auto g = [&](double x) { return f(x) * c * std::exp(-0.5 * x * x); };
  double acc = g(lo) + g(hi);
  for (int i = 1; i < panels; ++i)
    acc += g(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

double gauss_expect(const std::function<double(double)>& f, int start_nodes,
                    double tol) {
  int n = std::max(2 * ((start_nodes + 1) / 2), 512);
  double prev = simpson_expect(f, n);
  for (int round = 0; round < 10; ++round) {
    n *= 2;
    const double cur = simpson_expect(f, n);
    if (std::abs(cur - prev) < tol) return cur;
    prev = cur;
  }
  throw std::runtime_error("gauss_expect: quadrature did not converge");
}

ActivationSpec ActivationSpec::identity() {
  return ActivationSpec(ActivationKind::identity, "identity",
                        [](double x) { return x; }, 1.0, 1.0);
}

ActivationSpec ActivationSpec::scaled_linear(double k) {
  return ActivationSpec(ActivationKind::scaled_linear,
                        "linear_k=" + std::to_string(k),
                        [k](double x) { return k * x; }, k, k * k);
}

ActivationSpec ActivationSpec::centered_relu() {
  // E max(Z,0) = 1/sqrt(2 pi), E max(Z,0)^2 = 1/2, E[Z max(Z,0)] = 1/2.
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return ActivationSpec(ActivationKind::centered_relu, "crelu",
                        [c](double x) { return std::max(x, 0.0) - c; }, 0.5,
                        0.5 - 1.0 / (2.0 * std::numbers::pi));
}

ActivationSpec ActivationSpec::custom(std::function<double(double)> f,
                                      bool auto_center) {
  const double mean = gauss_expect(f);
  std::function<double(double)> g = f;
  if (auto_center) {
    g = [f, mean](double x) { return f(x) - mean; };
  } else if (std::abs(mean) > 1e-8) {
    throw std::invalid_argument(
        "ActivationSpec::custom: E sigma(Z) = " + std::to_string(mean) +
        " != 0; center it or enable auto_center");
  }
  const double mu = gauss_expect([&g](double x) { return x * g(x); });
  const double v = gauss_expect([&g](double x) { return g(x) * g(x); });
  if (v < mu * mu - 1e-8)
    throw std::invalid_argument("ActivationSpec::custom: v < mu^2");
  return ActivationSpec(ActivationKind::custom, "custom", std::move(g), mu, v);
}

ActivationSpec ActivationSpec::parse(const std::string& name) {
  if (name == "identity" || name == "linear") return identity();
  if (name == "crelu" || name == "relu0mean") return centered_relu();
  if (name.rfind("linear_k=", 0) == 0)
    return scaled_linear(std::stod(name.substr(9)));
  if (name == "tanh")
    return custom([](double x) { return std::tanh(x); }, true);
  throw std::invalid_argument("unknown activation: " + name);
}

}  // namespace anova
