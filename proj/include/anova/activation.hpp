#ifndef ANOVA_ACTIVATION_HPP
#define ANOVA_ACTIVATION_HPP

#include <functional>
#include <string>
#include <vector>

namespace anova {

// Gauss-Hermite rule for the standard normal weight: E f(Z) ~ sum w_i f(x_i).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussHermiteRule(int n);
  double expect(const std::function<double(double)>& f) const;
};

// E f(Z) by composite quadrature, doubling the resolution until two
// successive refinements agree to tol. Handles piecewise-smooth f.
double gauss_expect(const std::function<double(double)>& f,
                    int start_nodes = 512, double tol = 1e-10);

enum class ActivationKind { identity, scaled_linear, centered_relu, custom };

// Activation with its Gaussian moments mu = E[Z sigma(Z)], v = E[sigma(Z)^2].
// All built-ins are zero mean under N(0,1); custom activations are centered
// automatically unless the caller attests E sigma(Z) = 0.
class ActivationSpec {
 public:
  static ActivationSpec identity();
  static ActivationSpec scaled_linear(double k);
  static ActivationSpec centered_relu();
  // auto_center subtracts the quadrature estimate of E sigma(Z).
  static ActivationSpec custom(std::function<double(double)> f,
                               bool auto_center = true);
  static ActivationSpec parse(const std::string& name);  // CLI names

  double operator()(double x) const { return f_(x); }
  double mu() const { return mu_; }
  double v() const { return v_; }
  bool is_identity() const { return kind_ == ActivationKind::identity; }
  bool is_linear() const {
    return kind_ == ActivationKind::identity ||
           kind_ == ActivationKind::scaled_linear;
  }
  ActivationKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

 private:
  ActivationSpec(ActivationKind kind, std::string name,
                 std::function<double(double)> f, double mu, double v)
      : kind_(kind), name_(std::move(name)), f_(std::move(f)), mu_(mu), v_(v) {}

  ActivationKind kind_;
  std::string name_;
  std::function<double(double)> f_;
  double mu_;
  double v_;
};

}  // namespace anova

#endif  // ANOVA_ACTIVATION_HPP
