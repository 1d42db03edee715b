#ifndef ANOVA_SIMULATE_HPP
#define ANOVA_SIMULATE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "anova/activation.hpp"

// Finite-size Monte Carlo engine for the two-layer ridge model: Haar
// orthogonal first layer, closed-form ridge second layer, and the
// Frobenius-functional estimators of the bias/variance/ANOVA limits.

namespace anova {

struct DataLaw {
  enum class Kind { gaussian, rademacher, uniform, ar1 };
  Kind kind = Kind::gaussian;
  double r = 0.0;  // AR-1 correlation, |r| < 1

  static DataLaw parse(const std::string& name);
  std::string name() const;
  bool is_isotropic() const { return kind != Kind::ar1 || r == 0.0; }
};

struct SimConfig {
  int n = 150;
  int d = 0;
  int p = 0;
  double alpha2 = 1.0;
  double sigma2 = 0.09;
  double lambda = 0.01;
  ActivationSpec activation = ActivationSpec::identity();
  DataLaw data_law{};
  int k_outer = 100;  // i.i.d. (X, W) pairs for bias/var/MSE
  int k_grid = 20;    // X-draws and W-draws for the ANOVA cross product
  // When set, the ANOVA terms use U-statistic (distinct-draw) forms of the
  // nested squared means instead of the plug-in norms of Monte Carlo means,
  // removing their O(1/k_grid) bias. Off by default: the plug-in estimators
  // are the reference definition.
  bool bias_correction = false;
  int runs = 5;
  std::uint64_t seed = 20240915;
  int threads = 1;
  std::uint64_t cell = 0;  // sweep cell index folded into stream keys

  // Fills d, p from (delta, pi) as d = floor(n*delta), p = floor(d*pi).
  void set_ratios(double delta, double pi);
  double delta() const { return static_cast<double>(d) / n; }
  double pi() const { return static_cast<double>(p) / d; }
  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  double stdev = 0.0;  // across runs, ddof = 1
};

struct FunctionalEstimates {
  Estimate mse, bias2, variance, sigma_label, sigma_sample, sigma_init;
  Estimate v_s, v_i, v_sl, v_si, v_sli;
  bool negative_flagged = false;  // an inclusion-exclusion term went below -1e-6

  Estimate get(const std::string& quantity) const;
  static const std::vector<std::string>& quantity_names();
};

struct RidgeSnapshot {
  Eigen::MatrixXd M;        // d x d, M_tilde * X
  Eigen::MatrixXd M_tilde;  // d x n, W^T R W X^T / n
};

// Haar-distributed p x d matrix with orthonormal rows (QR with the diagonal
// of R forced positive; plain QR is not Haar).
Eigen::MatrixXd sample_orthogonal(int d, int p, std::mt19937_64& rng);

// n x d data matrix under the configured law; unit-variance entries.
Eigen::MatrixXd sample_data(const SimConfig& cfg, std::mt19937_64& rng);

// Ridge coefficients (sigma(W X^T) sigma(X W^T)/n + lambda I)^{-1}
// sigma(W X^T) Y / n via an LLT factorization.
Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                          const Eigen::MatrixXd& W, double lambda,
                          const ActivationSpec& act);

// Linear-activation resolvent matrices used by the functional estimators.
RidgeSnapshot ridge_matrices(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W,
                             double lambda);

// Direct MSE estimator: mean of (f_hat_i(x_i) - x_i^T theta_i)^2 over k_outer
// i.i.d. tuples, repeated `runs` times. Test-noise floor excluded.
Estimate estimate_mse_direct(const SimConfig& cfg);

// Frobenius-functional estimators; identity activation only.
FunctionalEstimates estimate_functionals(const SimConfig& cfg);

struct SweepRow {
  std::string axis;
  double value;
  std::string quantity;
  double estimate;
  double stdev;
  SimConfig cfg;  // the cell's resolved configuration
};

enum class SweepKind { functionals, mse_direct };

// Evaluates the engine along delta/pi/lambda values with per-cell seeding.
// base_delta/base_pi define the slice for the axes that are not swept.
std::vector<SweepRow> sweep(const SimConfig& base, double base_delta,
                            double base_pi, const std::string& axis,
                            const std::vector<double>& values, SweepKind kind);

}  // namespace anova

#endif  // ANOVA_SIMULATE_HPP
