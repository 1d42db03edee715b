#ifndef ANOVA_EMPIRICAL_HPP
#define ANOVA_EMPIRICAL_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "anova/activation.hpp"

// Grid-resampling bias/variance decomposition on a fixed dataset: subsample
// n training rows (the "samples" axis) against fresh orthogonal first layers
// (the "initialization" axis) and decompose prediction variance on held-out
// points.

namespace anova {

struct Dataset {
  Eigen::MatrixXd X;  // rows are observations
  Eigen::VectorXd y;

  int rows() const { return static_cast<int>(X.rows()); }
  int dims() const { return static_cast<int>(X.cols()); }
};

struct SplitData {
  Dataset train;
  Dataset test;
  Eigen::VectorXd feature_mean, feature_scale;  // training statistics
  double label_mean = 0.0, label_scale = 1.0;
};

// Shuffles, splits (train fraction `split`), and standardizes features and
// label with training-set statistics. Rejects constant feature columns.
SplitData prepare(const Dataset& full, double split, std::uint64_t seed);

// CSV file, one row per observation, last column the label. A non-numeric
// first line is treated as a header.
SplitData load_and_prepare(const std::string& path, double split = 0.9,
                           std::uint64_t seed = 20240915);

// Gaussian design with y = X theta + eps, E||theta||^2 = alpha2,
// Var(eps) = sigma2. For pipeline checks against the closed forms.
Dataset make_synthetic(int rows, int d, double alpha2, double sigma2,
                       std::uint64_t seed);

struct EmpiricalEstimates {
  double mse, bias2, variance;
  double v_s;   // variance explained by the training subsample
  double v_i;   // variance explained by the first-layer draw
  double rest;  // variance - v_s - v_i (interactions and label noise)
  int n, p;
  double lambda;
};

// n_s training subsamples x n_i orthogonal layers; prediction moments over
// the test set. n must not exceed the training rows, p must not exceed dims.
// With a single draw on both axes the variance estimates are exactly zero.
EmpiricalEstimates empirical_grid(const Dataset& train, const Dataset& test,
                                  int n, int p, double lambda, int n_s,
                                  int n_i, std::uint64_t seed,
                                  const ActivationSpec& act =
                                      ActivationSpec::identity());

inline const std::vector<double>& lambda_grid() {
  static const std::vector<double> grid = {5.0,   2.0,   1.0,    0.5,
                                           0.2,   0.1,   0.05,   0.02,
                                           0.01,  0.005, 0.002,  0.001};
  return grid;
}

struct LambdaChoice {
  double lambda;
  double mse;
};

// Smallest test MSE over the candidate penalties; ties within 1e-12 break
// toward the larger lambda.
LambdaChoice lambda_select(const Dataset& train, const Dataset& test, int n,
                           int p, int n_s, int n_i, std::uint64_t seed,
                           const std::vector<double>& candidates = lambda_grid(),
                           const ActivationSpec& act =
                               ActivationSpec::identity());

}  // namespace anova

#endif  // ANOVA_EMPIRICAL_HPP
