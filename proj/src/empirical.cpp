#include "anova/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "anova/rng.hpp"
#include "anova/simulate.hpp"

namespace anova {

namespace {

Dataset take_rows(const Dataset& src, const std::vector<int>& idx) {
  Dataset out;
  out.X.resize(static_cast<int>(idx.size()), src.X.cols());
  out.y.resize(static_cast<int>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.X.row(static_cast<int>(k)) = src.X.row(idx[k]);
    out.y(static_cast<int>(k)) = src.y(idx[k]);
  }
  return out;
}

}  // namespace

SplitData prepare(const Dataset& full, double split, std::uint64_t seed) {
  if (!(split > 0.0) || !(split < 1.0))
    throw std::invalid_argument("prepare: split must lie in (0,1)");
  if (full.rows() < 4) throw std::invalid_argument("prepare: too few rows");

  std::vector<int> idx(full.rows());
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = make_stream(seed, 0, 0, Role::shuffle);
  std::shuffle(idx.begin(), idx.end(), rng);

  const int n_train = std::max(
      2, static_cast<int>(std::floor(split * full.rows())));
  if (n_train >= full.rows())
    throw std::invalid_argument("prepare: split leaves no test rows");

  SplitData s;
  s.train = take_rows(full, {idx.begin(), idx.begin() + n_train});
  s.test = take_rows(full, {idx.begin() + n_train, idx.end()});

  const int d = full.dims();
  s.feature_mean = s.train.X.colwise().mean();
  s.feature_scale.resize(d);
  for (int j = 0; j < d; ++j) {
    const double var =
        (s.train.X.col(j).array() - s.feature_mean(j)).square().mean();
    s.feature_scale(j) = std::sqrt(var);
    if (!(s.feature_scale(j) > 1e-12))
      throw std::invalid_argument("prepare: feature column " +
                                  std::to_string(j) + " is constant");
  }
  s.label_mean = s.train.y.mean();
  const double lvar = (s.train.y.array() - s.label_mean).square().mean();
  s.label_scale = std::sqrt(lvar);
  if (!(s.label_scale > 1e-12))
    throw std::invalid_argument("prepare: label column is constant");

  for (Dataset* part : {&s.train, &s.test}) {
    part->X = (part->X.rowwise() - s.feature_mean.transpose()).array().rowwise() /
              s.feature_scale.transpose().array();
    part->y = (part->y.array() - s.label_mean) / s.label_scale;
  }
  return s;
}

SplitData load_and_prepare(const std::string& path, double split,
                           std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size() && cell.find_first_not_of(" \t\r", used) !=
                                       std::string::npos)
          numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric) {
      if (first) {  // header line
        first = false;
        continue;
      }
      throw std::runtime_error("non-numeric cell in " + path);
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2)
    throw std::runtime_error("need rows with >= 2 columns in " + path);

  Dataset full;
  const int d = static_cast<int>(rows.front().size()) - 1;
  full.X.resize(static_cast<int>(rows.size()), d);
  full.y.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < d; ++j) full.X(static_cast<int>(i), j) = rows[i][j];
    full.y(static_cast<int>(i)) = rows[i][d];
  }
  return prepare(full, split, seed);
}

Dataset make_synthetic(int rows, int d, double alpha2, double sigma2,
                       std::uint64_t seed) {
  if (rows < 4 || d < 1) throw std::invalid_argument("make_synthetic: bad size");
  auto rx = make_stream(seed, 0, 0, Role::data);
  auto rs = make_stream(seed, 0, 0, Role::signal);
  auto re = make_stream(seed, 0, 0, Role::noise);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Dataset ds;
  ds.X.resize(rows, d);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < d; ++j) ds.X(i, j) = gauss(rx);
  Eigen::VectorXd theta(d);
  const double scale = std::sqrt(alpha2 / d);
  for (int j = 0; j < d; ++j) theta(j) = scale * gauss(rs);
  ds.y = ds.X * theta;
  const double noise = std::sqrt(sigma2);
  for (int i = 0; i < rows; ++i) ds.y(i) += noise * gauss(re);
  return ds;
}

EmpiricalEstimates empirical_grid(const Dataset& train, const Dataset& test,
                                  int n, int p, double lambda, int n_s,
                                  int n_i, std::uint64_t seed,
                                  const ActivationSpec& act) {
  const int d = train.dims();
  if (test.dims() != d) throw std::invalid_argument("dims mismatch");
  if (n < 2 || n > train.rows())
    throw std::invalid_argument("empirical_grid: need 2 <= n <= train rows");
  if (p < 1 || p > d)
    throw std::invalid_argument("empirical_grid: need 1 <= p <= dims");
  if (n_s < 1 || n_i < 1)
    throw std::invalid_argument("empirical_grid: need n_s, n_i >= 1");
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be > 0");

  std::vector<std::vector<int>> subsamples(n_s);
  std::vector<int> all(train.rows());
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < n_s; ++i) {
    auto rng = make_stream(seed, 0, static_cast<std::uint64_t>(i), Role::data);
    std::vector<int> idx = all;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(n);
    subsamples[i] = std::move(idx);
  }
  std::vector<Eigen::MatrixXd> layers(n_i);
  for (int j = 0; j < n_i; ++j) {
    auto rng =
        make_stream(seed, 0, static_cast<std::uint64_t>(j), Role::weights);
    layers[j] = sample_orthogonal(d, p, rng);
  }

  const int t = test.rows();
  const int cells = n_s * n_i;
  Eigen::MatrixXd preds(t, cells);
  for (int i = 0; i < n_s; ++i) {
    const Dataset sub = take_rows(train, subsamples[i]);
    for (int j = 0; j < n_i; ++j) {
      const Eigen::VectorXd beta =
          ridge_fit(sub.X, sub.y, layers[j], lambda, act);
      Eigen::MatrixXd feat = layers[j] * test.X.transpose();  // p x t
      if (!act.is_identity())
        feat = feat.unaryExpr([&](double v) { return act(v); });
      preds.col(i * n_i + j) = feat.transpose() * beta;
    }
  }

  EmpiricalEstimates e{};
  e.n = n;
  e.p = p;
  e.lambda = lambda;
  const Eigen::VectorXd grand = preds.rowwise().mean();
  e.bias2 = (grand - test.y).squaredNorm() / t;
  e.mse = (preds.colwise() - test.y).squaredNorm() / (t * cells);
  e.variance = (preds.colwise() - grand).squaredNorm() / (t * cells);

  Eigen::MatrixXd mean_over_i(t, n_s);  // average over layers, per subsample
  Eigen::MatrixXd mean_over_s = Eigen::MatrixXd::Zero(t, n_i);
  for (int i = 0; i < n_s; ++i) {
    mean_over_i.col(i) = preds.middleCols(i * n_i, n_i).rowwise().mean();
    for (int j = 0; j < n_i; ++j) mean_over_s.col(j) += preds.col(i * n_i + j);
  }
  mean_over_s /= n_s;
  e.v_s = (mean_over_i.colwise() - grand).squaredNorm() / (t * n_s);
  e.v_i = (mean_over_s.colwise() - grand).squaredNorm() / (t * n_i);
  e.rest = e.variance - e.v_s - e.v_i;
  return e;
}

LambdaChoice lambda_select(const Dataset& train, const Dataset& test, int n,
                           int p, int n_s, int n_i, std::uint64_t seed,
                           const std::vector<double>& candidates,
                           const ActivationSpec& act) {
  if (candidates.empty())
    throw std::invalid_argument("lambda_select: empty candidate set");
  std::vector<double> order = candidates;
  std::sort(order.begin(), order.end(), std::greater<double>());
  LambdaChoice best{0.0, 0.0};
  bool have = false;
  for (double la : order) {  // descending, so near-ties keep the larger
    const auto e = empirical_grid(train, test, n, p, la, n_s, n_i, seed, act);
    if (!have || e.mse < best.mse - 1e-12) {
      best = {la, e.mse};
      have = true;
    }
  }
  return best;
}

}  // namespace anova
