#include "anova/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "anova/parallel.hpp"
#include "anova/rng.hpp"

namespace anova {

namespace {

// Replicate keys: run in the high bits, a block tag to separate the i.i.d.
// pairs from the grid draws, and the draw index in the low bits.
constexpr std::uint64_t kBlockOuter = 1;
constexpr std::uint64_t kBlockGridX = 2;
constexpr std::uint64_t kBlockGridW = 3;
constexpr std::uint64_t kBlockDirect = 4;

std::uint64_t rep_key(int run, std::uint64_t block, int idx) {
  return (static_cast<std::uint64_t>(run) << 40) | (block << 32) |
         static_cast<std::uint64_t>(idx);
}

Eigen::MatrixXd ar1_cholesky(int d, double r) {
  Eigen::MatrixXd sigma(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) sigma(i, j) = std::pow(r, std::abs(i - j));
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("ar1_cholesky: covariance not positive definite");
  return llt.matrixL();
}

// Frobenius norm squared, weighted by the test-point covariance when the
// data law is anisotropic: tr(B^T Sigma B) = ||L^T B||_F^2.
struct NormOp {
  bool iso = true;
  Eigen::MatrixXd lt;  // L^T with Sigma = L L^T

  double operator()(const Eigen::MatrixXd& b) const {
    return iso ? b.squaredNorm() : (lt * b).squaredNorm();
  }
};

NormOp make_norm(const SimConfig& cfg) {
  NormOp op;
  if (!cfg.data_law.is_isotropic()) {
    op.iso = false;
    op.lt = ar1_cholesky(cfg.d, cfg.data_law.r).transpose();
  }
  return op;
}

struct Welford {
  // Plain two-pass replacement: run counts are tiny, store values.
  std::vector<double> values;

  void add(double x) { values.push_back(x); }
  Estimate summarize() const {
    Estimate e;
    const auto k = values.size();
    if (k == 0) return e;
    double s = 0;
    for (double v : values) s += v;
    e.mean = s / static_cast<double>(k);
    if (k > 1) {
      double q = 0;
      for (double v : values) q += (v - e.mean) * (v - e.mean);
      e.stdev = std::sqrt(q / static_cast<double>(k - 1));
    }
    return e;
  }
};

struct RunFunctionals {
  double mse, bias2, variance, sigma_label, sigma_sample, sigma_init;
  double v_s, v_i, v_sl, v_si, v_sli;
};

RunFunctionals functionals_one_run(const SimConfig& cfg, int run,
                                   const NormOp& norm) {
  const int d = cfg.d, n = cfg.n;
  const double a2 = cfg.alpha2, s2 = cfg.sigma2;
  const double inv_d = 1.0 / d;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);

  // Rows 1-2 of the estimator table: i.i.d. (X, W) pairs.
  Eigen::MatrixXd sum_m = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd sum_mt = Eigen::MatrixXd::Zero(d, n);
  double sum_nm2 = 0, sum_nmt2 = 0, sum_nerr2 = 0;
  for (int k = 0; k < cfg.k_outer; ++k) {
    auto rx = make_stream(cfg.seed, cfg.cell, rep_key(run, kBlockOuter, k),
                          Role::data);
    auto rw = make_stream(cfg.seed, cfg.cell, rep_key(run, kBlockOuter, k),
                          Role::weights);
    const Eigen::MatrixXd x = sample_data(cfg, rx);
    const Eigen::MatrixXd w = sample_orthogonal(d, cfg.p, rw);
    const RidgeSnapshot snap = ridge_matrices(x, w, cfg.lambda);
    sum_m += snap.M;
    sum_mt += snap.M_tilde;
    sum_nm2 += norm(snap.M);
    sum_nmt2 += norm(snap.M_tilde);
    sum_nerr2 += norm(snap.M - eye);
  }
  const double ko = cfg.k_outer;
  const Eigen::MatrixXd mean_m = sum_m / ko;
  const double mean_nm2 = sum_nm2 / ko;
  const double mean_nmt2 = sum_nmt2 / ko;

  RunFunctionals f{};
  f.bias2 = a2 * inv_d * norm(mean_m - eye);
  f.variance = a2 * inv_d * (mean_nm2 - norm(mean_m)) + s2 * mean_nmt2;
  f.mse = a2 * inv_d * (sum_nerr2 / ko) + s2 * mean_nmt2;
  f.sigma_label = s2 * mean_nmt2;

  // ANOVA terms from the k_grid x k_grid cross product.
  const int kg = cfg.k_grid;
  std::vector<Eigen::MatrixXd> xs(kg), ws(kg);
  for (int i = 0; i < kg; ++i) {
    auto rx = make_stream(cfg.seed, cfg.cell, rep_key(run, kBlockGridX, i),
                          Role::data);
    xs[i] = sample_data(cfg, rx);
  }
  for (int j = 0; j < kg; ++j) {
    auto rw = make_stream(cfg.seed, cfg.cell, rep_key(run, kBlockGridW, j),
                          Role::weights);
    ws[j] = sample_orthogonal(d, cfg.p, rw);
  }

  std::vector<Eigen::MatrixXd> t_w(kg, Eigen::MatrixXd::Zero(d, d));
  std::vector<Eigen::MatrixXd> t_w_t(kg, Eigen::MatrixXd::Zero(d, n));
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd u_t = Eigen::MatrixXd::Zero(d, n);
  // Raw sums over the grid: total cell norm, row-sum norms (fixed X_i),
  // column-sum norms (fixed W_j), and the norm of the grand sum.
  double cell_nm = 0, cell_nmt = 0;
  double row_nm = 0, row_nmt = 0;
  for (int i = 0; i < kg; ++i) {
    Eigen::MatrixXd s_x = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd s_x_t = Eigen::MatrixXd::Zero(d, n);
    for (int j = 0; j < kg; ++j) {
      const RidgeSnapshot snap = ridge_matrices(xs[i], ws[j], cfg.lambda);
      s_x += snap.M;
      s_x_t += snap.M_tilde;
      t_w[j] += snap.M;
      t_w_t[j] += snap.M_tilde;
      cell_nm += norm(snap.M);
      cell_nmt += norm(snap.M_tilde);
    }
    u += s_x;
    u_t += s_x_t;
    row_nm += norm(s_x);
    row_nmt += norm(s_x_t);
  }
  double col_nm = 0, col_nmt = 0;
  for (int j = 0; j < kg; ++j) {
    col_nm += norm(t_w[j]);
    col_nmt += norm(t_w_t[j]);
  }
  const double grand_nm = norm(u);
  const double grand_nmt = norm(u_t);
  const double k = kg;

  // Estimates of D = E||M||^2, A = E_X||E_W M||^2, B = E_W||E_X M||^2,
  // C = ||E M||^2, and the same with M replaced by M_tilde.
  double d_m, a_m, b_m, c_m, d_t, a_t, b_t, c_t;
  if (cfg.bias_correction) {
    // U-statistic forms: nested squared means over distinct draws only,
    // removing the O(1/k_grid) plug-in bias.
    d_m = cell_nm / (k * k);
    a_m = (row_nm - cell_nm) / (k * k * (k - 1));
    b_m = (col_nm - cell_nm) / (k * k * (k - 1));
    c_m = (grand_nm - row_nm - col_nm + cell_nm) /
          (k * k * (k - 1) * (k - 1));
    d_t = cell_nmt / (k * k);
    a_t = (row_nmt - cell_nmt) / (k * k * (k - 1));
    b_t = (col_nmt - cell_nmt) / (k * k * (k - 1));
    c_t = (grand_nmt - row_nmt - col_nmt + cell_nmt) /
          (k * k * (k - 1) * (k - 1));
  } else {
    // Plug-in forms: norms of Monte Carlo means as written.
    d_m = cell_nm / (k * k);
    a_m = row_nm / (k * k * k);
    b_m = col_nm / (k * k * k);
    c_m = grand_nm / (k * k * k * k);
    d_t = cell_nmt / (k * k);
    a_t = row_nmt / (k * k * k);
    b_t = col_nmt / (k * k * k);
    c_t = grand_nmt / (k * k * k * k);
  }

  f.v_s = a2 * inv_d * (a_m - c_m);
  f.v_i = a2 * inv_d * (b_m - c_m);
  f.v_si = a2 * inv_d * (d_m - a_m - b_m + c_m);
  f.v_sl = s2 * (a_t - c_t);
  f.v_sli = s2 * (d_t - a_t - b_t + c_t);
  f.sigma_sample = f.v_s + f.v_si;
  f.sigma_init = f.v_i;
  return f;
}

}  // namespace

DataLaw DataLaw::parse(const std::string& name) {
  DataLaw law;
  if (name == "gaussian" || name.empty()) {
    law.kind = Kind::gaussian;
  } else if (name == "rademacher") {
    law.kind = Kind::rademacher;
  } else if (name == "uniform") {
    law.kind = Kind::uniform;
  } else if (name.rfind("ar1", 0) == 0) {
    law.kind = Kind::ar1;
    law.r = 0.5;
    const auto eq = name.find('=');
    if (eq != std::string::npos) law.r = std::stod(name.substr(eq + 1));
    if (!(std::abs(law.r) < 1.0))
      throw std::invalid_argument("data law ar1 needs |r| < 1");
  } else {
    throw std::invalid_argument("unknown data law: " + name);
  }
  return law;
}

std::string DataLaw::name() const {
  switch (kind) {
    case Kind::gaussian: return "gaussian";
    case Kind::rademacher: return "rademacher";
    case Kind::uniform: return "uniform";
    default: return "ar1_r=" + std::to_string(r);
  }
}

void SimConfig::set_ratios(double delta, double pi) {
  if (!(delta > 0)) throw std::domain_error("delta must be > 0");
  if (!(pi > 0) || pi > 1) throw std::domain_error("pi must lie in (0,1]");
  d = static_cast<int>(std::floor(n * delta + 1e-9));
  p = static_cast<int>(std::floor(d * pi + 1e-9));
  if (d < 1) d = 1;
  if (p < 1) p = 1;
  if (p > d) p = d;
}

void SimConfig::validate() const {
  if (n < 2) throw std::domain_error("n must be >= 2");
  if (d < 1 || p < 1) throw std::domain_error("d and p must be >= 1");
  if (p > d) throw std::domain_error("p must be <= d (orthonormal rows)");
  if (!(lambda > 0)) throw std::domain_error("lambda must be > 0");
  if (!(alpha2 > 0)) throw std::domain_error("alpha2 must be > 0");
  if (!(sigma2 >= 0)) throw std::domain_error("sigma2 must be >= 0");
  if (k_outer < 1) throw std::domain_error("k_outer must be >= 1");
  if (k_grid < 2) throw std::domain_error("k_grid must be >= 2");
  if (runs < 2) throw std::domain_error("runs must be >= 2");
  if (d > 4096)
    std::fprintf(stderr, "warning: d = %d is large; expect long runtimes\n", d);
}

Eigen::MatrixXd sample_orthogonal(int d, int p, std::mt19937_64& rng) {
  if (p > d) throw std::domain_error("sample_orthogonal: need p <= d");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(d, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, p);
  const Eigen::MatrixXd r =
      qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  for (int j = 0; j < p; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q.transpose();
}

Eigen::MatrixXd sample_data(const SimConfig& cfg, std::mt19937_64& rng) {
  const int n = cfg.n, d = cfg.d;
  Eigen::MatrixXd x(n, d);
  switch (cfg.data_law.kind) {
    case DataLaw::Kind::gaussian: {
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = gauss(rng);
      return x;
    }
    case DataLaw::Kind::rademacher: {
      std::bernoulli_distribution coin(0.5);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = coin(rng) ? 1.0 : -1.0;
      return x;
    }
    case DataLaw::Kind::uniform: {
      const double b = std::sqrt(3.0);
      std::uniform_real_distribution<double> unif(-b, b);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = unif(rng);
      return x;
    }
    default: {
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = gauss(rng);
      if (cfg.data_law.r == 0.0) return x;
      const Eigen::MatrixXd l = ar1_cholesky(d, cfg.data_law.r);
      return x * l.transpose();
    }
  }
}

Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                          const Eigen::MatrixXd& W, double lambda,
                          const ActivationSpec& act) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(W.rows());
  Eigen::MatrixXd a = W * X.transpose();  // p x n
  if (!act.is_identity()) a = a.unaryExpr([&](double t) { return act(t); });
  Eigen::MatrixXd k = a * a.transpose() / n;
  k.diagonal().array() += lambda;
  return Eigen::LLT<Eigen::MatrixXd>(k).solve(a * Y / n);
}

RidgeSnapshot ridge_matrices(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W,
                             double lambda) {
  const int n = static_cast<int>(X.rows());
  const Eigen::MatrixXd a = W * X.transpose();  // p x n
  Eigen::MatrixXd k = a * a.transpose() / n;
  k.diagonal().array() += lambda;
  RidgeSnapshot s;
  s.M_tilde = W.transpose() * Eigen::LLT<Eigen::MatrixXd>(k).solve(a) / n;
  s.M = s.M_tilde * X;
  return s;
}

Estimate estimate_mse_direct(const SimConfig& cfg) {
  cfg.validate();
  std::vector<double> run_values(cfg.runs);
  parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
    const int run = static_cast<int>(r);
    const double scale = std::sqrt(cfg.alpha2 / cfg.d);
    const double noise = std::sqrt(cfg.sigma2);
    double total = 0;
    for (int k = 0; k < cfg.k_outer; ++k) {
      const auto key = rep_key(run, kBlockDirect, k);
      auto rx = make_stream(cfg.seed, cfg.cell, key, Role::data);
      auto rw = make_stream(cfg.seed, cfg.cell, key, Role::weights);
      auto rs = make_stream(cfg.seed, cfg.cell, key, Role::signal);
      auto re = make_stream(cfg.seed, cfg.cell, key, Role::noise);
      auto rt = make_stream(cfg.seed, cfg.cell, key, Role::test);
      std::normal_distribution<double> gauss(0.0, 1.0);

      const Eigen::MatrixXd x = sample_data(cfg, rx);
      const Eigen::MatrixXd w = sample_orthogonal(cfg.d, cfg.p, rw);
      Eigen::VectorXd theta(cfg.d);
      for (int i = 0; i < cfg.d; ++i) theta(i) = scale * gauss(rs);
      Eigen::VectorXd y = x * theta;
      for (int i = 0; i < cfg.n; ++i) y(i) += noise * gauss(re);

      SimConfig point = cfg;
      point.n = 1;
      const Eigen::MatrixXd xt = sample_data(point, rt);  // 1 x d
      const Eigen::VectorXd beta = ridge_fit(x, y, w, cfg.lambda,
                                             cfg.activation);
      Eigen::VectorXd feat = w * xt.row(0).transpose();
      if (!cfg.activation.is_identity())
        feat = feat.unaryExpr([&](double t) { return cfg.activation(t); });
      const double pred = feat.dot(beta);
      const double target = xt.row(0).dot(theta);
      total += (pred - target) * (pred - target);
    }
    run_values[r] = total / cfg.k_outer;
  });
  Welford acc;
  for (double v : run_values) acc.add(v);
  return acc.summarize();
}

FunctionalEstimates estimate_functionals(const SimConfig& cfg) {
  cfg.validate();
  if (!cfg.activation.is_identity())
    throw std::invalid_argument(
        "estimate_functionals: the resolvent-functional estimators are only "
        "valid for the identity activation; use estimate_mse_direct");
  const NormOp norm = make_norm(cfg);
  std::vector<RunFunctionals> per_run(cfg.runs);
  parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
    per_run[r] = functionals_one_run(cfg, static_cast<int>(r), norm);
  });

  FunctionalEstimates out;
  const auto collect = [&](double RunFunctionals::*field) {
    Welford acc;
    for (const auto& f : per_run) acc.add(f.*field);
    return acc.summarize();
  };
  out.mse = collect(&RunFunctionals::mse);
  out.bias2 = collect(&RunFunctionals::bias2);
  out.variance = collect(&RunFunctionals::variance);
  out.sigma_label = collect(&RunFunctionals::sigma_label);
  out.sigma_sample = collect(&RunFunctionals::sigma_sample);
  out.sigma_init = collect(&RunFunctionals::sigma_init);
  out.v_s = collect(&RunFunctionals::v_s);
  out.v_i = collect(&RunFunctionals::v_i);
  out.v_sl = collect(&RunFunctionals::v_sl);
  out.v_si = collect(&RunFunctionals::v_si);
  out.v_sli = collect(&RunFunctionals::v_sli);
  for (const auto& f : per_run) {
    if (f.v_s < -1e-6 || f.v_i < -1e-6 || f.v_sl < -1e-6 || f.v_si < -1e-6 ||
        f.v_sli < -1e-6)
      out.negative_flagged = true;
  }
  return out;
}

Estimate FunctionalEstimates::get(const std::string& quantity) const {
  if (quantity == "mse") return mse;
  if (quantity == "bias2") return bias2;
  if (quantity == "variance") return variance;
  if (quantity == "sigma_label") return sigma_label;
  if (quantity == "sigma_sample") return sigma_sample;
  if (quantity == "sigma_init") return sigma_init;
  if (quantity == "v_s") return v_s;
  if (quantity == "v_i") return v_i;
  if (quantity == "v_sl") return v_sl;
  if (quantity == "v_si") return v_si;
  if (quantity == "v_sli") return v_sli;
  throw std::invalid_argument("unknown quantity: " + quantity);
}

const std::vector<std::string>& FunctionalEstimates::quantity_names() {
  static const std::vector<std::string> names = {
      "mse",  "bias2", "variance", "sigma_label", "sigma_sample", "sigma_init",
      "v_s",  "v_i",   "v_sl",     "v_si",        "v_sli"};
  return names;
}

std::vector<SweepRow> sweep(const SimConfig& base, double base_delta,
                            double base_pi, const std::string& axis,
                            const std::vector<double>& values, SweepKind kind) {
  if (axis != "delta" && axis != "pi" && axis != "lambda")
    throw std::invalid_argument("sweep axis must be delta, pi, or lambda");
  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < values.size(); ++c) {
    SimConfig cfg = base;
    cfg.cell = c;
    const double v = values[c];
    if (axis == "delta") {
      cfg.set_ratios(v, base_pi);
    } else if (axis == "pi") {
      cfg.set_ratios(base_delta, v);
    } else {
      cfg.set_ratios(base_delta, base_pi);
      cfg.lambda = v;
    }
    if (kind == SweepKind::mse_direct) {
      const Estimate e = estimate_mse_direct(cfg);
      rows.push_back({axis, v, "mse", e.mean, e.stdev, cfg});
    } else {
      const FunctionalEstimates f = estimate_functionals(cfg);
      for (const auto& q : FunctionalEstimates::quantity_names()) {
        const Estimate e = f.get(q);
        rows.push_back({axis, v, q, e.mean, e.stdev, cfg});
      }
    }
  }
  return rows;
}

}  // namespace anova
