#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "anova/checks.hpp"
#include "anova/csv.hpp"
#include "anova/empirical.hpp"
#include "anova/simulate.hpp"
#include "anova/svg.hpp"
#include "anova/theory_linear.hpp"
#include "anova/theory_nonlinear.hpp"

namespace {

using namespace anova;

// Relative output paths land in $ANOVA_OUT_DIR when it is set.
std::string resolve_out(const std::string& path) {
  if (path.empty()) return path;
  const char* dir = std::getenv("ANOVA_OUT_DIR");
  std::filesystem::path p(path);
  if (dir && *dir && p.is_relative()) p = std::filesystem::path(dir) / p;
  return p.string();
}

std::ofstream open_file(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// Writes through to a file when a path is given, stdout otherwise.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
  } else {
    auto f = open_file(resolve_out(path));
    fn(f);
  }
}

std::vector<double> axis_values(double from, double to, int points) {
  if (points < 1) throw CLI::ValidationError("--points must be >= 1");
  if (points == 1) return {from};
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i)
    v[i] = from + (to - from) * i / static_cast<double>(points - 1);
  return v;
}

double parse_lambda_or_optimal(const std::string& s, const ModelParams& p,
                               const ActivationSpec& act) {
  if (s == "optimal")
    return act.is_identity() ? optimal_lambda(p) : optimal_lambda_nl(p, act);
  return std::stod(s);
}

struct TheoryOpts {
  double alpha = 1.0, sigma = 0.3, pi = 0.8, delta = 1.25;
  std::string lambda = "0.01";
  std::string activation = "identity";
  std::string axis = "delta";
  double from = 0.25, to = 3.0;
  int points = 120;
  std::string out, plot;
  bool stacked = false;
};

int cmd_theory(const TheoryOpts& o) {
  const auto act = ActivationSpec::parse(o.activation);
  const auto values = axis_values(o.from, o.to, o.points);
  const bool linear = act.is_identity();

  std::vector<std::vector<double>> rows;
  for (double v : values) {
    ModelParams p{o.alpha * o.alpha, o.sigma * o.sigma, o.pi, o.delta, 0.0};
    if (o.axis == "delta") p.delta = v;
    else if (o.axis == "pi") p.pi = v;
    p.validate(false);
    p.lambda = (o.axis == "lambda") ? v : parse_lambda_or_optimal(o.lambda, p, act);
    if (linear) {
      const auto r = risk_decomposition(p);
      const auto c = variance_components(p);
      rows.push_back({v, p.lambda, r.bias2, r.variance, r.mse, r.sigma_label,
                      r.sigma_sample, r.sigma_init, c.v_s, c.v_l, c.v_i,
                      c.v_sl, c.v_si, c.v_li, c.v_sli});
    } else {
      const auto r = nonlinear_risk(p, act);
      rows.push_back({v, p.lambda, r.bias2, r.variance, r.mse});
    }
  }

  const std::vector<std::string> header =
      linear ? std::vector<std::string>{o.axis, "lambda", "bias2", "variance",
                                        "mse", "sigma_label", "sigma_sample",
                                        "sigma_init", "v_s", "v_l", "v_i",
                                        "v_sl", "v_si", "v_li", "v_sli"}
             : std::vector<std::string>{o.axis, "lambda", "bias2", "variance",
                                        "mse"};
  with_output(o.out, [&](std::ostream& os) {
    for (std::size_t i = 0; i < header.size(); ++i)
      os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        os << (i ? "," : "") << csv::format_double(row[i]);
      os << '\n';
    }
  });

  if (!o.plot.empty()) {
    std::vector<svg::Series> series;
    const char* labels[] = {"bias2", "variance", "mse"};
    for (int q = 0; q < 3; ++q) {
      svg::Series s;
      s.label = labels[q];
      for (std::size_t i = 0; i < rows.size(); ++i) {
        s.x.push_back(rows[i][0]);
        double y = rows[i][2 + q];
        if (o.stacked && q == 1) y += rows[i][2];  // cumulative view
        s.y.push_back(y);
      }
      series.push_back(std::move(s));
    }
    auto f = open_file(resolve_out(o.plot));
    svg::write_line_plot(f, o.stacked ? "risk components (cumulative)"
                                      : "risk components",
                         o.axis, "risk", series);
  }
  return 0;
}

struct SimOpts {
  std::string estimator = "functionals";  // or "mse"
  int n = 150;
  double alpha = 1.0, sigma = 0.3, pi = 0.8, delta = 1.25;
  std::string lambda = "0.01";
  std::string activation = "identity";
  std::string data_law = "gaussian";
  std::string axis = "delta";
  double from = 0.25, to = 3.0;
  int points = 12;
  int k_outer = 100, k_grid = 20, runs = 5;
  bool bias_correct = false;
  std::uint64_t seed = 20240915;
  int threads = 1;
  std::string out, plot;
};

int run_sim_sweep(const SimOpts& o) {
  const auto act = ActivationSpec::parse(o.activation);
  const bool direct = o.estimator == "mse";
  if (!direct && o.estimator != "functionals")
    throw CLI::ValidationError("--estimator must be functionals or mse");
  const auto values = axis_values(o.from, o.to, o.points);

  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < values.size(); ++c) {
    const double v = values[c];
    ModelParams p{o.alpha * o.alpha, o.sigma * o.sigma, o.pi, o.delta, 0.0};
    if (o.axis == "delta") p.delta = v;
    else if (o.axis == "pi") p.pi = v;
    p.validate(false);

    SimConfig cfg;
    cfg.n = o.n;
    cfg.set_ratios(p.delta, p.pi);
    cfg.alpha2 = p.alpha2;
    cfg.sigma2 = p.sigma2;
    cfg.lambda = (o.axis == "lambda")
                     ? v
                     : parse_lambda_or_optimal(o.lambda, p, act);
    cfg.activation = act;
    cfg.data_law = DataLaw::parse(o.data_law);
    cfg.k_outer = direct ? std::max(o.k_outer, 2) : o.k_outer;
    cfg.k_grid = o.k_grid;
    cfg.bias_correction = o.bias_correct;
    cfg.runs = o.runs;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.cell = c;

    if (direct) {
      const auto e = estimate_mse_direct(cfg);
      rows.push_back({o.axis, v, "mse", e.mean, e.stdev, cfg});
    } else {
      const auto f = estimate_functionals(cfg);
      for (const auto& q : FunctionalEstimates::quantity_names()) {
        const auto e = f.get(q);
        rows.push_back({o.axis, v, q, e.mean, e.stdev, cfg});
      }
    }
  }

  with_output(o.out, [&](std::ostream& os) { csv::write_sweep(os, rows); });

  if (!o.plot.empty()) {
    // Simulation points with error bars plus the matching theory curve.
    const std::vector<std::string> wanted =
        direct ? std::vector<std::string>{"mse"}
               : std::vector<std::string>{"bias2", "variance", "mse", "v_s",
                                          "v_i", "v_sl", "v_si", "v_sli"};
    std::vector<svg::Series> series;
    for (const auto& q : wanted) {
      svg::Series s, t;
      s.label = q + " (sim)";
      t.label = q + " (theory)";
      t.dashed = true;
      for (const auto& r : rows) {
        if (r.quantity != q) continue;
        s.x.push_back(r.value);
        s.y.push_back(r.estimate);
        s.err.push_back(r.stdev);
        ModelParams p{r.cfg.alpha2, r.cfg.sigma2, r.cfg.pi(), r.cfg.delta(),
                      r.cfg.lambda};
        t.x.push_back(r.value);
        if (act.is_identity()) {
          if (q == "mse")
            t.y.push_back(direct ? risk_decomposition(p).mse - p.sigma2
                                 : risk_decomposition(p).mse);
          else if (q == "bias2") t.y.push_back(risk_decomposition(p).bias2);
          else if (q == "variance") t.y.push_back(risk_decomposition(p).variance);
          else if (q == "sigma_label")
            t.y.push_back(risk_decomposition(p).sigma_label);
          else if (q == "sigma_sample")
            t.y.push_back(risk_decomposition(p).sigma_sample);
          else if (q == "sigma_init")
            t.y.push_back(risk_decomposition(p).sigma_init);
          else t.y.push_back(variance_components(p).get(q));
        } else {
          const auto nr = nonlinear_risk(p, act);
          t.y.push_back(q == "mse" ? (direct ? nr.mse - p.sigma2 : nr.mse)
                                   : (q == "bias2" ? nr.bias2 : nr.variance));
        }
      }
      series.push_back(std::move(s));
      series.push_back(std::move(t));
    }
    auto f = open_file(resolve_out(o.plot));
    svg::write_line_plot(f, "simulation vs theory", o.axis, "risk", series);
  }
  return 0;
}

struct EmpOpts {
  std::string data = "synthetic";
  int rows = 2000, dims = 40;
  double alpha = 1.0, sigma = 0.5;
  double split = 0.9;
  double pi = 0.9;
  std::string lambda = "0.01";  // number or "select"
  std::string n_grid;           // "lo:hi" or "lo:hi:points"
  int n = 0;
  int n_s = 20, n_i = 20;
  std::uint64_t seed = 20240915;
  std::string out, plot;
};

int cmd_empirical(const EmpOpts& o) {
  SplitData data;
  std::string dataset_name;
  if (o.data == "synthetic") {
    data = prepare(make_synthetic(o.rows, o.dims, o.alpha * o.alpha,
                                  o.sigma * o.sigma, o.seed),
                   o.split, o.seed);
    dataset_name = "synthetic";
  } else {
    data = load_and_prepare(o.data, o.split, o.seed);
    dataset_name = std::filesystem::path(o.data).filename().string();
  }
  const int d = data.train.dims();
  const int p = std::max(1, static_cast<int>(std::floor(o.pi * d)));

  std::vector<int> ns;
  if (!o.n_grid.empty()) {
    int lo = 0, hi = 0, points = 20;
    char sep1 = 0, sep2 = 0;
    std::istringstream ss(o.n_grid);
    ss >> lo >> sep1 >> hi;
    if (ss >> sep2 >> points) {}
    if (sep1 != ':' || lo < 2 || hi < lo || points < 2)
      throw CLI::ValidationError("--n-grid must look like lo:hi[:points]");
    hi = std::min(hi, data.train.rows());
    for (int i = 0; i < points; ++i)
      ns.push_back(lo + (hi - lo) * i / (points - 1));
  } else {
    ns.push_back(o.n > 0 ? o.n : std::min(10 * d, data.train.rows()));
  }

  std::vector<csv::EmpiricalRow> out_rows;
  for (int n : ns) {
    double la;
    if (o.lambda == "select")
      la = lambda_select(data.train, data.test, n, p, o.n_s, o.n_i, o.seed)
               .lambda;
    else
      la = std::stod(o.lambda);
    const auto est = empirical_grid(data.train, data.test, n, p, la, o.n_s,
                                    o.n_i, o.seed);
    out_rows.push_back({dataset_name, n, p, o.n_s, o.n_i, la, o.seed, est});
  }

  with_output(o.out,
              [&](std::ostream& os) { csv::write_empirical(os, out_rows); });

  if (!o.plot.empty()) {
    const char* wanted[] = {"mse", "bias2", "variance", "v_s", "v_i"};
    std::vector<svg::Series> series;
    for (const char* q : wanted) {
      svg::Series s;
      s.label = q;
      for (const auto& r : out_rows) {
        s.x.push_back(r.n);
        if (std::string(q) == "mse") s.y.push_back(r.est.mse);
        else if (std::string(q) == "bias2") s.y.push_back(r.est.bias2);
        else if (std::string(q) == "variance") s.y.push_back(r.est.variance);
        else if (std::string(q) == "v_s") s.y.push_back(r.est.v_s);
        else s.y.push_back(r.est.v_i);
      }
      series.push_back(std::move(s));
    }
    auto f = open_file(resolve_out(o.plot));
    svg::write_line_plot(f, dataset_name + " grid decomposition", "n",
                         "standardized risk", series);
  }
  return 0;
}

int cmd_check(const std::string& suite, double pi, std::uint64_t seed,
              const std::string& out) {
  std::vector<CheckResult> results;
  const auto append = [&](std::vector<CheckResult> r) {
    for (auto& x : r) results.push_back(std::move(x));
  };
  if (suite == "identities" || suite == "all") {
    append(check_identities(seed));
    append(check_component_sum(seed));
    append(check_optimum_relation(seed));
    append(check_one_layer());
    append(check_added_noise(seed));
  }
  if (suite == "monotonicity" || suite == "all")
    append(check_monotonicity_suite(seed));
  if (suite == "reduction" || suite == "all") append(check_reduction(seed));
  if (suite == "divergence" || suite == "all") append(check_divergence(pi));
  if (results.empty())
    throw CLI::ValidationError(
        "suite must be identities, monotonicity, reduction, divergence, or all");

  bool all_pass = true;
  with_output(out, [&](std::ostream& os) {
    for (const auto& r : results) {
      nlohmann::json j{{"suite", r.suite},   {"check", r.name},
                       {"pass", r.pass},     {"value", r.value},
                       {"tol", r.tol},       {"detail", r.detail}};
      os << j.dump() << '\n';
      all_pass = all_pass && r.pass;
    }
  });
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Asymptotic ANOVA risk decomposition for two-layer ridge networks: "
      "closed-form theory, Monte Carlo verification, and empirical grids"};
  app.set_config("--config");
  app.require_subcommand(1);

  TheoryOpts th;
  auto* theory = app.add_subcommand("theory", "closed-form risk curves");
  theory->add_option("--alpha", th.alpha, "signal strength alpha");
  theory->add_option("--sigma", th.sigma, "label-noise level sigma");
  theory->add_option("--pi", th.pi, "parametrization p/d");
  theory->add_option("--delta", th.delta, "aspect ratio d/n");
  theory->add_option("--lambda", th.lambda, "penalty, or 'optimal'");
  theory->add_option("--activation", th.activation,
                     "identity | crelu | linear_k=<k> | tanh");
  theory->add_option("--axis", th.axis, "delta | pi | lambda");
  theory->add_option("--from", th.from);
  theory->add_option("--to", th.to);
  theory->add_option("--points", th.points);
  theory->add_option("--out", th.out, "CSV path (stdout if omitted)");
  theory->add_option("--plot", th.plot, "SVG path");
  theory->add_flag("--stacked", th.stacked, "cumulative component view");

  SimOpts sw;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Monte Carlo sweep along an axis");
  const auto add_sim_flags = [](CLI::App* cmd, SimOpts& o) {
    cmd->add_option("--estimator", o.estimator, "functionals | mse");
    cmd->add_option("--n", o.n, "training rows per fit");
    cmd->add_option("--alpha", o.alpha);
    cmd->add_option("--sigma", o.sigma);
    cmd->add_option("--pi", o.pi);
    cmd->add_option("--delta", o.delta);
    cmd->add_option("--lambda", o.lambda, "penalty, or 'optimal'");
    cmd->add_option("--activation", o.activation);
    cmd->add_option("--data-law", o.data_law,
                    "gaussian | rademacher | uniform | ar1_r=<r>");
    cmd->add_option("--axis", o.axis, "delta | pi | lambda");
    cmd->add_option("--from", o.from);
    cmd->add_option("--to", o.to);
    cmd->add_option("--points", o.points);
    cmd->add_option("--k-outer", o.k_outer, "i.i.d. (X,W) pairs / tuples");
    cmd->add_option("--k-grid", o.k_grid, "grid draws per axis");
    cmd->add_flag("--bias-correct", o.bias_correct,
                  "U-statistic (unbiased) ANOVA estimators");
    cmd->add_option("--runs", o.runs);
    cmd->add_option("--seed", o.seed);
    cmd->add_option("--threads", o.threads);
    cmd->add_option("--out", o.out, "CSV path (stdout if omitted)");
    cmd->add_option("--plot", o.plot, "SVG path with theory overlay");
  };
  add_sim_flags(sweep_cmd, sw);

  SimOpts an;
  auto* anova_cmd = app.add_subcommand(
      "anova", "ANOVA component estimates vs theory (identity activation)");
  add_sim_flags(anova_cmd, an);

  SimOpts si;
  si.estimator = "mse";
  si.k_outer = 400;
  si.runs = 20;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "direct MSE estimates vs theory");
  add_sim_flags(simulate_cmd, si);

  EmpOpts em;
  auto* empirical_cmd =
      app.add_subcommand("empirical", "grid decomposition on tabular data");
  empirical_cmd->add_option("--data", em.data, "'synthetic' or CSV path");
  empirical_cmd->add_option("--rows", em.rows, "synthetic rows");
  empirical_cmd->add_option("--dims", em.dims, "synthetic feature count");
  empirical_cmd->add_option("--alpha", em.alpha, "synthetic signal strength");
  empirical_cmd->add_option("--sigma", em.sigma, "synthetic noise level");
  empirical_cmd->add_option("--split", em.split, "train fraction");
  empirical_cmd->add_option("--pi", em.pi, "projection fraction p/d");
  empirical_cmd->add_option("--lambda", em.lambda, "penalty, or 'select'");
  empirical_cmd->add_option("--n-grid", em.n_grid, "lo:hi[:points] n sweep");
  empirical_cmd->add_option("--n", em.n, "single subsample size");
  empirical_cmd->add_option("--n-s", em.n_s, "subsample draws");
  empirical_cmd->add_option("--n-i", em.n_i, "layer draws");
  empirical_cmd->add_option("--seed", em.seed);
  empirical_cmd->add_option("--out", em.out, "CSV path (stdout if omitted)");
  empirical_cmd->add_option("--plot", em.plot, "SVG path");

  std::string suite;
  double check_pi = 0.8;
  std::uint64_t check_seed = 20240915;
  std::string check_out;
  auto* check_cmd =
      app.add_subcommand("check", "closed-form consistency suites");
  check_cmd->add_option("suite", suite,
                        "identities | monotonicity | reduction | divergence | all")
      ->required();
  check_cmd->add_option("--pi", check_pi, "divergence slice");
  check_cmd->add_option("--seed", check_seed);
  check_cmd->add_option("--out", check_out, "JSON-lines path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*theory) return cmd_theory(th);
    if (*sweep_cmd) return run_sim_sweep(sw);
    if (*anova_cmd) return run_sim_sweep(an);
    if (*simulate_cmd) return run_sim_sweep(si);
    if (*empirical_cmd) return cmd_empirical(em);
    if (*check_cmd) return cmd_check(suite, check_pi, check_seed, check_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
