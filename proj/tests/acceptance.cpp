// End-to-end acceptance gate: one pass/fail line per criterion.
// Exit code 0 only if every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "anova/checks.hpp"
#include "anova/empirical.hpp"
#include "anova/simulate.hpp"
#include "anova/theory_linear.hpp"
#include "anova/theory_nonlinear.hpp"

using namespace anova;

namespace {

int g_failures = 0;

void report(int id, const std::string& title, bool pass,
            const std::string& detail, double seconds) {
  std::printf("%s - criterion %2d: %s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL",
              id, title.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename Fn>
void run(int id, const std::string& title, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report(id, title, pass, detail, secs);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

bool all_pass(const std::vector<CheckResult>& results, std::string& detail) {
  double worst = 0;
  for (const auto& r : results) {
    worst = std::max(worst, r.value);
    if (!r.pass) {
      detail = r.name + " value " + fmt(r.value) + " tol " + fmt(r.tol) + "; " +
               r.detail;
      return false;
    }
  }
  detail = "worst deviation " + fmt(worst);
  return true;
}

std::vector<double> delta_grid() {
  std::vector<double> v;
  for (int i = 1; i <= 12; ++i) v.push_back(0.25 * i);
  return v;
}

bool criterion8(std::string& detail) {
  const char* comps[] = {"v_s", "v_i", "v_sl", "v_si", "v_sli"};
  double worst_std = 0, worst_gap = 0;
  std::size_t cell = 0;
  for (double de : delta_grid()) {
    SimConfig cfg;
    cfg.n = 150;
    cfg.set_ratios(de, 0.8);
    cfg.alpha2 = 1.0;
    cfg.sigma2 = 0.09;
    cfg.lambda = 0.01;
    cfg.k_outer = 2;  // only the ANOVA grid terms are scored here
    cfg.k_grid = 20;
    cfg.runs = 5;
    // The plug-in nested-mean estimators carry an O(1/k_grid) bias of order
    // (v_s + v_i + 2 v_si)/k_grid, which near the interpolation threshold
    // (delta = 1.25, lambda = 0.01) reaches ~0.09 and exceeds the 0.03 gate;
    // the U-statistic forms are unbiased and measure the same limits.
    cfg.bias_correction = true;
    cfg.cell = cell++;
    const auto f = estimate_functionals(cfg);
    ModelParams p{1.0, 0.09, cfg.pi(), cfg.delta(), 0.01};
    const auto v = variance_components(p);
    for (const char* q : comps) {
      const auto e = f.get(q);
      worst_std = std::max(worst_std, e.stdev);
      worst_gap = std::max(worst_gap, std::abs(e.mean - v.get(q)));
    }
  }
  detail = "worst per-run std " + fmt(worst_std) +
           " (tol 0.005), worst |mean-theory| " + fmt(worst_gap) +
           " (tol 0.03)";
  return worst_std < 0.005 && worst_gap < 0.03;
}

bool criterion9(std::string& detail) {
  const auto crelu = ActivationSpec::centered_relu();
  int total = 0, within = 0;
  double worst_ratio = 0;
  for (int setting = 0; setting < 2; ++setting) {
    std::size_t cell = 100 * (setting + 1);
    for (double de : delta_grid()) {
      SimConfig cfg;
      cfg.n = 150;
      cfg.set_ratios(de, 0.8);
      cfg.alpha2 = 1.0;
      cfg.sigma2 = 0.09;
      cfg.k_outer = 400;
      cfg.runs = 20;
      cfg.cell = cell++;
      ModelParams p{1.0, 0.09, cfg.pi(), cfg.delta(), 0.0};
      double theory;
      if (setting == 0) {
        cfg.lambda = optimal_lambda(p);
        p.lambda = cfg.lambda;
        theory = risk_decomposition(p).mse - p.sigma2;
      } else {
        cfg.activation = crelu;
        cfg.lambda = 0.01;
        p.lambda = 0.01;
        theory = nonlinear_risk(p, crelu).mse - p.sigma2;
      }
      const auto e = estimate_mse_direct(cfg);
      ++total;
      const double gap = std::abs(e.mean - theory);
      if (gap <= 2.0 * e.stdev) ++within;
      if (e.stdev > 0) worst_ratio = std::max(worst_ratio, gap / e.stdev);
    }
  }
  detail = std::to_string(within) + "/" + std::to_string(total) +
           " grid points within 2 std (need >= 90%), worst gap/std " +
           fmt(worst_ratio);
  return within * 10 >= total * 9;
}

bool criterion12(std::string& detail) {
  const int d = 40, p = 36;  // pi = 0.9
  const std::vector<int> ns = {12, 18, 24,  30,  36,  42, 50,
                               65, 85, 110, 150, 200, 300};
  const std::vector<std::uint64_t> seeds = {101, 102, 103};
  const int n_s = 12, n_i = 12;

  std::vector<double> var_mean(ns.size(), 0), mse_fixed(ns.size(), 0),
      mse_select(ns.size(), 0), var_std(ns.size(), 0);
  std::vector<std::vector<double>> vsum(ns.size()), vtot(ns.size());

  for (std::uint64_t seed : seeds) {
    const auto data = prepare(make_synthetic(2000, d, 1.0, 0.25, seed), 0.9,
                              seed);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const auto fixed = empirical_grid(data.train, data.test, ns[i], p, 0.01,
                                        n_s, n_i, seed);
      const auto chosen =
          lambda_select(data.train, data.test, ns[i], p, n_s, n_i, seed);
      const auto tuned = empirical_grid(data.train, data.test, ns[i], p,
                                        chosen.lambda, n_s, n_i, seed);
      var_mean[i] += fixed.variance / seeds.size();
      mse_fixed[i] += fixed.mse / seeds.size();
      mse_select[i] += tuned.mse / seeds.size();
      vsum[i].push_back(fixed.v_s + fixed.v_i);
      vtot[i].push_back(fixed.variance);
    }
  }

  // Variance peak near the interpolation threshold n ~ p.
  std::size_t peak = 0;
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (var_mean[i] > var_mean[peak]) peak = i;
  const bool peak_near = ns[peak] >= p / 2 && ns[peak] <= 2 * p;

  // MSE non-monotone under fixed lambda; flattened by selection.
  double fixed_rise = 0, select_rise = 0;
  for (std::size_t i = 1; i < ns.size(); ++i) {
    fixed_rise = std::max(fixed_rise, mse_fixed[i] - mse_fixed[i - 1]);
    select_rise = std::max(select_rise, mse_select[i] - mse_select[i - 1]);
  }
  const bool non_monotone = fixed_rise > 0.05;
  const bool cured = select_rise < std::max(0.1 * fixed_rise, 0.01);

  // Main effects bounded by the total variance within noise.
  bool effects_ok = true;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    double m = 0, mv = 0, q = 0;
    for (double x : vtot[i]) mv += x / vtot[i].size();
    for (double x : vtot[i]) q += (x - mv) * (x - mv);
    const double sd = std::sqrt(q / (vtot[i].size() - 1));
    for (double x : vsum[i]) m = std::max(m, x);
    if (m > mv + 3.0 * sd + 1e-12) effects_ok = false;
  }

  detail = "variance peak at n=" + std::to_string(ns[peak]) +
           " (p=36), fixed-lambda max rise " + fmt(fixed_rise) +
           ", selected-lambda max rise " + fmt(select_rise) +
           (effects_ok ? ", main effects bounded" : ", main effects EXCEED");
  return peak_near && non_monotone && cured && effects_ok;
}

bool criterion13(std::string& detail) {
  SimConfig base;
  base.n = 60;
  base.sigma2 = 0.09;
  base.lambda = 0.05;
  base.k_outer = 4;
  base.k_grid = 4;
  base.runs = 3;
  base.threads = 1;
  const auto r1 = sweep(base, 1.0, 0.8, "delta", {0.5, 1.25}, SweepKind::functionals);
  base.threads = 4;
  const auto r2 = sweep(base, 1.0, 0.8, "delta", {0.5, 1.25}, SweepKind::functionals);
  base.threads = 7;
  const auto r3 = sweep(base, 1.0, 0.8, "delta", {0.5, 1.25}, SweepKind::functionals);
  if (r1.size() != r2.size() || r1.size() != r3.size()) {
    detail = "row count mismatch";
    return false;
  }
  for (std::size_t i = 0; i < r1.size(); ++i) {
    if (r1[i].estimate != r2[i].estimate || r1[i].stdev != r2[i].stdev ||
        r1[i].estimate != r3[i].estimate || r1[i].stdev != r3[i].stdev) {
      detail = "mismatch at row " + std::to_string(i);
      return false;
    }
  }
  detail = "bit-identical across 1, 4, 7 threads";
  return true;
}

}  // namespace

int main() {
  const std::uint64_t seed = 20240915;

  run(1, "resolvent-moment identities", [&](std::string& d) {
    auto r = check_identities(seed);
    r.resize(3);  // the two quadratic identities and the derivative check
    return all_pass(r, d);
  });
  run(2, "adjusted-penalty fixed-point equivalence", [&](std::string& d) {
    auto r = check_identities(seed);
    return all_pass({r.back()}, d);
  });
  run(3, "ANOVA component sum and ordered totals", [&](std::string& d) {
    return all_pass(check_component_sum(seed), d);
  });
  run(4, "optimum balance Var = Bias*(alpha - Bias)", [&](std::string& d) {
    return all_pass(check_optimum_relation(seed), d);
  });
  run(5, "one-layer variance peak and crossing", [&](std::string& d) {
    return all_pass(check_one_layer(), d);
  });
  run(6, "nonlinear reduction and centered-ReLU moments", [&](std::string& d) {
    return all_pass(check_reduction(seed), d);
  });
  run(7, "shape table grids (64 points, 20 slices/cell)", [&](std::string& d) {
    return all_pass(check_monotonicity_suite(seed), d);
  });
  run(8, "ANOVA components vs simulation (n=150, k_grid=20)", criterion8);
  run(9, "direct MSE vs theory (k=400, 20 reps, two settings)", criterion9);
  run(10, "ridgeless sqrt(lambda) divergence split", [&](std::string& d) {
    return all_pass(check_divergence(0.8), d);
  });
  run(11, "added-noise equivalence", [&](std::string& d) {
    return all_pass(check_added_noise(seed), d);
  });
  run(12, "empirical pipeline on synthetic data", criterion12);
  run(13, "thread-count determinism", criterion13);

  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 13 criteria passed\n");
  return 0;
}
