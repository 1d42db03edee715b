#ifndef ANOVA_SHAPE_HPP
#define ANOVA_SHAPE_HPP

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anova/theory_linear.hpp"
#include "anova/theory_nonlinear.hpp"

// Finite-grid shape classification of the closed-form risk curves at the
// optimal penalty, matching the tabulated monotonicity/unimodality claims.

namespace anova {

enum class Shape { nonincreasing, nondecreasing, unimodal, flat, violation };

struct ShapeReport {
  Shape shape;
  std::size_t argmax;       // grid index of the peak (unimodal only)
  double argmax_value;      // axis value at the peak
  std::size_t violation_at; // first offending index (violation only)
  bool asserted;            // false for cells the table marks as conjecture
  std::string note;
};

inline const char* to_string(Shape s) {
  switch (s) {
    case Shape::nonincreasing: return "nonincreasing";
    case Shape::nondecreasing: return "nondecreasing";
    case Shape::unimodal: return "unimodal";
    case Shape::flat: return "flat";
    default: return "violation";
  }
}

// Classifies a finite sequence by the sign pattern of successive differences.
// Differences below drop_tol are treated as ties; a tie never breaks an
// otherwise consistent shape. direction_tol absorbs roundoff in the formulas.
inline ShapeReport classify_sequence(const std::vector<double>& ys,
                                     const std::vector<double>& xs,
                                     double direction_tol = 1e-9,
                                     double drop_tol = 1e-12) {
  if (ys.size() < 3 || ys.size() != xs.size())
    throw std::invalid_argument("classify_sequence: need >= 3 matched points");
  int sign = 0;            // current run direction: +1 up, -1 down
  int changes = 0;         // up -> down transitions seen
  std::size_t peak = 0;
  std::size_t first_bad = 0;
  bool bad = false;
  bool any_up = false, any_down = false;
  for (std::size_t i = 1; i < ys.size(); ++i) {
    const double d = ys[i] - ys[i - 1];
    if (d > drop_tol && d > direction_tol) {
      any_up = true;
      if (sign < 0) {  // down -> up is a second mode
        bad = true;
        if (first_bad == 0) first_bad = i;
      }
      sign = 1;
      peak = i;
    } else if (d < -drop_tol && d < -direction_tol) {
      any_down = true;
      if (sign > 0) {
        ++changes;
        if (changes > 1) {
          bad = true;
          if (first_bad == 0) first_bad = i;
        }
      }
      sign = -1;
    }
  }
  ShapeReport r{};
  r.asserted = true;
  if (bad) {
    r.shape = Shape::violation;
    r.violation_at = first_bad;
    return r;
  }
  if (!any_up && !any_down) {
    r.shape = Shape::flat;
    return r;
  }
  if (!any_up) {
    r.shape = Shape::nonincreasing;
    return r;
  }
  if (!any_down) {
    r.shape = Shape::nondecreasing;
    r.argmax = ys.size() - 1;
    r.argmax_value = xs.back();
    return r;
  }
  r.shape = Shape::unimodal;
  r.argmax = peak;
  r.argmax_value = xs[peak];
  return r;
}

enum class Quantity { mse, bias2, variance, sigma_label, sigma_sample, sigma_init };
enum class Axis { pi, delta };

inline Quantity parse_quantity(const std::string& s) {
  if (s == "mse") return Quantity::mse;
  if (s == "bias2") return Quantity::bias2;
  if (s == "variance") return Quantity::variance;
  if (s == "sigma_label") return Quantity::sigma_label;
  if (s == "sigma_sample") return Quantity::sigma_sample;
  if (s == "sigma_init") return Quantity::sigma_init;
  throw std::invalid_argument("unknown quantity: " + s);
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return xs;
}

// Shape of a risk quantity at lambda* along one axis of the linear model.
// params.pi / params.delta supply the slice; the swept coordinate is ignored.
inline ShapeReport check_monotonicity(Quantity q, Axis axis, ModelParams params,
                                      std::size_t grid = 64,
                                      double axis_lo = -1.0,
                                      double axis_hi = -1.0) {
  if (grid < 16) throw std::invalid_argument("check_monotonicity: grid >= 16");
  const double lo = axis_lo > 0 ? axis_lo : (axis == Axis::pi ? 0.02 : 0.05);
  const double hi = axis_hi > 0 ? axis_hi : (axis == Axis::pi ? 1.0 : 5.0);
  const auto xs = linear_grid(lo, hi, grid);
  std::vector<double> ys(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    ModelParams p = params;
    (axis == Axis::pi ? p.pi : p.delta) = xs[i];
    const auto r = risk_at_optimum(p);
    switch (q) {
      case Quantity::mse: ys[i] = r.mse; break;
      case Quantity::bias2: ys[i] = r.bias2; break;
      case Quantity::variance: ys[i] = r.variance; break;
      case Quantity::sigma_label: ys[i] = r.sigma_label; break;
      case Quantity::sigma_sample: ys[i] = r.sigma_sample; break;
      case Quantity::sigma_init: ys[i] = r.sigma_init; break;
    }
  }
  ShapeReport rep = classify_sequence(ys, xs);
  if (q == Quantity::sigma_sample) {
    rep.asserted = false;
    rep.note = "conjecture - not asserted";
  }
  return rep;
}

// Nonlinear counterpart; only mse / bias2 / variance are tabulated.
inline ShapeReport check_monotonicity_nl(Quantity q, Axis axis,
                                         ModelParams params,
                                         const ActivationSpec& act,
                                         std::size_t grid = 64,
                                         double axis_lo = -1.0,
                                         double axis_hi = -1.0) {
  if (grid < 16) throw std::invalid_argument("check_monotonicity_nl: grid >= 16");
  if (q != Quantity::mse && q != Quantity::bias2 && q != Quantity::variance)
    throw std::invalid_argument("check_monotonicity_nl: unsupported quantity");
  const double lo = axis_lo > 0 ? axis_lo : (axis == Axis::pi ? 0.02 : 0.05);
  const double hi = axis_hi > 0 ? axis_hi : (axis == Axis::pi ? 1.0 : 5.0);
  const auto xs = linear_grid(lo, hi, grid);
  std::vector<double> ys(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    ModelParams p = params;
    (axis == Axis::pi ? p.pi : p.delta) = xs[i];
    const auto r = nonlinear_risk_at_optimum(p, act);
    ys[i] = (q == Quantity::mse) ? r.mse
                                 : (q == Quantity::bias2 ? r.bias2 : r.variance);
  }
  return classify_sequence(ys, xs);
}

}  // namespace anova

#endif  // ANOVA_SHAPE_HPP
