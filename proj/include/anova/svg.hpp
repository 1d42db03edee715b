#ifndef ANOVA_SVG_HPP
#define ANOVA_SVG_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace anova {
namespace svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional half-widths for error bars
  bool dashed = false;      // dashed stroke, used for theory overlays
};

// Self-contained line chart: axes, tick labels, legend, one polyline per
// series, optional vertical error bars.
void write_line_plot(std::ostream& out, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, int width = 720,
                     int height = 480);

// Row-major grid rendered as colored cells with a value scale.
void write_heatmap(std::ostream& out, const std::string& title,
                   const std::vector<std::vector<double>>& grid,
                   const std::vector<double>& col_values,
                   const std::vector<double>& row_values,
                   const std::string& xlabel, const std::string& ylabel,
                   int width = 720, int height = 480);

}  // namespace svg
}  // namespace anova

#endif  // ANOVA_SVG_HPP
