#include "anova/svg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace anova {
namespace svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
                          "#bcbd22", "#e377c2", "#aec7e8"};
constexpr int kPaletteSize = 11;

struct Range {
  double lo = 0, hi = 1;

  void expand(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      const double m = 0.05 * (hi - lo);
      lo -= m;
      hi += m;
    }
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

void write_line_plot(std::ostream& out, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, int width,
                     int height) {
  if (series.empty()) throw std::invalid_argument("write_line_plot: no data");
  const double ml = 70, mr = 20, mt = 40, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;

  Range xr, yr;
  bool first = true;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("series x/y size mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double e = i < s.err.size() ? s.err[i] : 0.0;
      if (first) {
        xr.lo = xr.hi = s.x[i];
        yr.lo = s.y[i] - e;
        yr.hi = s.y[i] + e;
        first = false;
      }
      xr.expand(s.x[i]);
      yr.expand(s.y[i] - e);
      yr.expand(s.y[i] + e);
    }
  }
  xr.pad();
  yr.pad();
  const auto px = [&](double v) { return ml + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto py = [&](double v) { return mt + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";

  for (int t = 0; t <= 5; ++t) {
    const double fx = xr.lo + (xr.hi - xr.lo) * t / 5.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * t / 5.0;
    out << "<line x1=\"" << px(fx) << "\" y1=\"" << mt << "\" x2=\"" << px(fx)
        << "\" y2=\"" << mt + ph << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << py(fy) << "\" x2=\"" << ml + pw
        << "\" y2=\"" << py(fy) << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << px(fx) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
        << "\" text-anchor=\"end\">" << num(fy) << "</text>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  out << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << mt + ph / 2
      << ")\">" << escape(ylabel) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % kPaletteSize];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.7\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size() && i < s.err.size(); ++i) {
      if (s.err[i] <= 0) continue;
      out << "<line x1=\"" << px(s.x[i]) << "\" y1=\"" << py(s.y[i] - s.err[i])
          << "\" x2=\"" << px(s.x[i]) << "\" y2=\"" << py(s.y[i] + s.err[i])
          << "\" stroke=\"" << color << "\"/>\n";
    }
    const double lx = ml + pw - 150, ly = mt + 14 + 16.0 * si;
    out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">"
        << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_heatmap(std::ostream& out, const std::string& title,
                   const std::vector<std::vector<double>>& grid,
                   const std::vector<double>& col_values,
                   const std::vector<double>& row_values,
                   const std::string& xlabel, const std::string& ylabel,
                   int width, int height) {
  if (grid.empty() || grid.front().empty())
    throw std::invalid_argument("write_heatmap: empty grid");
  const std::size_t rows = grid.size(), cols = grid.front().size();
  if (row_values.size() != rows || col_values.size() != cols)
    throw std::invalid_argument("write_heatmap: axis size mismatch");

  double lo = grid[0][0], hi = grid[0][0];
  for (const auto& r : grid) {
    if (r.size() != cols) throw std::invalid_argument("write_heatmap: ragged grid");
    for (double v : r) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi - lo < 1e-300) hi = lo + 1.0;

  const double ml = 70, mr = 80, mt = 40, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const double cw = pw / cols, ch = ph / rows;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";

  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double t = (grid[i][j] - lo) / (hi - lo);
      const int r255 = static_cast<int>(255 * t);
      const int b255 = static_cast<int>(255 * (1.0 - t));
      out << "<rect x=\"" << ml + j * cw << "\" y=\"" << mt + i * ch
          << "\" width=\"" << cw + 0.5 << "\" height=\"" << ch + 0.5
          << "\" fill=\"rgb(" << r255 << ",80," << b255 << ")\"/>\n";
    }
  }
  for (std::size_t j = 0; j < cols; j += std::max<std::size_t>(1, cols / 6))
    out << "<text x=\"" << ml + (j + 0.5) * cw << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\">" << num(col_values[j]) << "</text>\n";
  for (std::size_t i = 0; i < rows; i += std::max<std::size_t>(1, rows / 6))
    out << "<text x=\"" << ml - 8 << "\" y=\"" << mt + (i + 0.5) * ch + 4
        << "\" text-anchor=\"end\">" << num(row_values[i]) << "</text>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  out << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << mt + ph / 2
      << ")\">" << escape(ylabel) << "</text>\n";
  out << "<text x=\"" << ml + pw + 12 << "\" y=\"" << mt + 10 << "\">"
      << num(hi) << "</text>\n";
  out << "<text x=\"" << ml + pw + 12 << "\" y=\"" << mt + ph << "\">"
      << num(lo) << "</text>\n";
  out << "</svg>\n";
}

}  // namespace svg
}  // namespace anova
