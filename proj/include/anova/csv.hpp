#ifndef ANOVA_CSV_HPP
#define ANOVA_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "anova/empirical.hpp"
#include "anova/simulate.hpp"

namespace anova {
namespace csv {

// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

Table read(std::istream& in);
Table read_file(const std::string& path);

// Long format, one (axis point, quantity) per row.
void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows);

struct EmpiricalRow {
  std::string dataset;
  int n, p, n_s, n_i;
  double lambda;
  std::uint64_t seed;
  EmpiricalEstimates est;
};

void write_empirical(std::ostream& out, const std::vector<EmpiricalRow>& rows);

// One row per theory quantity at a parameter point.
void write_pairs(std::ostream& out,
                 const std::vector<std::pair<std::string, double>>& pairs);

}  // namespace csv
}  // namespace anova

#endif  // ANOVA_CSV_HPP
