#include "anova/csv.hpp"

#include <charconv>
#include <istream>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace anova {
namespace csv {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

Table read(std::istream& in) {
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw std::runtime_error("csv: ragged row");
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read(in);
}

void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "axis,value,quantity,estimate,std,runs,n,d,p,lambda,alpha2,sigma2,"
         "activation,data_law,seed\n";
  for (const auto& r : rows) {
    out << r.axis << ',' << format_double(r.value) << ',' << r.quantity << ','
        << format_double(r.estimate) << ',' << format_double(r.stdev) << ','
        << r.cfg.runs << ',' << r.cfg.n << ',' << r.cfg.d << ',' << r.cfg.p
        << ',' << format_double(r.cfg.lambda) << ','
        << format_double(r.cfg.alpha2) << ',' << format_double(r.cfg.sigma2)
        << ',' << r.cfg.activation.name() << ',' << r.cfg.data_law.name()
        << ',' << r.cfg.seed << '\n';
  }
}

void write_empirical(std::ostream& out,
                     const std::vector<EmpiricalRow>& rows) {
  out << "dataset,n,p,n_s,n_i,lambda,seed,quantity,estimate\n";
  for (const auto& r : rows) {
    const std::pair<const char*, double> quantities[] = {
        {"mse", r.est.mse},   {"bias2", r.est.bias2},
        {"variance", r.est.variance}, {"v_s", r.est.v_s},
        {"v_i", r.est.v_i},   {"rest", r.est.rest}};
    for (const auto& [name, value] : quantities) {
      out << r.dataset << ',' << r.n << ',' << r.p << ',' << r.n_s << ','
          << r.n_i << ',' << format_double(r.lambda) << ',' << r.seed << ','
          << name << ',' << format_double(value) << '\n';
    }
  }
}

void write_pairs(std::ostream& out,
                 const std::vector<std::pair<std::string, double>>& pairs) {
  out << "quantity,value\n";
  for (const auto& [name, value] : pairs)
    out << name << ',' << format_double(value) << '\n';
}

}  // namespace csv
}  // namespace anova
