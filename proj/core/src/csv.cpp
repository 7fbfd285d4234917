#include "ksmode/csv.hpp"

#include <cstdio>
#include <fstream>

#include "ksmode/error.hpp"

namespace ksmode::csv {

namespace {

std::ofstream open(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw PreconditionError("cannot open " + path.string() + " for writing");
  return os;
}

void write_row(std::ofstream& os, const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << '\n';
}

}  // namespace

std::string format(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_columns(const std::filesystem::path& path, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw PreconditionError("write_columns: header/column count mismatch");
  const size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw PreconditionError("write_columns: columns differ in length");
  std::ofstream os = open(path);
  write_row(os, header);
  std::vector<std::string> cells(columns.size());
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < columns.size(); ++j) cells[j] = format(columns[j][i]);
    write_row(os, cells);
  }
}

void write_trace(const std::filesystem::path& path, const evolution::EvolutionTrace& trace) {
  std::vector<std::string> header{"tau", "norm"};
  std::vector<std::vector<double>> cols{trace.times, trace.norms};
  if (!trace.mode_coeffs.empty()) {
    const auto k = trace.mode_coeffs.front().size();
    for (Eigen::Index j = 0; j < k; ++j) {
      header.push_back("c" + std::to_string(j));
      std::vector<double> c;
      for (const auto& v : trace.mode_coeffs) c.push_back(v[j]);
      cols.push_back(std::move(c));
    }
  }
  write_columns(path, header, cols);
}

void write_functions(const std::filesystem::path& path, const RadialGrid& grid,
                     const std::vector<std::pair<std::string, const RadialFunction*>>& fns) {
  std::vector<std::string> header{"r"};
  std::vector<std::vector<double>> cols{{grid.r().data(), grid.r().data() + grid.size()}};
  for (const auto& [name, f] : fns) {
    if (f->size() != grid.size()) throw PreconditionError("write_functions: size mismatch for " + name);
    header.push_back(name);
    cols.emplace_back(f->values().data(), f->values().data() + f->size());
  }
  write_columns(path, header, cols);
}

void write_scan(const std::filesystem::path& path, const spectra::ScanResult& scan) {
  std::ofstream os = open(path);
  write_row(os, {"l", "re", "im", "residual", "decay_exponent", "origin_exponent", "consistent", "accepted"});
  for (const auto& c : scan.candidates)
    write_row(os, {std::to_string(scan.l), format(c.lambda.real()), format(c.lambda.imag()), format(c.residual),
                   format(c.decay_exponent), format(c.origin_exponent), c.consistent ? "1" : "0",
                   c.accepted ? "1" : "0"});
}

}  // namespace ksmode::csv
