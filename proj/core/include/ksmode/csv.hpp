#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ksmode/evolution.hpp"
#include "ksmode/spectra.hpp"

namespace ksmode::csv {

// 17 significant digits, round-trip exact
std::string format(double x);

// Equal-length columns under a header row.
void write_columns(const std::filesystem::path& path, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& columns);

// tau, norm, c0, c1, ...
void write_trace(const std::filesystem::path& path, const evolution::EvolutionTrace& trace);

// r, f for each named function on a shared grid
void write_functions(const std::filesystem::path& path, const RadialGrid& grid,
                     const std::vector<std::pair<std::string, const RadialFunction*>>& fns);

// l, re, im, residual, decay, origin, consistent, accepted (one row per candidate)
void write_scan(const std::filesystem::path& path, const spectra::ScanResult& scan);

}  // namespace ksmode::csv
