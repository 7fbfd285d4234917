#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "config.hpp"
#include "report.hpp"

namespace ksmode::verify {

struct Env {
  std::filesystem::path out;  // detail files go here
  int threads = 1;
};

Report profile_check(const RunConfig& cfg, const Env& env);
Report ggmt_check(const RunConfig& cfg, const Env& env);
Report spectrum_check(const RunConfig& cfg, const Env& env, int l);
Report waveop_check(const RunConfig& cfg, const Env& env);
Report coercivity_check(const RunConfig& cfg, const Env& env);
Report evolve_linear_check(const RunConfig& cfg, const Env& env);
Report evolve_nonlinear_check(const RunConfig& cfg, const Env& env);
Report shoot_check(const RunConfig& cfg, const Env& env);
// Every subcommand above, spectra for l = 0..6, aggregated.
Report verify_all(const RunConfig& cfg, const Env& env);

// Runs independent tasks on up to `threads` workers; results keep task order.
std::vector<Report> run_tasks(const std::vector<std::function<Report()>>& tasks, int threads);

// Smooth compactly supported class-l test function r^l Σ c_k exp(-(r-a_k)^2/s_k^2) χ(r/R_c).
struct RandomBump {
  int l = 3;
  std::vector<double> c, a, s;
  double cutoff = 8.0;
  double operator()(double r) const;
};
RandomBump random_bump(int l, std::uint64_t seed);

}  // namespace ksmode::verify
