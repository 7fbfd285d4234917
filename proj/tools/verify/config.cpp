#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <ksmode/error.hpp>

namespace ksmode::verify {

const std::vector<ConfigEntry>& default_entries() {
  static const std::vector<ConfigEntry> e{
      {"grid.n", "800", "finest grid size"},
      {"grid.rmax", "40", "outer radius"},
      {"grid.stretch", "uniform", "uniform | geometric"},
      {"grid.ratio", "1.0", "geometric spacing ratio"},
      {"scan.l", "0", "class for the spectrum subcommand"},
      {"scan.threshold", "0.05", "Re(lambda) < -threshold counts as unstable"},
      {"scan.ns", "200,400,800", "refinement ladder"},
      {"scan.rmaxs", "40,80", "domain ladder"},
      {"scan.abs_tol", "5e-3", "eigenvalue agreement along the ladder"},
      {"ggmt.l", "2", "class"},
      {"ggmt.alpha", "0.2", "conjugation exponent"},
      {"ggmt.p", "4", "GGMT exponent"},
      {"ggmt.theta", "0.5", "share of L kept in the potential"},
      {"ggmt.R", "4", "interpolation radius"},
      {"w.amp", "1", "W amplitude"},
      {"w.c0", "0.01", "W core"},
      {"w.power", "1.2", "W decay power"},
      {"w.floor", "0.02", "W floor"},
      {"coercivity.samples", "50", "random functions per class"},
      {"coercivity.ls", "3,4,5,6", "classes"},
      {"coercivity.seed", "1729", "RNG seed"},
      {"evolve.n", "400", "grid size for evolution runs"},
      {"evolve.rmax", "40", "outer radius for evolution runs"},
      {"evolve.dt", "0.01", "time step"},
      {"evolve.horizon", "5", "steady-state horizon"},
      {"evolve.amplitude", "1e-3", "perturbation size"},
      {"evolve.amplitude2", "2e-3", "second perturbation size for the scaling fit"},
      {"shoot.dt", "0.02", "time step for shooting runs"},
      {"shoot.horizon", "8", "shooting horizon"},
      {"shoot.bracket", "1e-3", "half-width of the amplitude bracket"},
      {"output_dir", "", "report directory (default $KSMODE_OUTPUT_DIR or ./ksmode_out)"},
      {"threads", "1", "worker threads for independent tasks"},
  };
  return e;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw PreconditionError("config " + key + ": " + why);
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& e : default_entries()) kv_[e.key] = e.value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!kv_.count(key)) throw PreconditionError("unknown config key '" + key + "'");
  kv_[key] = trim(value);
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw PreconditionError("cannot read config file " + path.string());
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw PreconditionError(path.string() + ":" + std::to_string(no) + ": expected key = value");
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::string RunConfig::canonical() const {
  std::string s;
  for (const auto& [k, v] : kv_) {
    if (k == "output_dir" || k == "threads") continue;  // do not affect results
    s += k + "=" + v + "\n";
  }
  return s;
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

std::string RunConfig::str(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw PreconditionError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::num(const std::string& key) const {
  const std::string v = str(key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(x)) bad(key, "'" + v + "' is not a finite number");
  return x;
}

int RunConfig::integer(const std::string& key) const {
  const double x = num(key);
  if (x != std::floor(x) || std::abs(x) > 1e9) bad(key, "expected an integer");
  return static_cast<int>(x);
}

std::vector<double> RunConfig::num_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(str(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    char* end = nullptr;
    const double x = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || !std::isfinite(x)) bad(key, "'" + item + "' is not a number");
    out.push_back(x);
  }
  if (out.empty()) bad(key, "empty list");
  return out;
}

std::vector<int> RunConfig::int_list(const std::string& key) const {
  std::vector<int> out;
  for (double x : num_list(key)) {
    if (x != std::floor(x)) bad(key, "expected integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

Stretch RunConfig::stretch() const {
  const std::string s = str("grid.stretch");
  if (s == "uniform") return Stretch::uniform();
  if (s == "geometric") {
    const double q = num("grid.ratio");
    if (!(q > 1.0)) bad("grid.ratio", "geometric stretching needs ratio > 1");
    return Stretch::geometric(q);
  }
  bad("grid.stretch", "expected uniform or geometric");
}

GridPtr RunConfig::grid() const { return grid(integer("grid.n"), num("grid.rmax")); }

GridPtr RunConfig::grid(int n, double rmax) const { return make_grid(n, rmax, stretch()); }

spectra::ScanConfig RunConfig::scan() const {
  spectra::ScanConfig c;
  c.ns = int_list("scan.ns");
  c.rmaxs = num_list("scan.rmaxs");
  c.threshold = num("scan.threshold");
  c.abs_tol = num("scan.abs_tol");
  c.stretch = stretch();
  return c;
}

ggmt::PipelineParams RunConfig::ggmt() const {
  ggmt::PipelineParams p;
  p.l = integer("ggmt.l");
  p.alpha = num("ggmt.alpha");
  p.p = num("ggmt.p");
  p.theta = num("ggmt.theta");
  p.R = num("ggmt.R");
  p.w = {num("w.amp"), num("w.c0"), num("w.power"), num("w.floor")};
  return p;
}

std::filesystem::path RunConfig::output_dir() const {
  const std::string v = str("output_dir");
  if (!v.empty()) return v;
  if (const char* env = std::getenv("KSMODE_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "ksmode_out";
}

int RunConfig::threads() const { return integer("threads"); }

void RunConfig::validate() const {
  const int n = integer("grid.n");
  if (n < 16) bad("grid.n", "must be >= 16");
  if (!(num("grid.rmax") > 0.0)) bad("grid.rmax", "must be positive");
  (void)stretch();
  if (integer("scan.l") < 0) bad("scan.l", "must be >= 0");
  for (int m : int_list("scan.ns"))
    if (m < 16) bad("scan.ns", "grid sizes must be >= 16");
  for (double r : num_list("scan.rmaxs"))
    if (!(r > 0.0)) bad("scan.rmaxs", "radii must be positive");
  if (!(num("scan.threshold") >= 0.0)) bad("scan.threshold", "must be >= 0");
  if (!(num("scan.abs_tol") > 0.0)) bad("scan.abs_tol", "must be positive");

  const ggmt::PipelineParams p = ggmt();
  if (p.l < 0) bad("ggmt.l", "must be >= 0");
  if (!(p.alpha >= -p.l && p.alpha < p.l + 0.5)) bad("ggmt.alpha", "must lie in [-l, l + 1/2)");
  if (!(p.p > 1.0)) bad("ggmt.p", "must exceed 1");
  if (!(p.theta >= 0.0 && p.theta <= 1.0)) bad("ggmt.theta", "must lie in [0, 1]");
  if (!(p.R > 0.0)) bad("ggmt.R", "must be positive");
  p.w.validate(p.l, p.alpha);

  if (integer("coercivity.samples") < 1) bad("coercivity.samples", "must be >= 1");
  for (int l : int_list("coercivity.ls"))
    if (l < 2) bad("coercivity.ls", "classes must be >= 2 (the interpolation bound needs l >= 2)");

  if (integer("evolve.n") < 16) bad("evolve.n", "must be >= 16");
  if (!(num("evolve.rmax") > 0.0)) bad("evolve.rmax", "must be positive");
  for (const char* k : {"evolve.dt", "shoot.dt"}) {
    const double dt = num(k);
    if (!(dt > 0.0 && dt <= 0.05)) bad(k, "must lie in (0, 0.05]");
  }
  for (const char* k : {"evolve.horizon", "shoot.horizon", "evolve.amplitude", "evolve.amplitude2", "shoot.bracket"})
    if (!(num(k) > 0.0)) bad(k, "must be positive");
  if (threads() < 1) bad("threads", "must be >= 1");
}

}  // namespace ksmode::verify
