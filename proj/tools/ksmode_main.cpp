#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <ksmode/error.hpp>

#include "verify/checks.hpp"
#include "verify/config.hpp"

namespace {

using ksmode::verify::Report;
using ksmode::verify::RunConfig;

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

// flag -> config key; flags override values loaded from --config
const std::vector<Flag> kFlags{
    {"--n", "grid.n", "grid size"},
    {"--rmax", "grid.rmax", "outer radius"},
    {"--stretch", "grid.stretch", "uniform | geometric"},
    {"--ratio", "grid.ratio", "geometric ratio"},
    {"--l", "scan.l", "class index (spectrum; ggmt.l under ggmt)"},
    {"--threshold", "scan.threshold", "unstable threshold (spectrum)"},
    {"--alpha", "ggmt.alpha", "conjugation exponent (ggmt)"},
    {"--p", "ggmt.p", "GGMT exponent"},
    {"--theta", "ggmt.theta", "share of L kept (ggmt)"},
    {"--R", "ggmt.R", "interpolation radius"},
    {"--samples", "coercivity.samples", "random functions per class"},
    {"--seed", "coercivity.seed", "RNG seed"},
    {"--dt", "evolve.dt", "time step"},
    {"--horizon", "evolve.horizon", "horizon"},
    {"--amplitude", "evolve.amplitude", "perturbation size"},
    {"--output-dir", "output_dir", "report directory"},
    {"--threads", "threads", "worker threads"},
};

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;  // config key -> value
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--set", o.sets, "override: key=value (repeatable)");
  for (const Flag& f : kFlags)
    sub->add_option_function<std::string>(f.name, [&o, key = f.key](const std::string& v) { o.flags[key] = v; },
                                          f.help);
}

void write_diagnostics(const std::filesystem::path& dir, const std::string& command, const RunConfig& cfg,
                       const std::string& what) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream os(dir / (command + "_diagnostics.txt"));
  os << "command: " << command << "\nerror: " << what << "\nconfig_hash: " << cfg.hash_hex() << "\n\n"
     << cfg.canonical();
}

void print(const Report& rep) {
  for (const auto& c : rep.checks) {
    const char* status = c.pass ? "PASS" : (c.gating ? "FAIL" : "info");
    std::printf("%-5s %-52s value=%-24.17g tol=%.17g %s\n", status, c.name.c_str(), c.value, c.tolerance,
                c.note.c_str());
  }
  std::printf("%s: %s (%.1f s)\n", rep.command.c_str(), rep.passed() ? "all checks passed" : "CHECK FAILURE",
              rep.wall_time);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ksmode: verification runs for the spherical-class mode stability analysis"};
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "print the config schema and exit");
  Options opt;
  const std::vector<std::pair<const char*, const char*>> commands{
      {"profile-check", "profile closed forms and identities"},
      {"ggmt", "mu functional, GGMT count and constants"},
      {"spectrum", "unstable spectrum scan for one class"},
      {"waveop-check", "wave operator, commutator and conjugation"},
      {"coercivity", "random property suite for l >= 3"},
      {"evolve-linear", "linear renormalized evolution"},
      {"evolve-nonlinear", "nonlinear radial evolution"},
      {"shoot", "stable-manifold shooting"},
      {"verify-all", "every check above"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), opt);
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (list_keys) {
    for (const auto& e : ksmode::verify::default_entries())
      std::printf("%-22s %-14s %s\n", e.key, e.value, e.help);
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  if (command == "ggmt" && opt.flags.count("scan.l")) {
    opt.flags["ggmt.l"] = opt.flags["scan.l"];
    opt.flags.erase("scan.l");
  }

  RunConfig cfg;
  try {
    if (!opt.config.empty()) cfg.load_file(opt.config);
    for (const auto& [k, v] : opt.flags) cfg.set(k, v);
    for (const std::string& s : opt.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ksmode::PreconditionError("--set expects key=value, got '" + s + "'");
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    cfg.validate();
  } catch (const ksmode::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  const ksmode::verify::Env env{cfg.output_dir(), cfg.threads()};
  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  try {
    namespace v = ksmode::verify;
    if (command == "profile-check") rep = v::profile_check(cfg, env);
    else if (command == "ggmt") rep = v::ggmt_check(cfg, env);
    else if (command == "spectrum") {
      rep = v::spectrum_check(cfg, env, cfg.integer("scan.l"));
      rep.command = "spectrum";
    } else if (command == "waveop-check") rep = v::waveop_check(cfg, env);
    else if (command == "coercivity") rep = v::coercivity_check(cfg, env);
    else if (command == "evolve-linear") rep = v::evolve_linear_check(cfg, env);
    else if (command == "evolve-nonlinear") rep = v::evolve_nonlinear_check(cfg, env);
    else if (command == "shoot") rep = v::shoot_check(cfg, env);
    else rep = v::verify_all(cfg, env);
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.write(env.out);
  } catch (const ksmode::PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    write_diagnostics(env.out, command, cfg, e.what());
    return 3;
  }
  print(rep);
  std::printf("report: %s\n", (env.out / (rep.command + ".json")).string().c_str());
  return rep.passed() ? 0 : 1;
}
