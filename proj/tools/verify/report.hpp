#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ksmode::verify {

struct Check {
  std::string name;
  std::string tag;  // short label of the statement being checked
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool gating = true;  // informational checks are reported but do not set the exit code
  std::string note;
};

struct Report {
  std::string command;
  std::string config_hash;
  std::vector<Check> checks;
  std::vector<std::string> files;  // detail files written, relative to the output dir
  double wall_time = 0.0;

  // value <= tol
  Check& at_most(std::string name, std::string tag, double value, double tol);
  // value >= tol
  Check& at_least(std::string name, std::string tag, double value, double tol);
  // |value - target| <= tol; tolerance field holds tol, note records the target
  Check& near(std::string name, std::string tag, double value, double target, double tol);
  Check& flag(std::string name, std::string tag, bool ok, std::string note = {});

  bool passed() const;  // all gating checks pass
  void append(const Report& other);
  nlohmann::json to_json(bool with_timestamp = true) const;
  void write(const std::filesystem::path& dir) const;  // <dir>/<command>.json
};

}  // namespace ksmode::verify
