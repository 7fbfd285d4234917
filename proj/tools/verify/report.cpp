#include "report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

#include <ksmode/csv.hpp>
#include <ksmode/error.hpp>

namespace ksmode::verify {

namespace {

Check& push(Report& r, Check c) {
  if (!std::isfinite(c.value)) c.pass = false;
  r.checks.push_back(std::move(c));
  return r.checks.back();
}

}  // namespace

Check& Report::at_most(std::string name, std::string tag, double value, double tol) {
  return push(*this, {std::move(name), std::move(tag), value, tol, value <= tol, true, "<="});
}

Check& Report::at_least(std::string name, std::string tag, double value, double tol) {
  return push(*this, {std::move(name), std::move(tag), value, tol, value >= tol, true, ">="});
}

Check& Report::near(std::string name, std::string tag, double value, double target, double tol) {
  return push(*this, {std::move(name), std::move(tag), value, tol, std::abs(value - target) <= tol, true,
                      "target " + csv::format(target)});
}

Check& Report::flag(std::string name, std::string tag, bool ok, std::string note) {
  return push(*this, {std::move(name), std::move(tag), ok ? 1.0 : 0.0, 1.0, ok, true, std::move(note)});
}

bool Report::passed() const {
  for (const Check& c : checks)
    if (c.gating && !c.pass) return false;
  return true;
}

void Report::append(const Report& other) {
  for (Check c : other.checks) {
    c.name = other.command + "/" + c.name;
    checks.push_back(std::move(c));
  }
  files.insert(files.end(), other.files.begin(), other.files.end());
}

nlohmann::json Report::to_json(bool with_timestamp) const {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["pass"] = passed();
  nlohmann::json arr = nlohmann::json::array();
  for (const Check& c : checks) {
    nlohmann::json jc{{"name", c.name},         {"paper_tag", c.tag}, {"value", c.value},
                      {"tolerance", c.tolerance}, {"pass", c.pass},         {"gating", c.gating}};
    if (!c.note.empty()) jc["note"] = c.note;
    arr.push_back(std::move(jc));
  }
  j["checks"] = std::move(arr);
  j["files"] = files;
  j["wall_time"] = wall_time;
  if (with_timestamp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    j["timestamp"] = buf;
  }
  return j;
}

void Report::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const auto path = dir / (command + ".json");
  std::ofstream os(path);
  if (!os) throw PreconditionError("cannot write " + path.string());
  os << to_json().dump(2) << '\n';
}

}  // namespace ksmode::verify
