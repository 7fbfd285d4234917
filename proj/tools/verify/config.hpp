#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <ksmode/ggmt.hpp>
#include <ksmode/radial.hpp>
#include <ksmode/spectra.hpp>

namespace ksmode::verify {

// Flat key = value configuration. Keys and defaults are listed in
// default_entries(); unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  // Lines "key = value"; '#' starts a comment. Throws PreconditionError.
  void load_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);
  // Parses every field and checks module preconditions. Throws PreconditionError.
  void validate() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }
  std::string canonical() const;      // sorted "key=value\n" lines
  std::uint64_t hash() const;         // FNV-1a of canonical()
  std::string hash_hex() const;

  double num(const std::string& key) const;
  int integer(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::vector<double> num_list(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;

  Stretch stretch() const;
  GridPtr grid() const;                         // grid.n, grid.rmax, grid.stretch
  GridPtr grid(int n, double rmax) const;
  spectra::ScanConfig scan() const;
  ggmt::PipelineParams ggmt() const;
  std::filesystem::path output_dir() const;
  int threads() const;

 private:
  std::map<std::string, std::string> kv_;
};

// key, default value, one-line description
struct ConfigEntry {
  const char* key;
  const char* value;
  const char* help;
};
const std::vector<ConfigEntry>& default_entries();

std::uint64_t fnv1a(const std::string& s);

}  // namespace ksmode::verify
