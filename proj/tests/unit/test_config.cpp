#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <ksmode/error.hpp>

#include "verify/config.hpp"
#include "verify/report.hpp"

using namespace ksmode;
using namespace ksmode::verify;

TEST_CASE("defaults validate and keys are closed") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.entries().size() == default_entries().size());
  CHECK_THROWS_AS(c.set("grid.nn", "5"), PreconditionError);
  CHECK_THROWS_AS(c.num("nope"), PreconditionError);
}

TEST_CASE("invalid values are rejected") {
  auto rejects = [](const char* k, const char* v) {
    RunConfig c;
    c.set(k, v);
    return [&] {
      try {
        c.validate();
      } catch (const PreconditionError&) {
        return true;
      }
      return false;
    }();
  };
  CHECK(rejects("ggmt.alpha", "3"));
  CHECK(rejects("evolve.dt", "0.1"));
  CHECK(rejects("grid.n", "abc"));
  CHECK(rejects("grid.stretch", "geometric"));  // ratio 1.0
  CHECK(rejects("coercivity.ls", "1,3"));
  CHECK(rejects("scan.ns", "200,x"));
  CHECK(rejects("threads", "0"));
  CHECK_FALSE(rejects("grid.n", "400"));
}

TEST_CASE("config hash") {
  RunConfig a, b;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash_hex().size() == 16);
  b.set("output_dir", "/tmp/elsewhere");
  b.set("threads", "4");
  CHECK(a.hash() == b.hash());
  b.set("grid.n", "401");
  CHECK(a.hash() != b.hash());
  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("config files") {
  const auto p = std::filesystem::temp_directory_path() / "ksmode_test_config.cfg";
  {
    std::ofstream os(p);
    os << "# comment line\n\n  grid.n = 300   # trailing\nscan.ns=100, 200\n";
  }
  RunConfig c;
  c.load_file(p);
  CHECK(c.integer("grid.n") == 300);
  CHECK(c.int_list("scan.ns") == std::vector<int>{100, 200});
  {
    std::ofstream os(p);
    os << "grid.n 300\n";
  }
  CHECK_THROWS_AS(c.load_file(p), PreconditionError);
  std::filesystem::remove(p);
  CHECK_THROWS_AS(c.load_file(p), PreconditionError);
}

TEST_CASE("reports") {
  Report r;
  r.command = "x";
  CHECK(r.at_most("a", "t", 1.0, 1.0).pass);
  CHECK_FALSE(r.at_least("b", "t", 0.5, 1.0).pass);
  CHECK(r.near("c", "t", 1.05, 1.0, 0.1).pass);
  CHECK_FALSE(r.at_most("d", "t", std::numeric_limits<double>::quiet_NaN(), 1.0).pass);
  CHECK_FALSE(r.passed());

  Report g;
  g.command = "g";
  g.flag("ok", "t", true);
  auto& info = g.flag("info", "t", false);
  info.gating = false;
  CHECK(g.passed());
  CHECK(g.to_json(false).dump() == g.to_json(false).dump());
  CHECK_FALSE(g.to_json(false).contains("timestamp"));
  CHECK(g.to_json(true).contains("timestamp"));
  CHECK(g.to_json(false)["pass"] == true);

  Report all;
  all.command = "all";
  all.append(g);
  REQUIRE(all.checks.size() == 2);
  CHECK(all.checks[0].name == "g/ok");
  CHECK(all.passed());
}
