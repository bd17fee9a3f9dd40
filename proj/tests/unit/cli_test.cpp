#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include <nlohmann/json.hpp>

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EDM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "describe" / "manifest.json");
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli("") == 2);
  CHECK(run_cli("run --folds 1") == 2);
  CHECK(run_cli("run --no-such-flag") == 2);
  CHECK(run_cli("run --balance magic") == 2);
  CHECK(run_cli("run --config /nonexistent/config.json") == 2);
  CHECK(run_cli("validate --path /nonexistent/d1") == 2);
  CHECK(run_cli("--version") == 0);
}

TEST_CASE("flags override the config file, which overrides defaults") {
  testing::TempDir dir("cli");
  {
    std::ofstream cfg(dir.path / "c.json");
    cfg << R"({"seed": 7, "folds": 4, "datasets": [{"id": "D1", "source": "synthetic", "n_learners": 30}]})";
  }
  const auto cfg = (dir.path / "c.json").string();
  const auto out = dir.path / "out";

  REQUIRE(run_cli("run --experiment describe --config " + cfg + " --out " + out.string()) == 0);
  auto m = manifest(out);
  CHECK(m.at("seed") == 7);
  CHECK(m.at("config").at("folds") == 4);
  CHECK(m.at("config").at("smote_k") == 5);

  REQUIRE(run_cli("run --experiment describe --config " + cfg + " --seed 9 --out " + out.string()) == 0);
  m = manifest(out);
  CHECK(m.at("seed") == 9);
  CHECK(m.at("config").at("folds") == 4);

  REQUIRE(run_cli("describe --out " + out.string()) == 0);
  CHECK(manifest(out).at("seed") == 42);
}

TEST_CASE("synth output validates and ingests") {
  testing::TempDir dir("cli_synth");
  const auto data = (dir.path / "d1").string();
  REQUIRE(run_cli("synth --out " + data + " --n 40 --seed 3") == 0);
  CHECK(run_cli("validate --source d1 --path " + data) == 0);
  CHECK(run_cli("ingest --source d1 --path " + data + " --out " + (dir.path / "f.csv").string()) == 0);
  CHECK(std::filesystem::exists(dir.path / "f.csv"));
}
