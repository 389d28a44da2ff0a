#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "geoflow/experiment.hpp"
#include "geoflow/serialize.hpp"

// Exercises the installed binary end to end (exit codes, artifacts).

namespace {

const char* cli_path() { return GEOFLOW_CLI_PATH; }

int run_command(const std::string& args, const std::string& log) {
  const std::string cmd =
      std::string(cli_path()) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("presets subcommand lists the shipped presets") {
  const auto log = std::filesystem::temp_directory_path() / "gf_presets.log";
  CHECK(run_command("presets", log.string()) == 0);
  const std::string out = slurp(log);
  for (const auto& name : geoflow::preset_names())
    CHECK(out.find(name) != std::string::npos);
}

TEST_CASE("validate accepts every preset") {
  const auto log = std::filesystem::temp_directory_path() / "gf_validate.log";
  for (const auto& name : geoflow::preset_names()) {
    CAPTURE(name);
    CHECK(run_command("validate preset:" + name, log.string()) == 0);
  }
}

TEST_CASE("validate rejects a malformed config with exit 2") {
  auto cfg = geoflow::to_json(geoflow::preset("w-entropy"));
  cfg["params"]["m"] = 1.0;  // m = n with a W_m dissipation check selected
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "gf_bad_config.json";
  geoflow::save_json(cfg, path);
  const auto log = dir / "gf_bad.log";
  CHECK(run_command("validate " + path.string(), log.string()) == 2);
  const std::string out = slurp(log);
  CHECK(out.find("must exceed") != std::string::npos);

  // run refuses it the same way
  CHECK(run_command("run " + path.string(), log.string()) == 2);
  std::filesystem::remove(path);
}

TEST_CASE("missing config exits 2") {
  const auto log = std::filesystem::temp_directory_path() / "gf_missing.log";
  CHECK(run_command("run /no/such/config.json", log.string()) == 2);
}

TEST_CASE("run executes the stationary preset end to end") {
  const auto dir =
      std::filesystem::temp_directory_path() / "gf_cli_stationary";
  std::filesystem::remove_all(dir);
  const auto log = std::filesystem::temp_directory_path() / "gf_run.log";
  CHECK(run_command("run stationary --out " + dir.string(), log.string()) ==
        0);
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "entropy_report.csv"));
  auto report = geoflow::load_json(dir / "report.json");
  CHECK(report.at("overall") == "pass");
  std::filesystem::remove_all(dir);
}

TEST_CASE("presets dump emits loadable json") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto log = dir / "gf_dump.log";
  CHECK(run_command("presets stationary", log.string()) == 0);
  auto j = geoflow::load_json(log);
  CHECK(j.at("name") == "stationary");
  CHECK(geoflow::validate_config(j).empty());
}

TEST_CASE("batch runs every config in a directory") {
  const auto dir = std::filesystem::temp_directory_path() / "gf_batch";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (const char* name : {"stationary", "self-adjointness"}) {
    auto cfg = geoflow::to_json(geoflow::preset(name));
    cfg["output_dir"] = (dir / (std::string(name) + "_out")).string();
    geoflow::save_json(cfg, dir / (std::string(name) + ".json"));
  }
  const auto log = std::filesystem::temp_directory_path() / "gf_batch.log";
  CHECK(run_command("batch " + dir.string() + " --jobs 2", log.string()) == 0);
  CHECK(std::filesystem::exists(dir / "stationary_out" / "report.json"));
  CHECK(std::filesystem::exists(dir / "self-adjointness_out" / "report.json"));
  std::filesystem::remove_all(dir);
}
