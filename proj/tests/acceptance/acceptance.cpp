// Acceptance suite: executes each shipped preset and prints one line per
// criterion check at its pinned tolerance. Run through ctest or directly;
// a nonzero exit means at least one criterion failed.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>

#include "geoflow/experiment.hpp"

using namespace geoflow;

namespace {

std::filesystem::path out_root() {
  auto dir = std::filesystem::temp_directory_path() / "geoflow_acceptance";
  std::filesystem::create_directories(dir);
  return dir;
}

// Runs a preset, prints one verdict line per check, asserts every check.
void run_criterion(int number, const std::string& preset_name) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config = preset(preset_name);
  RunVerdict verdict = run_experiment(config, out_root() / preset_name);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  for (const auto& c : verdict.checks) {
    std::printf("[%s] criterion %d (%s :: %s): measured %.3e, tolerance %.3e\n",
                c.pass ? "PASS" : "FAIL", number, preset_name.c_str(),
                c.name.c_str(), c.measured, c.tolerance);
    std::fflush(stdout);
    CAPTURE(preset_name);
    CAPTURE(c.name);
    CHECK(c.pass);
  }
  std::printf("         criterion %d runtime: %.1f s\n", number, seconds);
  CHECK(verdict.overall);
}

}  // namespace

TEST_CASE("criterion 1: warped-product identity suite") {
  run_criterion(1, "warped-identities");
}

TEST_CASE("criterion 2: entropy dissipation") {
  run_criterion(2, "entropy-dissipation");
}

TEST_CASE("criterion 3: W-entropy formula") { run_criterion(3, "w-entropy"); }

TEST_CASE("criterion 4: monotonicity under the super flow") {
  run_criterion(4, "super-flow-monotonicity");
}

TEST_CASE("criterion 5: gaussian baseline") {
  run_criterion(5, "gaussian-baseline");
}

TEST_CASE("criterion 6: K-variants") { run_criterion(6, "k-variants"); }

TEST_CASE("criterion 7: lott flow") { run_criterion(7, "lott-flow"); }

TEST_CASE("criterion 8: log-sobolev") { run_criterion(8, "log-sobolev"); }

TEST_CASE("criterion 9: convergence orders") {
  run_criterion(9, "convergence-orders");
}

TEST_CASE("supporting presets stay green") {
  run_criterion(0, "stationary");
  run_criterion(0, "self-adjointness");
}
