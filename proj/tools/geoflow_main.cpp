// Declarative experiment runner: parse a JSON config (or a named preset)
// describing manifold, schedule, flow and functionals; execute; emit
// report.json, CSV series and plot data, with a machine-readable verdict.
//
// Exit codes: 0 all selected checks pass, 1 a check failed,
//             2 configuration invalid, 3 solver/runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "geoflow/errors.hpp"
#include "geoflow/experiment.hpp"
#include "geoflow/serialize.hpp"

namespace {

using geoflow::ExperimentConfig;

ExperimentConfig load_config(const std::string& arg) {
  std::string name = arg;
  if (name.rfind("preset:", 0) == 0) name = name.substr(7);
  if (geoflow::is_preset_name(name)) return geoflow::preset(name);
  if (!std::filesystem::exists(arg))
    throw geoflow::config_error("no such config file or preset: " + arg);
  return geoflow::config_from_json(geoflow::load_json(arg));
}

int run_one(const ExperimentConfig& config, const std::string& out_override,
            bool quiet = false) {
  std::filesystem::path out =
      out_override.empty() ? geoflow::resolve_output_dir(config)
                           : std::filesystem::path(out_override);
  geoflow::RunVerdict verdict = geoflow::run_experiment(config, out);
  for (const auto& c : verdict.checks) {
    if (quiet && c.pass) continue;
    std::printf("[%s] %s: measured %.3e vs tolerance %.3e%s%s\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured,
                c.tolerance, c.note.empty() ? "" : "  -- ",
                c.note.c_str());
  }
  std::printf("%s: %s (report: %s)\n", config.name.c_str(),
              verdict.overall ? "pass" : "FAIL",
              (out / "report.json").string().c_str());
  return verdict.overall ? 0 : 1;
}

int validate_one(const std::string& arg) {
  nlohmann::json j;
  std::string name = arg;
  if (name.rfind("preset:", 0) == 0) name = name.substr(7);
  if (geoflow::is_preset_name(name)) {
    j = geoflow::to_json(geoflow::preset(name));
  } else {
    if (!std::filesystem::exists(arg)) {
      std::fprintf(stderr, "no such config file or preset: %s\n", arg.c_str());
      return 2;
    }
    j = geoflow::load_json(arg);
  }
  auto diags = geoflow::validate_config(j);
  if (diags.empty()) {
    std::printf("%s: valid\n", arg.c_str());
    return 0;
  }
  for (const auto& d : diags) std::fprintf(stderr, "error: %s\n", d.c_str());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geoflow: entropy and curvature checks for weighted heat "
               "flows on periodic grids"};
  app.require_subcommand(1);

  std::string run_target, out_dir;
  auto* run_cmd = app.add_subcommand("run", "execute a config or preset");
  run_cmd->add_option("config", run_target, "config path or preset name")
      ->required();
  run_cmd->add_option("--out", out_dir, "output directory override");

  std::string validate_target;
  auto* validate_cmd =
      app.add_subcommand("validate", "static-check a config or preset");
  validate_cmd->add_option("config", validate_target, "config path or preset")
      ->required();

  std::string preset_name;
  auto* presets_cmd =
      app.add_subcommand("presets", "list presets, or dump one as JSON");
  presets_cmd->add_option("name", preset_name, "preset to dump");

  std::string batch_dir;
  int jobs = 1;
  auto* batch_cmd =
      app.add_subcommand("batch", "run every *.json config in a directory");
  batch_cmd->add_option("dir", batch_dir, "directory of configs")->required();
  batch_cmd->add_option("--jobs", jobs, "concurrent runs")
      ->check(CLI::Range(1, 16));

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return run_one(load_config(run_target), out_dir);
    }
    if (validate_cmd->parsed()) {
      return validate_one(validate_target);
    }
    if (presets_cmd->parsed()) {
      if (preset_name.empty()) {
        for (const auto& name : geoflow::preset_names())
          std::printf("%s\n", name.c_str());
      } else {
        std::cout << geoflow::to_json(geoflow::preset(preset_name)).dump(2)
                  << "\n";
      }
      return 0;
    }
    if (batch_cmd->parsed()) {
      std::vector<std::filesystem::path> configs;
      for (const auto& entry : std::filesystem::directory_iterator(batch_dir))
        if (entry.path().extension() == ".json") configs.push_back(entry.path());
      std::sort(configs.begin(), configs.end());
      if (configs.empty()) {
        std::fprintf(stderr, "no *.json configs in %s\n", batch_dir.c_str());
        return 2;
      }
      int rc = 0;
      std::vector<std::future<int>> slots;
      for (const auto& path : configs) {
        if (static_cast<int>(slots.size()) >= jobs) {
          rc = std::max(rc, slots.front().get());
          slots.erase(slots.begin());
        }
        slots.push_back(std::async(
            jobs > 1 ? std::launch::async : std::launch::deferred,
            [path] { return run_one(load_config(path.string()), ""); }));
      }
      for (auto& slot : slots) rc = std::max(rc, slot.get());
      return rc;
    }
  } catch (const geoflow::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const geoflow::input_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const geoflow::error& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
