#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/field.hpp"
#include "geoflow/schedule.hpp"

namespace geoflow {

/// Smooth periodic scalar as a truncated Fourier series:
/// constant + sum of per-axis harmonics amp_c cos(2 pi k x_a / L_a)
///                                    + amp_s sin(2 pi k x_a / L_a).
struct AnalyticScalar {
  struct Term {
    int axis = 0;
    int k = 1;
    double cos_amp = 0.0;
    double sin_amp = 0.0;
  };
  double constant = 0.0;
  std::vector<Term> terms;

  double eval(const Grid& grid, const double* x) const;
  ScalarField sample(GridPtr grid) const;
};

struct GridSpec {
  std::vector<int> nodes;
  std::vector<double> periods;
};

struct MetricSpec {
  enum class Family { flat, conformal };  // conformal: g = e^{2a} * identity
  Family family = Family::flat;
  AnalyticScalar a;
};

struct InitialDataSpec {
  enum class Kind { uniform, exp_bump, wrapped_gaussian };
  Kind kind = Kind::uniform;
  AnalyticScalar bump;    // u0 ~ exp(bump)
  double t_heat = 0.01;   // kernel age for wrapped_gaussian
  double center = 0.0;
};

struct ScheduleSpec {
  enum class Type { fixed, scaled_linear, lott };
  Type type = Type::fixed;
  double rate = 0.0;  // scaled_linear: g(t) = (1 + rate t) g0
};

struct SolverSpec {
  double t0 = 0.05;
  double t_end = 0.5;
  double dt_out = 1e-3;
  double safety = 0.2;
};

struct ParamSpec {
  double m = 3.0;
  double K = 0.0;
  bool K_auto = false;  // K = max(0, -min eig Ric_{m,n}(L)) at t0
  double q = 1.0;
};

struct ExperimentConfig {
  std::string name;
  unsigned long long seed = 1;
  GridSpec grid;
  MetricSpec metric;
  AnalyticScalar potential;
  InitialDataSpec initial;
  ScheduleSpec schedule;
  SolverSpec solver;
  ParamSpec params;
  std::vector<std::string> checks;
  std::map<std::string, double> tolerances;
  std::string output_dir;  // empty: <output root>/<name>
};

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct RunVerdict {
  std::vector<CheckResult> checks;
  bool overall = false;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Full static checking; empty means runnable.
std::vector<std::string> validate_config(const nlohmann::json& j);

/// Executes the pipeline and writes report.json, CSV series, and plot data
/// into the output directory. Throws config_error for validation failures
/// discovered at run time and solver errors otherwise.
RunVerdict run_experiment(const ExperimentConfig& config,
                          const std::filesystem::path& output_dir);

/// Resolve the output directory: explicit config value, else
/// $GEOFLOW_OUTPUT_ROOT/<name>, else ./out/<name>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

const std::vector<std::string>& preset_names();
ExperimentConfig preset(const std::string& name);
bool is_preset_name(const std::string& name);

/// All known check names (validation rejects anything else).
const std::vector<std::string>& known_checks();

}  // namespace geoflow
