#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "geoflow/entropy.hpp"
#include "geoflow/field.hpp"
#include "geoflow/heat.hpp"
#include "geoflow/logsobolev.hpp"

namespace geoflow {

using json = nlohmann::json;

// Self-describing field containers: a grid header plus row-major values.
json to_json(const Grid& grid);
GridPtr grid_from_json(const json& j);

json to_json(const ScalarField& f);
ScalarField scalar_field_from_json(const json& j);

json to_json(const SymTensorField& t);
SymTensorField sym_tensor_from_json(const json& j);

void save_json(const json& j, const std::filesystem::path& path);
json load_json(const std::filesystem::path& path);

/// Trajectory directory: index.json (timestamps, dt, step counts) plus one
/// field container per output time.
void save_trajectory(const FlowTrajectory& traj,
                     const std::filesystem::path& dir);

/// 17-significant-digit scientific notation; the fixed CSV float format.
std::string format_float(double x);

/// CSV with the documented column order (see README); one row per output
/// time, residual columns recomputed from the stored sides.
std::string entropy_report_csv(const EntropyReport& report);
json entropy_report_json(const EntropyReport& report);

/// Two-column t-vs-value series for external plotting.
void write_series_csv(const std::filesystem::path& path,
                      const std::string& xname, const std::string& yname,
                      const std::vector<double>& x,
                      const std::vector<double>& y);

json to_json(const LogSobolevSolution& sol);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace geoflow
