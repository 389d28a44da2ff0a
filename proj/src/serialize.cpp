#include "geoflow/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "geoflow/errors.hpp"

namespace geoflow {

json to_json(const Grid& grid) {
  json j;
  j["dim"] = grid.dim();
  j["nodes"] = json::array();
  j["periods"] = json::array();
  for (int a = 0; a < grid.dim(); ++a) {
    j["nodes"].push_back(grid.nodes(a));
    j["periods"].push_back(grid.period(a));
  }
  return j;
}

GridPtr grid_from_json(const json& j) {
  std::vector<int> nodes = j.at("nodes").get<std::vector<int>>();
  std::vector<double> periods = j.at("periods").get<std::vector<double>>();
  return make_grid(std::move(nodes), std::move(periods));
}

json to_json(const ScalarField& f) {
  json j;
  j["container"] = "scalar_field";
  j["grid"] = to_json(f.grid());
  j["values"] = std::vector<double>(f.values().begin(), f.values().end());
  return j;
}

ScalarField scalar_field_from_json(const json& j) {
  if (j.at("container") != "scalar_field")
    throw input_error("field container: expected scalar_field");
  GridPtr grid = grid_from_json(j.at("grid"));
  return ScalarField(grid, j.at("values").get<std::vector<double>>());
}

json to_json(const SymTensorField& t) {
  json j;
  j["container"] = "sym_tensor_field";
  j["grid"] = to_json(t.grid());
  json comps = json::array();
  for (int s = 0; s < t.slots(); ++s)
    comps.push_back(
        std::vector<double>(t.component(s).begin(), t.component(s).end()));
  j["components"] = std::move(comps);
  return j;
}

SymTensorField sym_tensor_from_json(const json& j) {
  if (j.at("container") != "sym_tensor_field")
    throw input_error("field container: expected sym_tensor_field");
  GridPtr grid = grid_from_json(j.at("grid"));
  SymTensorField out(grid);
  const auto& comps = j.at("components");
  if (static_cast<int>(comps.size()) != out.slots())
    throw input_error("sym_tensor_field: wrong component count");
  for (int s = 0; s < out.slots(); ++s) {
    auto vals = comps[s].get<std::vector<double>>();
    if (vals.size() != grid->size())
      throw input_error("sym_tensor_field: wrong value count");
    std::copy(vals.begin(), vals.end(), out.component(s).begin());
  }
  return out;
}

void save_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open for reading: " + path.string());
  json j;
  in >> j;
  return j;
}

void save_trajectory(const FlowTrajectory& traj,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json index;
  index["dt_max"] = traj.dt_max;
  index["total_steps"] = traj.total_steps;
  index["timestamps"] = json::array();
  index["masses"] = traj.masses;
  index["files"] = json::array();
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "state_%05zu.json", i);
    index["timestamps"].push_back(traj.states[i].t);
    index["files"].push_back(name);
    json state;
    state["t"] = traj.states[i].t;
    state["u"] = to_json(traj.states[i].u);
    state["metric"] = to_json(traj.states[i].snapshot->metric());
    state["potential"] = to_json(traj.states[i].snapshot->potential());
    save_json(state, dir / name);
  }
  save_json(index, dir / "index.json");
}

std::string format_float(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

namespace {

const char* kEntropyColumns =
    "t,mass,H,Hm,HmK,W,Wm,WmK,dH_fd,dH_rhs,d2H_fd_plain,d2H_fd_rich,d2H_rhs,"
    "dWm_fd_plain,dWm_fd_rich,dWm_rhs,dWmK_fd_plain,dWmK_fd_rich,dWmK_rhs,"
    "res_d2H_rich,res_dWm_rich,res_dWmK_rich,defect_m,defect_mK,defect_ricL";

}  // namespace

std::string entropy_report_csv(const EntropyReport& report) {
  std::string out = kEntropyColumns;
  out += '\n';
  for (const auto& r : report.rows) {
    const double cols[] = {r.t,
                           r.mass,
                           r.H,
                           r.Hm,
                           r.HmK,
                           r.W,
                           r.Wm,
                           r.WmK,
                           r.dH_fd,
                           r.dH_rhs,
                           r.d2H_fd_plain,
                           r.d2H_fd_rich,
                           r.d2H_rhs,
                           r.dWm_fd_plain,
                           r.dWm_fd_rich,
                           r.dWm_rhs,
                           r.dWmK_fd_plain,
                           r.dWmK_fd_rich,
                           r.dWmK_rhs,
                           EntropyReport::residual(r.d2H_fd_rich, r.d2H_rhs),
                           EntropyReport::residual(r.dWm_fd_rich, r.dWm_rhs),
                           EntropyReport::residual(r.dWmK_fd_rich, r.dWmK_rhs),
                           r.defect_m,
                           r.defect_mK,
                           r.defect_ricL};
    for (std::size_t c = 0; c < sizeof(cols) / sizeof(double); ++c) {
      if (c) out += ',';
      out += format_float(cols[c]);
    }
    out += '\n';
  }
  return out;
}

json entropy_report_json(const EntropyReport& report) {
  json j;
  j["m"] = report.m;
  j["K"] = report.K;
  j["certified_m"] = report.certified_m;
  j["certified_mK"] = report.certified_mK;
  j["certified_ricL"] = report.certified_ricL;
  auto verdict_str = [](Verdict v) {
    switch (v) {
      case Verdict::pass:
        return "pass";
      case Verdict::fail:
        return "fail";
      default:
        return "not-applicable";
    }
  };
  j["wm_monotone"] = verdict_str(report.wm_monotone);
  j["wmK_monotone"] = verdict_str(report.wmK_monotone);
  j["h_concave"] = verdict_str(report.h_concave);
  j["max_rel_d2H"] = report.max_rel_d2H();
  j["max_rel_dWm"] = report.max_rel_dWm();
  j["max_rel_dWmK"] = report.max_rel_dWmK();
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["t"] = r.t;
    row["H"] = r.H;
    row["Wm"] = r.Wm;
    row["WmK"] = r.WmK;
    row["d2H_fd_rich"] = r.d2H_fd_rich;
    row["d2H_rhs"] = r.d2H_rhs;
    row["dWm_fd_rich"] = r.dWm_fd_rich;
    row["dWm_rhs"] = r.dWm_rhs;
    row["dWmK_fd_rich"] = r.dWmK_fd_rich;
    row["dWmK_rhs"] = r.dWmK_rhs;
    j["rows"].push_back(std::move(row));
  }
  return j;
}

void write_series_csv(const std::filesystem::path& path,
                      const std::string& xname, const std::string& yname,
                      const std::vector<double>& x,
                      const std::vector<double>& y) {
  if (x.size() != y.size())
    throw input_error("write_series_csv: length mismatch");
  std::string out = xname + "," + yname + "\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out += format_float(x[i]) + "," + format_float(y[i]) + "\n";
  write_text_file(path, out);
}

json to_json(const LogSobolevSolution& sol) {
  json j;
  j["t"] = sol.t;
  j["mu"] = sol.mu;
  j["defect"] = sol.defect;
  j["iterations"] = sol.iterations;
  j["distinct_minima"] = sol.distinct_minima;
  j["seed"] = sol.seed;
  j["minimizer"] = to_json(sol.minimizer);
  return j;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path.string());
  out << content;
}

}  // namespace geoflow
