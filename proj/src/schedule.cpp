#include "geoflow/schedule.hpp"

#include <cmath>
#include <sstream>

#include "geoflow/errors.hpp"
#include "geoflow/linalg_small.hpp"

namespace geoflow {

namespace {

ScalarField log_det_of(const SymTensorField& g) {
  ScalarField out(g.grid_ptr());
  double packed[6];
  for (std::size_t node = 0; node < g.grid().size(); ++node) {
    g.pack(node, packed);
    const double det = linalg::sym_det(packed, g.dim());
    if (!(det > 0.0))
      throw geometry_error("schedule: metric determinant not positive");
    out[node] = std::log(det);
  }
  return out;
}

}  // namespace

MetricSchedule::MetricSchedule(GridPtr grid, MetricFn metric,
                               std::optional<MetricFn> rate, ScalarField f0,
                               double t_begin, double t_end)
    : grid_(std::move(grid)),
      metric_(std::move(metric)),
      rate_(std::move(rate)),
      f0_(std::move(f0)),
      t_begin_(t_begin),
      t_end_(t_end),
      log_det_begin_(grid_) {
  if (!(t_end_ > t_begin_))
    throw parameter_error("schedule: empty time interval");
  require_same_grid(*grid_, f0_.grid(), "schedule");
  log_det_begin_ = log_det_of(metric_(t_begin_));
}

MetricSchedule MetricSchedule::fixed(SnapshotPtr snap, double t_begin,
                                     double t_end) {
  SymTensorField g = snap->metric();
  MetricSchedule sched(
      snap->grid_ptr(), [g](double) { return g; },
      [grid = snap->grid_ptr()](double) { return SymTensorField(grid); },
      snap->potential(), t_begin, t_end);
  sched.is_static_ = true;
  sched.static_snapshot_ = std::move(snap);
  return sched;
}

MetricSchedule MetricSchedule::scaled(SymTensorField g0, ScalarField f0,
                                      std::function<double(double)> s,
                                      std::function<double(double)> s_rate,
                                      double t_begin, double t_end) {
  GridPtr grid = g0.grid_ptr();
  auto metric = [g0, s](double t) { return geoflow::scaled(g0, s(t)); };
  auto rate = [g0, s_rate](double t) {
    return geoflow::scaled(g0, s_rate(t));
  };
  return MetricSchedule(grid, metric, rate, std::move(f0), t_begin, t_end);
}

void MetricSchedule::check_time(double t) const {
  const double slack = 1e-9 * (t_end_ - t_begin_);
  if (t < t_begin_ - slack || t > t_end_ + slack) {
    std::ostringstream os;
    os << "schedule: t = " << t << " outside [" << t_begin_ << ", " << t_end_
       << "]";
    throw parameter_error(os.str());
  }
}

SymTensorField MetricSchedule::metric_at(double t) const {
  check_time(t);
  return metric_(t);
}

SymTensorField MetricSchedule::metric_rate_at(double t) const {
  check_time(t);
  if (rate_) return (*rate_)(t);
  const double delta = 1e-4 * (t_end_ - t_begin_);
  double a = t - delta, b = t + delta;
  if (a < t_begin_) {
    a = t;
    b = t + 2.0 * delta;
  } else if (b > t_end_) {
    a = t - 2.0 * delta;
    b = t;
  }
  SymTensorField ga = metric_(a);
  SymTensorField gb = metric_(b);
  SymTensorField out = geoflow::scaled(gb, 1.0 / (b - a));
  axpy(-1.0 / (b - a), ga, out);
  return out;
}

ScalarField MetricSchedule::conjugate_potential(double t) const {
  check_time(t);
  if (is_static_) return f0_;
  ScalarField log_det_t = log_det_of(metric_(t));
  ScalarField out(grid_);
  for (std::size_t node = 0; node < grid_->size(); ++node)
    out[node] = f0_[node] + 0.5 * (log_det_t[node] - log_det_begin_[node]);
  return out;
}

SnapshotPtr MetricSchedule::snapshot_at(double t) const {
  check_time(t);
  if (is_static_) return static_snapshot_;
  return make_snapshot(metric_(t), conjugate_potential(t));
}

}  // namespace geoflow
