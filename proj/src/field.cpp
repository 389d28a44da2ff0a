#include "geoflow/field.hpp"

#include <algorithm>
#include <cmath>

#include "geoflow/errors.hpp"

namespace geoflow {

namespace {
bool finite_all(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}
}  // namespace

ScalarField::ScalarField(GridPtr grid)
    : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size())
    throw input_error("scalar field: value array length != node count");
}

ScalarField ScalarField::sample(GridPtr grid,
                                const std::function<double(const double*)>& f) {
  ScalarField out(std::move(grid));
  const Grid& g = out.grid();
  double x[3] = {0.0, 0.0, 0.0};
  for (std::size_t node = 0; node < g.size(); ++node) {
    for (int a = 0; a < g.dim(); ++a) x[a] = g.coord(node, a);
    out[node] = f(x);
  }
  return out;
}

bool ScalarField::all_finite() const { return finite_all(values_); }

double ScalarField::min() const {
  return *std::min_element(values_.begin(), values_.end());
}

double ScalarField::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

VectorField::VectorField(GridPtr grid) : grid_(std::move(grid)) {
  comps_.assign(grid_->dim(), std::vector<double>(grid_->size(), 0.0));
}

bool VectorField::all_finite() const {
  for (const auto& c : comps_)
    if (!finite_all(c)) return false;
  return true;
}

int SymTensorField::slot(int i, int j, int dim) {
  if (i > j) std::swap(i, j);
  // row-major upper triangle: row i starts at i*dim - i(i-1)/2
  return i * dim - i * (i - 1) / 2 + (j - i);
}

SymTensorField::SymTensorField(GridPtr grid)
    : grid_(std::move(grid)), dim_(grid_->dim()) {
  comps_.assign(dim_ * (dim_ + 1) / 2, std::vector<double>(grid_->size(), 0.0));
}

void SymTensorField::pack(std::size_t node, double* out) const {
  for (int s = 0; s < slots(); ++s) out[s] = comps_[s][node];
}

SymTensorField SymTensorField::identity(GridPtr grid) {
  SymTensorField out(std::move(grid));
  for (int i = 0; i < out.dim_; ++i) {
    auto c = out.component(out.slot(i, i));
    std::fill(c.begin(), c.end(), 1.0);
  }
  return out;
}

bool SymTensorField::all_finite() const {
  for (const auto& c : comps_)
    if (!finite_all(c)) return false;
  return true;
}

ChristoffelField::ChristoffelField(GridPtr grid)
    : grid_(std::move(grid)), dim_(grid_->dim()) {
  lower_slots_ = dim_ * (dim_ + 1) / 2;
  comps_.assign(dim_ * lower_slots_, std::vector<double>(grid_->size(), 0.0));
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_layout(b))
    throw input_error(std::string(what) + ": fields live on different grids");
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "field sum");
  ScalarField out(a.grid_ptr());
  for (std::size_t i = 0; i < a.grid().size(); ++i) out[i] = a[i] + b[i];
  return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "field difference");
  ScalarField out(a.grid_ptr());
  for (std::size_t i = 0; i < a.grid().size(); ++i) out[i] = a[i] - b[i];
  return out;
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "field product");
  ScalarField out(a.grid_ptr());
  for (std::size_t i = 0; i < a.grid().size(); ++i) out[i] = a[i] * b[i];
  return out;
}

ScalarField operator*(double c, const ScalarField& a) {
  ScalarField out(a.grid_ptr());
  for (std::size_t i = 0; i < a.grid().size(); ++i) out[i] = c * a[i];
  return out;
}

ScalarField map(const ScalarField& a, const std::function<double(double)>& f) {
  ScalarField out(a.grid_ptr());
  for (std::size_t i = 0; i < a.grid().size(); ++i) out[i] = f(a[i]);
  return out;
}

void axpy(double c, const ScalarField& x, ScalarField& y) {
  require_same_grid(x.grid(), y.grid(), "axpy");
  for (std::size_t i = 0; i < x.grid().size(); ++i) y[i] += c * x[i];
}

void axpy(double c, const SymTensorField& x, SymTensorField& y) {
  require_same_grid(x.grid(), y.grid(), "axpy");
  for (int s = 0; s < x.slots(); ++s) {
    auto xs = x.component(s);
    auto ys = y.component(s);
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] += c * xs[i];
  }
}

SymTensorField scaled(const SymTensorField& a, double c) {
  SymTensorField out(a.grid_ptr());
  for (int s = 0; s < a.slots(); ++s) {
    auto as = a.component(s);
    auto os = out.component(s);
    for (std::size_t i = 0; i < as.size(); ++i) os[i] = c * as[i];
  }
  return out;
}

SymTensorField add(const SymTensorField& a, const SymTensorField& b) {
  require_same_grid(a.grid(), b.grid(), "tensor sum");
  SymTensorField out(a.grid_ptr());
  for (int s = 0; s < a.slots(); ++s) {
    auto as = a.component(s);
    auto bs = b.component(s);
    auto os = out.component(s);
    for (std::size_t i = 0; i < as.size(); ++i) os[i] = as[i] + bs[i];
  }
  return out;
}

}  // namespace geoflow
