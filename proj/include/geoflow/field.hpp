#pragma once

#include <functional>
#include <span>
#include <vector>

#include "geoflow/grid.hpp"

namespace geoflow {

/// Smooth periodic scalar sampled at the grid nodes.
class ScalarField {
 public:
  explicit ScalarField(GridPtr grid);
  ScalarField(GridPtr grid, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  double operator[](std::size_t node) const { return values_[node]; }
  double& operator[](std::size_t node) { return values_[node]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Sample f(x) at every node; x has grid().dim() meaningful entries.
  static ScalarField sample(GridPtr grid,
                            const std::function<double(const double*)>& f);

  bool all_finite() const;
  double min() const;
  double max() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Contravariant vector field; component-major storage.
class VectorField {
 public:
  explicit VectorField(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int components() const { return static_cast<int>(comps_.size()); }

  double operator()(int comp, std::size_t node) const {
    return comps_[comp][node];
  }
  double& operator()(int comp, std::size_t node) { return comps_[comp][node]; }
  std::span<const double> component(int comp) const { return comps_[comp]; }
  std::span<double> component(int comp) { return comps_[comp]; }

  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<std::vector<double>> comps_;
};

/// Covariant symmetric 2-tensor field; only the upper triangle is stored.
class SymTensorField {
 public:
  explicit SymTensorField(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int dim() const { return dim_; }
  int slots() const { return static_cast<int>(comps_.size()); }

  /// Upper-triangle slot of (i,j); symmetric access.
  static int slot(int i, int j, int dim);
  int slot(int i, int j) const { return slot(i, j, dim_); }

  double operator()(int i, int j, std::size_t node) const {
    return comps_[slot(i, j)][node];
  }
  double& at(int i, int j, std::size_t node) {
    return comps_[slot(i, j)][node];
  }
  std::span<const double> component(int s) const { return comps_[s]; }
  std::span<double> component(int s) { return comps_[s]; }

  /// Packed upper triangle at one node, row-major: (0,0),(0,1),...,(1,1),...
  void pack(std::size_t node, double* out) const;

  static SymTensorField identity(GridPtr grid);
  bool all_finite() const;

 private:
  GridPtr grid_;
  int dim_;
  std::vector<std::vector<double>> comps_;
};

/// Christoffel symbols Gamma^k_{ij}, symmetric in the lower pair.
class ChristoffelField {
 public:
  explicit ChristoffelField(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int dim() const { return dim_; }

  double operator()(int k, int i, int j, std::size_t node) const {
    return comps_[index(k, i, j)][node];
  }
  double& at(int k, int i, int j, std::size_t node) {
    return comps_[index(k, i, j)][node];
  }
  std::span<const double> component(int k, int i, int j) const {
    return comps_[index(k, i, j)];
  }
  std::span<double> component(int k, int i, int j) {
    return comps_[index(k, i, j)];
  }

 private:
  int index(int k, int i, int j) const {
    return k * lower_slots_ + SymTensorField::slot(i, j, dim_);
  }
  GridPtr grid_;
  int dim_;
  int lower_slots_;
  std::vector<std::vector<double>> comps_;
};

// Elementwise helpers used throughout the solvers. All arguments must share
// one grid; results are fresh fields.
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double c, const ScalarField& a);
ScalarField map(const ScalarField& a, const std::function<double(double)>& f);

/// y += c * x
void axpy(double c, const ScalarField& x, ScalarField& y);
void axpy(double c, const SymTensorField& x, SymTensorField& y);
SymTensorField scaled(const SymTensorField& a, double c);
SymTensorField add(const SymTensorField& a, const SymTensorField& b);

void require_same_grid(const Grid& a, const Grid& b, const char* what);

}  // namespace geoflow
