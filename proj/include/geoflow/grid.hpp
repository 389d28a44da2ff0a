#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace geoflow {

/// Uniform structured grid on a flat torus prod_a [0, L_a), up to 3 axes.
///
/// Node counts must be even (Fourier differentiation needs a clean Nyquist
/// split) and at least 8. Spacing h_a = L_a / N_a; node (i_0,...,i_{d-1})
/// sits at x_a = i_a h_a. Storage is row-major with the last axis fastest.
class Grid {
 public:
  Grid(std::vector<int> nodes_per_axis, std::vector<double> period_per_axis);

  int dim() const { return dim_; }
  int nodes(int axis) const { return nodes_[axis]; }
  double period(int axis) const { return periods_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return strides_[axis]; }
  /// Volume element of the coordinate cell, prod_a h_a.
  double cell_volume() const { return cell_volume_; }

  std::array<int, 3> unravel(std::size_t node) const;
  std::size_t ravel(const std::array<int, 3>& idx) const;
  double coord(std::size_t node, int axis) const;

  bool same_layout(const Grid& other) const;

 private:
  int dim_;
  std::array<int, 3> nodes_{1, 1, 1};
  std::array<double, 3> periods_{1.0, 1.0, 1.0};
  std::array<double, 3> spacing_{0.0, 0.0, 0.0};
  std::array<std::size_t, 3> strides_{0, 0, 0};
  std::size_t size_ = 0;
  double cell_volume_ = 1.0;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(std::vector<int> nodes_per_axis,
                  std::vector<double> period_per_axis);

/// Grids are interchangeable if they describe the same discretization,
/// whether or not they are the same object.
bool compatible(const GridPtr& a, const GridPtr& b);

}  // namespace geoflow
