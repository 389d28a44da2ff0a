#include "geoflow/grid.hpp"

#include <cmath>
#include <sstream>

#include "geoflow/errors.hpp"

namespace geoflow {

Grid::Grid(std::vector<int> nodes_per_axis, std::vector<double> period_per_axis) {
  if (nodes_per_axis.empty() || nodes_per_axis.size() > 3)
    throw input_error("grid dimension must be 1, 2 or 3");
  if (period_per_axis.size() != nodes_per_axis.size())
    throw input_error("grid needs one period per axis");
  dim_ = static_cast<int>(nodes_per_axis.size());
  size_ = 1;
  for (int a = 0; a < dim_; ++a) {
    const int n = nodes_per_axis[a];
    const double L = period_per_axis[a];
    if (n < 8 || n % 2 != 0) {
      std::ostringstream os;
      os << "grid axis " << a << ": node count " << n
         << " must be even and >= 8";
      throw input_error(os.str());
    }
    if (!(L > 0.0) || !std::isfinite(L)) {
      std::ostringstream os;
      os << "grid axis " << a << ": period must be positive and finite";
      throw input_error(os.str());
    }
    nodes_[a] = n;
    periods_[a] = L;
    spacing_[a] = L / n;
    size_ *= static_cast<std::size_t>(n);
  }
  strides_[dim_ - 1] = 1;
  for (int a = dim_ - 2; a >= 0; --a)
    strides_[a] = strides_[a + 1] * static_cast<std::size_t>(nodes_[a + 1]);
  cell_volume_ = 1.0;
  for (int a = 0; a < dim_; ++a) cell_volume_ *= spacing_[a];
}

std::array<int, 3> Grid::unravel(std::size_t node) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = static_cast<int>(node / strides_[a]);
    node %= strides_[a];
  }
  return idx;
}

std::size_t Grid::ravel(const std::array<int, 3>& idx) const {
  std::size_t node = 0;
  for (int a = 0; a < dim_; ++a)
    node += static_cast<std::size_t>(idx[a]) * strides_[a];
  return node;
}

double Grid::coord(std::size_t node, int axis) const {
  const int i = static_cast<int>((node / strides_[axis]) %
                                 static_cast<std::size_t>(nodes_[axis]));
  return i * spacing_[axis];
}

bool Grid::same_layout(const Grid& other) const {
  if (dim_ != other.dim_) return false;
  for (int a = 0; a < dim_; ++a) {
    if (nodes_[a] != other.nodes_[a]) return false;
    if (periods_[a] != other.periods_[a]) return false;
  }
  return true;
}

GridPtr make_grid(std::vector<int> nodes_per_axis,
                  std::vector<double> period_per_axis) {
  return std::make_shared<Grid>(std::move(nodes_per_axis),
                                std::move(period_per_axis));
}

bool compatible(const GridPtr& a, const GridPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->same_layout(*b);
}

}  // namespace geoflow
