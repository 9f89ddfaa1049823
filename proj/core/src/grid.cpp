#include "dgp/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace dgp {

Grid Grid::make(int dim, int n_per_side, GridLayout layout) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
  if (n_per_side < 1) throw std::invalid_argument("Grid: n_per_side must be positive");
  return Grid(dim, n_per_side, layout);
}

Eigen::MatrixXd Grid::points() const {
  Eigen::MatrixXd p(size(), dim_);
  for (Eigen::Index i = 0; i < size(); ++i) {
    Eigen::Vector2d x = point(i);
    p(i, 0) = x[0];
    if (dim_ == 2) p(i, 1) = x[1];
  }
  return p;
}

Eigen::Index Grid::nearest_axis(double x) const {
  // Continuous axis index of x; distance to axis node i is |t - i|.
  double t = layout_ == GridLayout::CellCentered ? x * n_ - 0.5 : x * n_;
  auto i = Eigen::Index(std::floor(t));
  if (t - double(i) > 0.5) ++i;  // exact half stays at the lower index
  if (i < 0) i = 0;
  if (i > n_ - 1) i = n_ - 1;
  return i;
}

Eigen::Index Grid::nearest_node(const Eigen::Vector2d& x) const {
  if (dim_ == 1) return nearest_axis(x[0]);
  return nearest_axis(x[0]) * n_ + nearest_axis(x[1]);
}

}  // namespace dgp
