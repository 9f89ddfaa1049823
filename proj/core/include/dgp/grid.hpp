#pragma once

#include <Eigen/Core>

namespace dgp {

enum class GridLayout {
  CellCentered,  // x_i = (i + 1/2) h: nodes strictly inside (0,1)^d
  Periodic       // x_i = i h on the unit torus; used by the convolution chain
};

// Uniform discretization of (0,1)^d, d in {1,2}. Nodes are ordered
// lexicographically: in 2-d, node (ix, iy) sits at index ix * n + iy.
class Grid {
 public:
  static Grid make(int dim, int n_per_side,
                   GridLayout layout = GridLayout::CellCentered);

  int dim() const noexcept { return dim_; }
  int n_per_side() const noexcept { return n_; }
  GridLayout layout() const noexcept { return layout_; }
  Eigen::Index size() const noexcept {
    return dim_ == 1 ? n_ : Eigen::Index(n_) * n_;
  }
  double spacing() const noexcept { return 1.0 / n_; }
  double cell_volume() const noexcept {
    double h = spacing();
    return dim_ == 1 ? h : h * h;
  }

  // Coordinate along one axis for axis-index i.
  double axis_coord(Eigen::Index i) const noexcept {
    return layout_ == GridLayout::CellCentered ? (double(i) + 0.5) * spacing()
                                               : double(i) * spacing();
  }

  // Full coordinate of node i (y = 0 when dim == 1).
  Eigen::Vector2d point(Eigen::Index i) const noexcept {
    if (dim_ == 1) return {axis_coord(i), 0.0};
    return {axis_coord(i / n_), axis_coord(i % n_)};
  }

  Eigen::MatrixXd points() const;  // size x dim

  // Index of the node closest to x; ties round toward the lower index.
  Eigen::Index nearest_node(const Eigen::Vector2d& x) const;

  bool operator==(const Grid& other) const = default;

 private:
  Grid(int dim, int n, GridLayout layout) : dim_(dim), n_(n), layout_(layout) {}
  Eigen::Index nearest_axis(double x) const;

  int dim_;
  int n_;
  GridLayout layout_;
};

}  // namespace dgp
