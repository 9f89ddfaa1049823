#pragma once

#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "dgp/grid.hpp"
#include "dgp/kernels.hpp"
#include "dgp/random.hpp"

namespace dgp {

// ---------------------------------------------------------------------------
// Dense Gaussian sampling.

struct CholeskyFactor {
  Eigen::MatrixXd L;  // lower factor of A (+ jitter when needed)
  bool jittered = false;
};

// Lower Cholesky with one jitter retry (1e-12 * trace/N added to the
// diagonal). Throws NumericalError carrying the smallest pivot when the
// jittered attempt also fails.
CholeskyFactor cholesky_with_jitter(const Eigen::MatrixXd& A);

// One draw from N(0, R): L z with z i.i.d. standard normal.
Eigen::VectorXd sample_dense(const CorrelationMatrix& R, RandomStream& rng);
Eigen::VectorXd sample_dense(const CholeskyFactor& factor, RandomStream& rng);

// ---------------------------------------------------------------------------
// Precision-operator (SPDE) sampling.

// Finite-difference negative Laplacian with Neumann boundary conditions
// (mirrored ghost points); 3-point stencil in 1-d, 5-point in 2-d.
Eigen::SparseMatrix<double> neumann_laplacian(const Grid& grid);

// A(u) = sigma^{-1} Gamma^{d/4 - alpha/2} (P + Gamma)^{alpha/2} with
// Gamma = diag(gamma_diag). Samples v ~ N(0, C) by solving A v = xi against
// discrete white noise; the implied covariance matrix is
// (A^T A)^{-1} / cell_volume. alpha must be a positive even integer and
// every gamma_diag entry strictly positive.
class PrecisionOperator {
 public:
  PrecisionOperator(const Grid& grid, Eigen::VectorXd gamma_diag, int alpha,
                    double sigma);
  ~PrecisionOperator();
  PrecisionOperator(PrecisionOperator&&) noexcept;
  PrecisionOperator& operator=(PrecisionOperator&&) noexcept;

  const Grid& grid() const noexcept { return grid_; }
  int alpha() const noexcept { return alpha_; }
  double sigma() const noexcept { return sigma_; }
  const Eigen::VectorXd& gamma_diag() const noexcept { return gamma_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;            // A v
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const;  // A^T v
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;          // A^{-1} rhs

  // Columns of the implied covariance matrix C = (A^T A)^{-1}/cell_volume at
  // the requested node indices (used for marginal likelihoods / regression).
  Eigen::MatrixXd covariance_columns(const std::vector<Eigen::Index>& nodes) const;

  // Dense N x N materialization of C; for small grids and tests only.
  Eigen::MatrixXd dense_covariance() const;

 private:
  struct Solver;  // hides the factorization backend (direct 1-d, CG 2-d)
  Eigen::VectorXd solve_shifted(const Eigen::VectorXd& rhs) const;  // (P+Gamma)^{-1}

  Grid grid_;
  Eigen::VectorXd gamma_;
  int alpha_;
  double sigma_;
  Eigen::SparseMatrix<double> shifted_;  // P + Gamma
  std::unique_ptr<Solver> solver_;
};

// Discrete white noise: i.i.d. N(0, 1/cell_volume) per node.
Eigen::VectorXd white_noise(const Grid& grid, RandomStream& rng);

// v ~ N(0, C(u)) via A(u) v = xi; verifies the relative residual <= 1e-10.
Eigen::VectorXd sample_spde(const PrecisionOperator& op, RandomStream& rng);

// Chooses sigma so that the spatial average of u(x)^2 over `pilot` baseline
// draws (constant Gamma = base_gamma^2, sigma = 1) equals 1 in expectation:
// sigma* = 1/sqrt(pilot mean). Deterministic given the stream state.
double calibrate_sigma(const Grid& grid, int alpha, int pilot, RandomStream& rng,
                       double base_gamma = 20.0);

}  // namespace dgp
