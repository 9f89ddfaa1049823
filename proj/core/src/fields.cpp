#include "dgp/fields.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "dgp/errors.hpp"

namespace dgp {

CholeskyFactor cholesky_with_jitter(const Eigen::MatrixXd& A) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() == Eigen::Success) {
    return {Eigen::MatrixXd(llt.matrixL()), false};
  }
  const double jitter = 1e-12 * A.trace() / double(A.rows());
  Eigen::MatrixXd Aj = A;
  Aj.diagonal().array() += jitter;
  llt.compute(Aj);
  if (llt.info() == Eigen::Success) {
    return {Eigen::MatrixXd(llt.matrixL()), true};
  }
  // Both attempts failed: report the most negative pivot for diagnosis.
  const Eigen::VectorXd eigs =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Aj, Eigen::EigenvaluesOnly)
          .eigenvalues();
  throw NumericalError("cholesky_with_jitter: factorization failed after jitter "
                       "retry; smallest pivot " + std::to_string(eigs.minCoeff()),
                       eigs.minCoeff());
}

Eigen::VectorXd sample_dense(const CholeskyFactor& factor, RandomStream& rng) {
  return factor.L * rng.gaussian_vector(factor.L.rows());
}

Eigen::VectorXd sample_dense(const CorrelationMatrix& R, RandomStream& rng) {
  return sample_dense(cholesky_with_jitter(R.entries), rng);
}

Eigen::SparseMatrix<double> neumann_laplacian(const Grid& grid) {
  const int n = grid.n_per_side();
  const double h2inv = double(n) * double(n);  // 1/h^2
  using T = Eigen::Triplet<double>;

  // 1-d stencil rows: ends [1 -1]/h^2, interior [-1 2 -1]/h^2.
  auto axis_triplets = [&](std::vector<T>& out) {
    for (int i = 0; i < n; ++i) {
      double diag = (i == 0 || i == n - 1) ? 1.0 : 2.0;
      if (n == 1) diag = 0.0;
      out.emplace_back(i, i, diag * h2inv);
      if (i > 0) out.emplace_back(i, i - 1, -h2inv);
      if (i < n - 1) out.emplace_back(i, i + 1, -h2inv);
    }
  };

  if (grid.dim() == 1) {
    std::vector<T> trips;
    trips.reserve(3 * n);
    axis_triplets(trips);
    Eigen::SparseMatrix<double> P(n, n);
    P.setFromTriplets(trips.begin(), trips.end());
    return P;
  }

  // 2-d: P = Ax (x) I + I (x) Ay on the lexicographic ordering ix*n + iy.
  std::vector<T> axis;
  axis.reserve(3 * n);
  axis_triplets(axis);
  std::vector<T> trips;
  trips.reserve(trips.size() + 2 * axis.size() * n);
  for (const auto& t : axis) {
    for (int k = 0; k < n; ++k) {
      trips.emplace_back(t.row() * n + k, t.col() * n + k, t.value());  // x-part
      trips.emplace_back(k * n + t.row(), k * n + t.col(), t.value());  // y-part
    }
  }
  Eigen::SparseMatrix<double> P(grid.size(), grid.size());
  P.setFromTriplets(trips.begin(), trips.end());
  return P;
}

// --------------------------------------------------------------------------
// PrecisionOperator

struct PrecisionOperator::Solver {
  // Direct factorization for 1-d (banded), diagonally preconditioned CG for
  // 2-d, per the documented solver policy. Both are deterministic.
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> direct;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                           Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  bool use_direct = true;
};

PrecisionOperator::PrecisionOperator(const Grid& grid, Eigen::VectorXd gamma_diag,
                                     int alpha, double sigma)
    : grid_(grid),
      gamma_(std::move(gamma_diag)),
      alpha_(alpha),
      sigma_(sigma),
      solver_(std::make_unique<Solver>()) {
  if (alpha <= 0 || alpha % 2 != 0)
    throw std::invalid_argument("PrecisionOperator: alpha must be even and > 0");
  if (sigma <= 0.0)
    throw std::invalid_argument("PrecisionOperator: sigma must be > 0");
  if (gamma_.size() != grid.size())
    throw std::invalid_argument("PrecisionOperator: gamma size mismatch");
  if ((gamma_.array() <= 0.0).any())
    throw std::invalid_argument("PrecisionOperator: Gamma must be > 0 everywhere");

  shifted_ = neumann_laplacian(grid);
  for (Eigen::Index i = 0; i < gamma_.size(); ++i)
    shifted_.coeffRef(i, i) += gamma_[i];
  shifted_.makeCompressed();

  if (grid.dim() == 1) {
    solver_->use_direct = true;
    solver_->direct.compute(shifted_);
    if (solver_->direct.info() != Eigen::Success)
      throw NumericalError("PrecisionOperator: sparse factorization failed", 0.0);
  } else {
    solver_->use_direct = false;
    solver_->cg.setTolerance(1e-12);
    solver_->cg.setMaxIterations(10 * grid.size());
    solver_->cg.compute(shifted_);
  }
}

PrecisionOperator::~PrecisionOperator() = default;
PrecisionOperator::PrecisionOperator(PrecisionOperator&&) noexcept = default;
PrecisionOperator& PrecisionOperator::operator=(PrecisionOperator&&) noexcept =
    default;

Eigen::VectorXd PrecisionOperator::solve_shifted(const Eigen::VectorXd& rhs) const {
  if (solver_->use_direct) return solver_->direct.solve(rhs);
  Eigen::VectorXd x = solver_->cg.solve(rhs);
  if (solver_->cg.info() != Eigen::Success)
    throw NumericalError("PrecisionOperator: CG did not converge; error " +
                             std::to_string(solver_->cg.error()),
                         solver_->cg.error());
  return x;
}

Eigen::VectorXd PrecisionOperator::apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd w = v;
  for (int k = 0; k < alpha_ / 2; ++k) w = shifted_ * w;
  const double e = 0.25 * grid_.dim() - 0.5 * alpha_;
  w.array() *= gamma_.array().pow(e) / sigma_;
  return w;
}

Eigen::VectorXd PrecisionOperator::apply_transpose(const Eigen::VectorXd& v) const {
  const double e = 0.25 * grid_.dim() - 0.5 * alpha_;
  Eigen::VectorXd w = (v.array() * gamma_.array().pow(e) / sigma_).matrix();
  for (int k = 0; k < alpha_ / 2; ++k) w = shifted_ * w;
  return w;
}

Eigen::VectorXd PrecisionOperator::solve(const Eigen::VectorXd& rhs) const {
  const double e = 0.5 * alpha_ - 0.25 * grid_.dim();
  Eigen::VectorXd w = (rhs.array() * gamma_.array().pow(e) * sigma_).matrix();
  for (int k = 0; k < alpha_ / 2; ++k) w = solve_shifted(w);
  return w;
}

Eigen::MatrixXd PrecisionOperator::covariance_columns(
    const std::vector<Eigen::Index>& nodes) const {
  // C e_i = sigma^2 / vol * (P+G)^{-a/2} [ G^{a - d/2} ((P+G)^{-a/2} e_i) ]
  const double scale = sigma_ * sigma_ / grid_.cell_volume();
  const double mid = alpha_ - 0.5 * grid_.dim();
  Eigen::MatrixXd cols(grid_.size(), Eigen::Index(nodes.size()));
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(grid_.size());
    w[nodes[j]] = 1.0;
    for (int k = 0; k < alpha_ / 2; ++k) w = solve_shifted(w);
    w.array() *= gamma_.array().pow(mid);
    for (int k = 0; k < alpha_ / 2; ++k) w = solve_shifted(w);
    cols.col(Eigen::Index(j)) = scale * w;
  }
  return cols;
}

Eigen::MatrixXd PrecisionOperator::dense_covariance() const {
  std::vector<Eigen::Index> all(std::size_t(grid_.size()));
  for (Eigen::Index i = 0; i < grid_.size(); ++i) all[std::size_t(i)] = i;
  return covariance_columns(all);
}

Eigen::VectorXd white_noise(const Grid& grid, RandomStream& rng) {
  return rng.gaussian_vector(grid.size()) / std::sqrt(grid.cell_volume());
}

Eigen::VectorXd sample_spde(const PrecisionOperator& op, RandomStream& rng) {
  const Eigen::VectorXd xi = white_noise(op.grid(), rng);
  Eigen::VectorXd v = op.solve(xi);
  const double rel = (op.apply(v) - xi).norm() / xi.norm();
  if (!(rel <= 1e-10))
    throw NumericalError(
        "sample_spde: solve residual " + std::to_string(rel) + " exceeds 1e-10",
        rel);
  return v;
}

double calibrate_sigma(const Grid& grid, int alpha, int pilot, RandomStream& rng,
                       double base_gamma) {
  if (pilot < 100)
    throw std::invalid_argument("calibrate_sigma: pilot must be >= 100");
  PrecisionOperator op(
      grid, Eigen::VectorXd::Constant(grid.size(), base_gamma * base_gamma),
      alpha, 1.0);
  double acc = 0.0;
  for (int p = 0; p < pilot; ++p) {
    acc += sample_spde(op, rng).squaredNorm() / double(grid.size());
  }
  // Samples scale linearly in sigma, so the second moment scales as sigma^2.
  return 1.0 / std::sqrt(acc / pilot);
}

}  // namespace dgp
