#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"

#include "dgp/errors.hpp"
#include "dgp/fields.hpp"
#include "dgp/grid.hpp"
#include "dgp/kernels.hpp"
#include "dgp/random.hpp"
#include "dgp/spectral.hpp"

using namespace dgp;

namespace {

// Densify a linear map by applying it to unit vectors.
template <typename Apply>
Eigen::MatrixXd densify(Eigen::Index n, Apply&& apply) {
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    out.col(i) = apply(Eigen::VectorXd::Unit(n, i));
  return out;
}

}  // namespace

TEST_SUITE("fields") {

TEST_CASE("grid geometry: node count, ordering, spacing, layouts") {
  const Grid g1 = Grid::make(1, 5);
  CHECK(g1.size() == 5);
  CHECK(g1.spacing() == 0.2);
  CHECK(g1.cell_volume() == 0.2);
  for (int i = 0; i < 5; ++i) CHECK(g1.axis_coord(i) == (i + 0.5) * 0.2);

  const Grid g2 = Grid::make(2, 4);
  CHECK(g2.size() == 16);
  CHECK(g2.cell_volume() == doctest::Approx(1.0 / 16).epsilon(1e-15));
  // Lexicographic: node (ix, iy) at index ix * n + iy.
  const Eigen::Vector2d p = g2.point(4 * 2 + 3);
  CHECK(p.x() == doctest::Approx((2 + 0.5) / 4.0).epsilon(1e-15));
  CHECK(p.y() == doctest::Approx((3 + 0.5) / 4.0).epsilon(1e-15));
  CHECK(g2.points().rows() == 16);
  CHECK(g2.points().cols() == 2);

  const Grid gp = Grid::make(1, 4, GridLayout::Periodic);
  for (int i = 0; i < 4; ++i) CHECK(gp.axis_coord(i) == i * 0.25);
}

TEST_CASE("grid nearest node: exact hits and tie toward lower index") {
  const Grid g = Grid::make(1, 10);
  for (Eigen::Index i = 0; i < 10; ++i)
    CHECK(g.nearest_node(g.point(i)) == i);
  // x = 0.2 is equidistant from nodes at 0.15 and 0.25.
  CHECK(g.nearest_node({0.2, 0.0}) == 1);
  CHECK(g.nearest_node({0.0, 0.0}) == 0);
  CHECK(g.nearest_node({1.0, 0.0}) == 9);

  const Grid g2 = Grid::make(2, 3);
  CHECK(g2.nearest_node({0.9, 0.1}) == 2 * 3 + 0);
}

TEST_CASE("cholesky with jitter: clean, rescued, and hopeless inputs") {
  const CholeskyFactor id = cholesky_with_jitter(Eigen::MatrixXd::Identity(4, 4));
  CHECK_FALSE(id.jittered);
  CHECK((id.L - Eigen::MatrixXd::Identity(4, 4)).norm() == 0.0);

  // Exactly singular PSD matrix: one jitter retry must rescue it.
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  const CholeskyFactor rescued = cholesky_with_jitter(ones);
  CHECK(rescued.jittered);
  CHECK(((rescued.L * rescued.L.transpose()) - ones).cwiseAbs().maxCoeff() < 1e-9);

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(cholesky_with_jitter(indefinite), NumericalError);
}

TEST_CASE("dense sampling reproduces the target covariance") {
  // Identity covariance: entrywise sample covariance close to I.
  CorrelationMatrix eye;
  eye.entries = Eigen::MatrixXd::Identity(8, 8);
  RandomStream rng(101);
  const int draws = 10000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(8, 8);
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd v = sample_dense(eye, rng);
    acc += v * v.transpose();
  }
  acc /= draws;
  CHECK((acc - eye.entries).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("dense sampling matches a nonstationary correlation matrix") {
  const Grid grid = Grid::make(1, 40);
  RandomStream rng(7);
  const Eigen::VectorXd u = rng.gaussian_vector(grid.size());
  const CorrelationMatrix R = build_correlation_matrix(
      grid.points(), u, SquareMap{}, GaussianCorrelation{});
  const CholeskyFactor L = cholesky_with_jitter(R.entries);

  const int draws = 20000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(grid.size(), grid.size());
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd v = sample_dense(L, rng);
    acc += v * v.transpose();
  }
  acc /= draws;
  CHECK((acc - R.entries).cwiseAbs().maxCoeff() < 0.08);
}

TEST_CASE("dense sampling is deterministic in the stream") {
  CorrelationMatrix eye;
  eye.entries = Eigen::MatrixXd::Identity(6, 6);
  RandomStream a(9), b(9);
  CHECK(sample_dense(eye, a) == sample_dense(eye, b));
}

TEST_CASE("precision operator matches its closed-form dense oracle") {
  const Grid grid = Grid::make(1, 20);
  const double tau2 = 7.0, sigma = 1.3;
  const int alpha = 4;
  const PrecisionOperator op(grid, Eigen::VectorXd::Constant(grid.size(), tau2),
                             alpha, sigma);

  const Eigen::MatrixXd P = Eigen::MatrixXd(neumann_laplacian(grid));
  const Eigen::MatrixXd shifted =
      P + tau2 * Eigen::MatrixXd::Identity(grid.size(), grid.size());
  // A = sigma^{-1} * (tau^2)^{d/4 - alpha/2} * (P + tau^2 I)^{alpha/2}, d = 1.
  const Eigen::MatrixXd oracle =
      (1.0 / sigma) * std::pow(tau2, 0.25 - 2.0) * (shifted * shifted);

  const Eigen::MatrixXd A = densify(
      grid.size(), [&](const Eigen::VectorXd& v) { return op.apply(v); });
  CHECK((A - oracle).cwiseAbs().maxCoeff() / oracle.cwiseAbs().maxCoeff() < 1e-12);

  // Constant Gamma makes A symmetric, so transpose application coincides.
  RandomStream rng(5);
  const Eigen::VectorXd v = rng.gaussian_vector(grid.size());
  CHECK((op.apply(v) - op.apply_transpose(v)).cwiseAbs().maxCoeff() < 1e-10);

  // solve inverts apply.
  CHECK((op.solve(op.apply(v)) - v).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("precision operator transpose is the adjoint for varying scales") {
  const Grid grid = Grid::make(1, 12);
  RandomStream rng(31);
  Eigen::VectorXd gamma(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    gamma[i] = 1.0 + 50.0 * rng.uniform();
  const PrecisionOperator op(grid, gamma, 4, 0.7);

  const Eigen::MatrixXd A = densify(
      grid.size(), [&](const Eigen::VectorXd& v) { return op.apply(v); });
  const Eigen::MatrixXd At = densify(
      grid.size(), [&](const Eigen::VectorXd& v) { return op.apply_transpose(v); });
  CHECK((A.transpose() - At).cwiseAbs().maxCoeff() < 1e-12);

  // A^T A is symmetric positive definite.
  const Eigen::MatrixXd gram = A.transpose() * A;
  CHECK((gram - gram.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("precision operator rejects malformed parameters") {
  const Grid grid = Grid::make(1, 8);
  const Eigen::VectorXd ok = Eigen::VectorXd::Constant(grid.size(), 1.0);
  CHECK_THROWS_AS(PrecisionOperator(grid, ok, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PrecisionOperator(grid, ok, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PrecisionOperator(grid, ok, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(PrecisionOperator(grid, Eigen::VectorXd::Constant(5, 1.0), 4, 1.0),
                  std::invalid_argument);
  Eigen::VectorXd bad = ok;
  bad[3] = 0.0;
  CHECK_THROWS_AS(PrecisionOperator(grid, bad, 4, 1.0), std::invalid_argument);
}

TEST_CASE("implied covariance equals the whitened inverse Gram oracle") {
  const Grid grid = Grid::make(1, 20);
  RandomStream rng(77);
  Eigen::VectorXd gamma(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    gamma[i] = 5.0 + 20.0 * rng.uniform();
  const PrecisionOperator op(grid, gamma, 4, 1.1);

  const Eigen::MatrixXd A = densify(
      grid.size(), [&](const Eigen::VectorXd& v) { return op.apply(v); });
  const Eigen::MatrixXd oracle =
      (A.transpose() * A).inverse() / grid.cell_volume();
  const Eigen::MatrixXd C = op.dense_covariance();
  CHECK((C - oracle).cwiseAbs().maxCoeff() / oracle.cwiseAbs().maxCoeff() < 1e-8);

  const std::vector<Eigen::Index> nodes = {0, 7, 19};
  const Eigen::MatrixXd cols = op.covariance_columns(nodes);
  CHECK(cols.rows() == grid.size());
  CHECK(cols.cols() == 3);
  for (int j = 0; j < 3; ++j)
    CHECK((cols.col(j) - C.col(nodes[size_t(j)])).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("white noise variance scales inversely with cell volume") {
  RandomStream rng(13);
  const Grid coarse = Grid::make(1, 50);
  const Grid fine = Grid::make(1, 100);
  auto mean_square = [&](const Grid& g, int draws) {
    double acc = 0.0;
    for (int k = 0; k < draws; ++k) acc += white_noise(g, rng).squaredNorm() / g.size();
    return acc / draws;
  };
  const double vc = mean_square(coarse, 400);
  const double vf = mean_square(fine, 400);
  CHECK(vc == doctest::Approx(50.0).epsilon(0.05));
  CHECK(vf / vc == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("spde draws are deterministic and carry the implied covariance") {
  const Grid grid = Grid::make(1, 30);
  const PrecisionOperator op(grid, Eigen::VectorXd::Constant(grid.size(), 400.0),
                             4, 2.0);
  RandomStream a(3), b(3);
  CHECK(sample_spde(op, a) == sample_spde(op, b));

  // Sample second moments against dense_covariance diagonal.
  RandomStream rng(71);
  const Eigen::VectorXd var = op.dense_covariance().diagonal();
  const int draws = 4000;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(grid.size());
  for (int k = 0; k < draws; ++k) acc += sample_spde(op, rng).cwiseAbs2();
  acc /= draws;
  CHECK(((acc - var).cwiseAbs().cwiseQuotient(var)).maxCoeff() < 0.1);
}

TEST_CASE("sigma calibration normalizes the spatial mean square to one") {
  const Grid grid = Grid::make(1, 200);
  RandomStream rng(2026);
  const double sigma = calibrate_sigma(grid, 4, 200, rng);
  CHECK(sigma > 0.0);

  // Deterministic given the stream.
  RandomStream rng2(2026);
  CHECK(calibrate_sigma(grid, 4, 200, rng2) == sigma);

  // Fresh draws at the calibrated sigma have unit spatial mean square.
  const PrecisionOperator op(
      grid, Eigen::VectorXd::Constant(grid.size(), 400.0), 4, sigma);
  RandomStream fresh(555);
  double acc = 0.0;
  const int draws = 500;
  for (int k = 0; k < draws; ++k)
    acc += sample_spde(op, fresh).squaredNorm() / grid.size();
  acc /= draws;
  CHECK(acc == doctest::Approx(1.0).epsilon(0.15));

  CHECK_THROWS_AS(calibrate_sigma(grid, 4, 50, rng), std::invalid_argument);
}

TEST_CASE("sine basis fields vanish at the boundary") {
  const SpectralCovariance bb = make_brownian_bridge(16);
  CHECK(bb.truncation() == 16);
  for (int j = 1; j <= 16; ++j)
    CHECK(bb.lambda2[j - 1] ==
          doctest::Approx(1.0 / (M_PI * M_PI * j * j)).epsilon(1e-14));

  const Grid grid = Grid::make(1, 64);
  RandomStream rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    const SpectralSample s = sample_spectral(bb, grid, rng);
    CHECK(std::abs(spectral_value(bb, s.coeffs, 0.0)) < 1e-12);
    CHECK(std::abs(spectral_value(bb, s.coeffs, 1.0)) < 1e-12);
  }
}

TEST_CASE("single sine mode synthesizes exactly") {
  SpectralCovariance one_mode;
  one_mode.basis = SpectralBasis::SineDirichlet;
  one_mode.lambda2 = Eigen::VectorXd::Constant(1, 1.0);
  const Grid grid = Grid::make(1, 32);
  RandomStream rng(23);
  const SpectralSample s = sample_spectral(one_mode, grid, rng);
  REQUIRE(s.coeffs.size() == 1);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double expected =
        s.coeffs[0] * std::sqrt(2.0) * std::sin(M_PI * grid.axis_coord(i));
    CHECK(s.field[i] == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("fourier spectrum literals and periodicity") {
  const SpectralCovariance f = make_brownian_bridge_fourier(8);
  CHECK(f.basis == SpectralBasis::PeriodicFourier);
  for (int k = 1; k <= 8; ++k)
    CHECK(f.lambda2[k - 1] ==
          doctest::Approx(1.0 / (2.0 * M_PI * M_PI * k * k)).epsilon(1e-14));

  const Grid grid = Grid::make(1, 32, GridLayout::Periodic);
  RandomStream rng(29);
  const SpectralSample s = sample_spectral(f, grid, rng);
  CHECK(s.coeffs.size() == 16);  // cosine/sine pair per retained mode
  CHECK(std::abs(spectral_value(f, s.coeffs, 0.0) -
                 spectral_value(f, s.coeffs, 1.0)) < 1e-12);
}

TEST_CASE("spectral pointwise variance matches the truncated series") {
  const SpectralCovariance bb = make_brownian_bridge(12);
  const Grid grid = Grid::make(1, 16);
  RandomStream rng(37);
  const double x = 0.37;
  double exact = 0.0;
  for (int j = 1; j <= 12; ++j) {
    const double phi = std::sqrt(2.0) * std::sin(j * M_PI * x);
    exact += bb.lambda2[j - 1] * phi * phi;
  }
  const int draws = 20000;
  double acc = 0.0, acc2 = 0.0;
  for (int k = 0; k < draws; ++k) {
    const SpectralSample s = sample_spectral(bb, grid, rng);
    const double v = spectral_value(bb, s.coeffs, x);
    acc += v * v;
    acc2 += v * v * v * v;
  }
  const double mean = acc / draws;
  const double se = std::sqrt((acc2 / draws - mean * mean) / draws);
  CHECK(std::abs(mean - exact) < 3.0 * se);
}

}  // TEST_SUITE
