#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "dgp/fields.hpp"
#include "dgp/grid.hpp"
#include "dgp/kernels.hpp"
#include "dgp/random.hpp"
#include "dgp/spectral.hpp"

namespace dgp {

// ---------------------------------------------------------------------------
// Configuration for the four chain constructions u_{n+1} = L(u_n) xi_{n+1}.

struct CompositionConfig {
  IsotropicKernel h = SquaredExponential{1.0, 1.0};
  int m = 1;                  // number of vector components per layer
  bool connect_input = false; // concatenate the input coordinates each step
};

struct CovFunctionConfig {
  IsotropicKernel base = GaussianCorrelation{};
  LengthScaleMap F = SquareMap{};
};

struct CovOperatorConfig {
  LengthScaleMap F = ClampedExpMap{200.0, 100.0, 2.0, 150.0 * 150.0};
  int alpha = 4;
  double sigma = 1.0;        // <= 0 requests calibration where supported
  double base_gamma = 20.0;  // base layer uses constant Gamma = base_gamma^2
};

struct ConvolutionConfig {
  SpectralCovariance cov = make_brownian_bridge_fourier(64);
};

using ConstructionVariant =
    std::variant<CompositionConfig, CovFunctionConfig, CovOperatorConfig,
                 ConvolutionConfig>;

struct DeepChainConfig {
  ConstructionVariant variant;
  Grid grid = Grid::make(1, 100);
  int depth = 1;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Single steps. Composition layers are N x m matrices (m components); the
// other constructions use scalar fields (N-vectors).

// Draws m i.i.d. scalar GPs with kernel h on the pairwise distances of the
// current layer's values (augmented with the input coordinates when
// connect_input is set); one Cholesky is shared across the m components.
// Exactly duplicated rows map to one factorization row, so piecewise-constant
// layers stay exactly piecewise-constant.
Eigen::MatrixXd step_composition(const Eigen::MatrixXd& u,
                                 const CompositionConfig& cfg, const Grid& grid,
                                 RandomStream& rng);

// Initial composition layer: m i.i.d. GPs with kernel h on the input
// coordinates.
Eigen::MatrixXd composition_initial_layer(const CompositionConfig& cfg,
                                          const Grid& grid, RandomStream& rng);

// u_{n+1} | u_n ~ N(0, R(u_n)) with the nonstationary correlation matrix.
Eigen::VectorXd step_covfun(const Eigen::VectorXd& u, const CovFunctionConfig& cfg,
                            const Grid& grid, RandomStream& rng);

// Base layer for the covariance-function construction: N(0, R_S) with the
// stationary base kernel at unit length scale.
Eigen::VectorXd covfun_initial_layer(const CovFunctionConfig& cfg, const Grid& grid,
                                     RandomStream& rng);

// u_{n+1} | u_n ~ N(0, C(u_n)) by the precision-operator solve with
// Gamma = F(u_n).
Eigen::VectorXd step_covop(const Eigen::VectorXd& u, const CovOperatorConfig& cfg,
                           const Grid& grid, RandomStream& rng);

// Base layer: constant Gamma = base_gamma^2.
Eigen::VectorXd covop_initial_layer(const CovOperatorConfig& cfg, const Grid& grid,
                                    RandomStream& rng);

// Periodic convolution step u_{n+1} = u_n * xi_{n+1}, computed in Fourier
// space: each retained mode is multiplied by lambda_k eta_{n,k} with eta
// i.i.d. N(0,1) per mode (the +k and -k bins carry independent noise; the
// chain state is tracked as a complex field). Returns the new field and the
// normalized mode coefficients u_hat(k), k = 1..K.
struct ConvolutionStep {
  Eigen::VectorXcd field;   // complex chain state on the grid
  Eigen::VectorXcd coeffs;  // u_hat(k) for k = 1..K
};
ConvolutionStep step_convolution(const Eigen::VectorXcd& u,
                                 const ConvolutionConfig& cfg, const Grid& grid,
                                 RandomStream& rng);

// Normalized Fourier coefficients u_hat(k), k = 1..K, of a grid field.
Eigen::VectorXcd convolution_coefficients(const Eigen::VectorXcd& u, int K,
                                          const Grid& grid);

// ---------------------------------------------------------------------------
// Chain runner.

struct ChainTrajectory {
  std::vector<Eigen::MatrixXd> layers;        // depth+1 entries, N x m
  std::vector<Eigen::VectorXcd> mode_coeffs;  // Convolution only: per layer
  Eigen::VectorXd layer_norms;                // sqrt(mean_x ||u(x)||^2 * |D|)
  Eigen::VectorXd layer_max_spread;           // max_{x,x'} ||u(x)-u(x')||^2
  Eigen::VectorXd layer_mean_square_spread;   // mean over pairs
  Grid grid = Grid::make(1, 1);
};

// Applies the configured step `depth` times starting from u0 (layers[0] is
// stored untouched). For Convolution, u0's imaginary part is taken as zero.
ChainTrajectory run_chain(const DeepChainConfig& cfg, const Eigen::MatrixXd& u0,
                          RandomStream& rng);

// Default initial layer for each construction.
Eigen::MatrixXd default_initial_layer(const DeepChainConfig& cfg,
                                      RandomStream& rng);

}  // namespace dgp
