#pragma once

#include <Eigen/Core>

#include "dgp/grid.hpp"
#include "dgp/random.hpp"

namespace dgp {

enum class SpectralBasis {
  PeriodicFourier,  // e^{2 pi i k x}, k = 1..K (complex pair per k)
  SineDirichlet,    // sqrt(2) sin(j pi x), j = 1..K
  CosineNeumann     // sqrt(2) cos(j pi x), j = 1..K
};

// Truncated Karhunen-Loeve description of a covariance: eigenvalue lambda_k^2
// per basis index k = 1..K (stored at [k-1]).
struct SpectralCovariance {
  SpectralBasis basis = SpectralBasis::SineDirichlet;
  Eigen::VectorXd lambda2;  // length K, non-negative

  int truncation() const noexcept { return int(lambda2.size()); }
};

// Brownian-bridge covariance in its sine eigenbasis: lambda_j^2 = (pi j)^{-2}.
SpectralCovariance make_brownian_bridge(int K);

// Cosine (Neumann) variant with the same spectrum.
SpectralCovariance make_cosine_neumann(int K);

// Effective periodic-Fourier eigenvalues induced by the Brownian-bridge
// covariance when it drives a periodic convolution: each sine eigenvalue
// splits evenly over the +-k Fourier pair, |lambda_k|^2 = (2 pi^2 k^2)^{-1}.
SpectralCovariance make_brownian_bridge_fourier(int K);

// Periodic Fourier basis with user-supplied spectrum.
SpectralCovariance make_periodic_fourier(Eigen::VectorXd lambda2);

struct SpectralSample {
  Eigen::VectorXd field;   // synthesized values on the grid
  Eigen::VectorXd coeffs;  // lambda_k eta_k per basis function (2K for Fourier:
                           // cosine/sine quadrature pair per k)
};

// Draws eta i.i.d. N(0,1) and synthesizes sum_k lambda_k eta_k phi_k on the
// grid's first axis (1-d fields).
SpectralSample sample_spectral(const SpectralCovariance& cov, const Grid& grid,
                               RandomStream& rng);

// Evaluates the truncated expansion with the given coefficient vector at an
// arbitrary x in [0,1] (useful for boundary checks off the grid).
double spectral_value(const SpectralCovariance& cov, const Eigen::VectorXd& coeffs,
                      double x);

}  // namespace dgp
