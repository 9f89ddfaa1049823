#include "dgp/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dgp {

namespace {
constexpr double pi = std::numbers::pi_v<double>;
}

SpectralCovariance make_brownian_bridge(int K) {
  if (K < 1) throw std::invalid_argument("make_brownian_bridge: K must be >= 1");
  SpectralCovariance cov;
  cov.basis = SpectralBasis::SineDirichlet;
  cov.lambda2.resize(K);
  for (int j = 1; j <= K; ++j) cov.lambda2[j - 1] = 1.0 / (pi * pi * j * j);
  return cov;
}

SpectralCovariance make_cosine_neumann(int K) {
  SpectralCovariance cov = make_brownian_bridge(K);
  cov.basis = SpectralBasis::CosineNeumann;
  return cov;
}

SpectralCovariance make_brownian_bridge_fourier(int K) {
  if (K < 1)
    throw std::invalid_argument("make_brownian_bridge_fourier: K must be >= 1");
  SpectralCovariance cov;
  cov.basis = SpectralBasis::PeriodicFourier;
  cov.lambda2.resize(K);
  for (int k = 1; k <= K; ++k) cov.lambda2[k - 1] = 1.0 / (2.0 * pi * pi * k * k);
  return cov;
}

SpectralCovariance make_periodic_fourier(Eigen::VectorXd lambda2) {
  if (lambda2.size() < 1 || (lambda2.array() < 0).any())
    throw std::invalid_argument("make_periodic_fourier: invalid spectrum");
  SpectralCovariance cov;
  cov.basis = SpectralBasis::PeriodicFourier;
  cov.lambda2 = std::move(lambda2);
  return cov;
}

double spectral_value(const SpectralCovariance& cov, const Eigen::VectorXd& coeffs,
                      double x) {
  const int K = cov.truncation();
  double v = 0.0;
  if (cov.basis == SpectralBasis::PeriodicFourier) {
    if (coeffs.size() != 2 * K)
      throw std::invalid_argument("spectral_value: coefficient size mismatch");
    for (int k = 1; k <= K; ++k) {
      v += std::numbers::sqrt2 *
           (coeffs[2 * (k - 1)] * std::cos(2.0 * pi * k * x) +
            coeffs[2 * (k - 1) + 1] * std::sin(2.0 * pi * k * x));
    }
    return v;
  }
  if (coeffs.size() != K)
    throw std::invalid_argument("spectral_value: coefficient size mismatch");
  const bool sine = cov.basis == SpectralBasis::SineDirichlet;
  for (int j = 1; j <= K; ++j) {
    v += coeffs[j - 1] * std::numbers::sqrt2 *
         (sine ? std::sin(j * pi * x) : std::cos(j * pi * x));
  }
  return v;
}

SpectralSample sample_spectral(const SpectralCovariance& cov, const Grid& grid,
                               RandomStream& rng) {
  const int K = cov.truncation();
  const Eigen::Index n = grid.size();
  SpectralSample s;
  s.field = Eigen::VectorXd::Zero(n);

  if (cov.basis == SpectralBasis::PeriodicFourier) {
    // Real synthesis: each k carries an independent cosine/sine quadrature
    // pair, so the field is the real part of the complex expansion.
    s.coeffs.resize(2 * K);
    for (int k = 1; k <= K; ++k) {
      const double lam = std::sqrt(cov.lambda2[k - 1]);
      const double ca = lam * rng.gaussian();
      const double cb = lam * rng.gaussian();
      s.coeffs[2 * (k - 1)] = ca;
      s.coeffs[2 * (k - 1) + 1] = cb;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double x = grid.axis_coord(i);
        s.field[i] += std::numbers::sqrt2 *
                      (ca * std::cos(2.0 * pi * k * x) +
                       cb * std::sin(2.0 * pi * k * x));
      }
    }
    return s;
  }

  s.coeffs.resize(K);
  const bool sine = cov.basis == SpectralBasis::SineDirichlet;
  for (int j = 1; j <= K; ++j) {
    const double c = std::sqrt(cov.lambda2[j - 1]) * rng.gaussian();
    s.coeffs[j - 1] = c;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = grid.axis_coord(i);
      const double phi = sine ? std::numbers::sqrt2 * std::sin(j * pi * x)
                              : std::numbers::sqrt2 * std::cos(j * pi * x);
      s.field[i] += c * phi;
    }
  }
  return s;
}

}  // namespace dgp
