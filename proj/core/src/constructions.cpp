#include "dgp/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "dgp/errors.hpp"
#include "dgp/fft.hpp"

namespace dgp {

namespace {

// Gram matrix h(||v_i - v_j||) on row vectors; rows must be the distinct set.
Eigen::MatrixXd value_gram(const Eigen::MatrixXd& values,
                           const IsotropicKernel& h) {
  const Eigen::Index n = values.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = kernel_at_zero(h);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = eval_isotropic(h, (values.row(i) - values.row(j)).norm());
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

// Rows of `values` reduced to exact-duplicate representatives; rep[i] is the
// row of the reduced matrix that row i maps to.
Eigen::MatrixXd dedup_rows(const Eigen::MatrixXd& values,
                           std::vector<Eigen::Index>& rep) {
  const Eigen::Index n = values.rows();
  rep.assign(std::size_t(n), 0);
  std::map<std::vector<double>, Eigen::Index> seen;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> key(values.row(i).begin(), values.row(i).end());
    auto [it, inserted] = seen.emplace(std::move(key), Eigen::Index(keep.size()));
    if (inserted) keep.push_back(i);
    rep[std::size_t(i)] = it->second;
  }
  Eigen::MatrixXd reduced(Eigen::Index(keep.size()), values.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) reduced.row(Eigen::Index(r)) = values.row(keep[r]);
  return reduced;
}

}  // namespace

Eigen::MatrixXd step_composition(const Eigen::MatrixXd& u,
                                 const CompositionConfig& cfg, const Grid& grid,
                                 RandomStream& rng) {
  if (!u.allFinite())
    throw std::invalid_argument("step_composition: non-finite layer values");
  if (u.rows() != grid.size() || u.cols() != cfg.m)
    throw std::invalid_argument("step_composition: layer shape mismatch");

  Eigen::MatrixXd values = u;
  if (cfg.connect_input) {
    values.conservativeResize(Eigen::NoChange, cfg.m + grid.dim());
    values.rightCols(grid.dim()) = grid.points();
  }

  std::vector<Eigen::Index> rep;
  const Eigen::MatrixXd distinct = dedup_rows(values, rep);
  const CholeskyFactor fac = cholesky_with_jitter(value_gram(distinct, cfg.h));

  Eigen::MatrixXd draws(distinct.rows(), cfg.m);
  for (int c = 0; c < cfg.m; ++c) draws.col(c) = sample_dense(fac, rng);

  Eigen::MatrixXd out(u.rows(), cfg.m);
  for (Eigen::Index i = 0; i < u.rows(); ++i) out.row(i) = draws.row(rep[std::size_t(i)]);
  return out;
}

Eigen::MatrixXd composition_initial_layer(const CompositionConfig& cfg,
                                          const Grid& grid, RandomStream& rng) {
  const CholeskyFactor fac =
      cholesky_with_jitter(value_gram(grid.points(), cfg.h));
  Eigen::MatrixXd u0(grid.size(), cfg.m);
  for (int c = 0; c < cfg.m; ++c) u0.col(c) = sample_dense(fac, rng);
  return u0;
}

Eigen::VectorXd step_covfun(const Eigen::VectorXd& u, const CovFunctionConfig& cfg,
                            const Grid& grid, RandomStream& rng) {
  const CorrelationMatrix R =
      build_correlation_matrix(grid.points(), u, cfg.F, cfg.base);
  return sample_dense(R, rng);
}

Eigen::VectorXd covfun_initial_layer(const CovFunctionConfig& cfg, const Grid& grid,
                                     RandomStream& rng) {
  const CorrelationMatrix RS = build_stationary_matrix(grid.points(), 1.0, cfg.base);
  return sample_dense(RS, rng);
}

Eigen::VectorXd step_covop(const Eigen::VectorXd& u, const CovOperatorConfig& cfg,
                           const Grid& grid, RandomStream& rng) {
  PrecisionOperator op(grid, eval_length_scale(cfg.F, u), cfg.alpha, cfg.sigma);
  return sample_spde(op, rng);
}

Eigen::VectorXd covop_initial_layer(const CovOperatorConfig& cfg, const Grid& grid,
                                    RandomStream& rng) {
  PrecisionOperator op(
      grid,
      Eigen::VectorXd::Constant(grid.size(), cfg.base_gamma * cfg.base_gamma),
      cfg.alpha, cfg.sigma);
  return sample_spde(op, rng);
}

Eigen::VectorXcd convolution_coefficients(const Eigen::VectorXcd& u, int K,
                                          const Grid& grid) {
  const int n = int(grid.size());
  if (K >= n)
    throw std::invalid_argument("convolution_coefficients: K must be < grid size");
  Fft1d fft(n);
  const Eigen::VectorXcd U = fft.forward(u);
  Eigen::VectorXcd c(K);
  for (int k = 1; k <= K; ++k) c[k - 1] = U[k] / double(n);
  return c;
}

ConvolutionStep step_convolution(const Eigen::VectorXcd& u,
                                 const ConvolutionConfig& cfg, const Grid& grid,
                                 RandomStream& rng) {
  if (grid.dim() != 1)
    throw std::invalid_argument("step_convolution: 1-d grids only");
  if (grid.layout() != GridLayout::Periodic)
    throw std::invalid_argument("step_convolution: periodic grid layout required");
  const int n = int(grid.size());
  const int K = cfg.cov.truncation();
  if (cfg.cov.basis != SpectralBasis::PeriodicFourier)
    throw std::invalid_argument(
        "step_convolution: spectrum must be in the periodic Fourier basis");
  if (2 * K >= n)
    throw std::invalid_argument("step_convolution: grid too coarse for K modes");

  Fft1d fft(n);
  Eigen::VectorXcd U = fft.forward(u);

  // Continuum coefficients are U/n; the noise multiplier acts per mode and
  // everything beyond the truncation (including the mean bin) is annihilated.
  Eigen::VectorXcd mult = Eigen::VectorXcd::Zero(n);
  for (int k = 1; k <= K; ++k) {
    const double lam = std::sqrt(cfg.cov.lambda2[k - 1]);
    mult[k] = lam * rng.gaussian();        // +k bin
    mult[n - k] = lam * rng.gaussian();    // -k bin, independent driver
  }
  for (int b = 0; b < n; ++b) U[b] *= mult[b];

  ConvolutionStep out;
  out.field = fft.inverse(U);  // = sum_k (U_k/n) xi_hat(k) e^{2 pi i k x}
  out.coeffs.resize(K);
  for (int k = 1; k <= K; ++k) out.coeffs[k - 1] = U[k] / double(n);
  return out;
}

// --------------------------------------------------------------------------

namespace {

void layer_stats(const Eigen::MatrixXd& u, const Grid& grid, double& norm,
                 double& max_spread, double& mean_spread) {
  const Eigen::Index n = u.rows();
  norm = std::sqrt(u.squaredNorm() / double(n));  // |D| = 1
  max_spread = 0.0;
  double acc = 0.0;
  Eigen::Index pairs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double s = (u.row(i) - u.row(j)).squaredNorm();
      max_spread = std::max(max_spread, s);
      acc += s;
      ++pairs;
    }
  }
  mean_spread = pairs > 0 ? acc / double(pairs) : 0.0;
  (void)grid;
}

}  // namespace

Eigen::MatrixXd default_initial_layer(const DeepChainConfig& cfg,
                                      RandomStream& rng) {
  if (const auto* comp = std::get_if<CompositionConfig>(&cfg.variant))
    return composition_initial_layer(*comp, cfg.grid, rng);
  if (const auto* cf = std::get_if<CovFunctionConfig>(&cfg.variant))
    return covfun_initial_layer(*cf, cfg.grid, rng);
  if (const auto* co = std::get_if<CovOperatorConfig>(&cfg.variant))
    return covop_initial_layer(*co, cfg.grid, rng);
  // Convolution: draw the initial layer from the driving spectrum itself, so
  // every retained mode starts with a nonzero coefficient almost surely.
  const auto& conv = std::get<ConvolutionConfig>(cfg.variant);
  return sample_spectral(conv.cov, cfg.grid, rng).field;
}

ChainTrajectory run_chain(const DeepChainConfig& cfg, const Eigen::MatrixXd& u0,
                          RandomStream& rng) {
  if (cfg.depth < 0) throw std::invalid_argument("run_chain: negative depth");

  ChainTrajectory traj;
  traj.grid = cfg.grid;
  traj.layers.reserve(std::size_t(cfg.depth) + 1);
  traj.layers.push_back(u0);

  const bool is_conv = std::holds_alternative<ConvolutionConfig>(cfg.variant);
  Eigen::VectorXcd conv_state;
  if (is_conv) {
    if (u0.cols() != 1)
      throw std::invalid_argument("run_chain: convolution layers are scalar");
    conv_state = u0.col(0).cast<std::complex<double>>();
    const auto& conv = std::get<ConvolutionConfig>(cfg.variant);
    traj.mode_coeffs.push_back(
        convolution_coefficients(conv_state, conv.cov.truncation(), cfg.grid));
  }

  for (int step = 0; step < cfg.depth; ++step) {
    if (const auto* comp = std::get_if<CompositionConfig>(&cfg.variant)) {
      traj.layers.push_back(
          step_composition(traj.layers.back(), *comp, cfg.grid, rng));
    } else if (const auto* cf = std::get_if<CovFunctionConfig>(&cfg.variant)) {
      traj.layers.push_back(
          step_covfun(traj.layers.back().col(0), *cf, cfg.grid, rng));
    } else if (const auto* co = std::get_if<CovOperatorConfig>(&cfg.variant)) {
      traj.layers.push_back(
          step_covop(traj.layers.back().col(0), *co, cfg.grid, rng));
    } else {
      const auto& conv = std::get<ConvolutionConfig>(cfg.variant);
      ConvolutionStep s = step_convolution(conv_state, conv, cfg.grid, rng);
      conv_state = s.field;
      traj.layers.push_back(s.field.real());
      traj.mode_coeffs.push_back(s.coeffs);
    }
  }

  const auto L = Eigen::Index(traj.layers.size());
  traj.layer_norms.resize(L);
  traj.layer_max_spread.resize(L);
  traj.layer_mean_square_spread.resize(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    layer_stats(traj.layers[std::size_t(l)], cfg.grid, traj.layer_norms[l],
                traj.layer_max_spread[l], traj.layer_mean_square_spread[l]);
  }
  return traj;
}

}  // namespace dgp
