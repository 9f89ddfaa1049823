// Microbenchmarks for the hot paths: kernel-matrix assembly, dense and SPDE
// layer sampling, the FFT convolution step, the pCN transition with the
// marginal potential, and the exact top-layer regression draw.

#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "dgp/constructions.hpp"
#include "dgp/fields.hpp"
#include "dgp/grid.hpp"
#include "dgp/inference.hpp"
#include "dgp/kernels.hpp"
#include "dgp/random.hpp"

using namespace dgp;

namespace {

// Uniform 1-d observations at the first J cell centers of the grid, with
// synthetic noisy values; shared by the inference-path benchmarks.
Dataset make_bench_dataset(const Grid& grid, int J, RandomStream& rng) {
  Eigen::MatrixXd pts(J, 1);
  for (int j = 0; j < J; ++j) pts(j, 0) = (j + 0.5) / double(J);
  const Eigen::VectorXd y = rng.gaussian_vector(J);
  return make_dataset(pts, y, 0.02, grid);
}

void BM_CorrelationAssembly(benchmark::State& state) {
  const int n = int(state.range(0));
  const Grid grid = Grid::make(1, n);
  const Eigen::MatrixXd pts = grid.points();
  RandomStream rng(1);
  const Eigen::VectorXd u = rng.gaussian_vector(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        build_correlation_matrix(pts, u, SquareMap{}, GaussianCorrelation{}));
  }
}
BENCHMARK(BM_CorrelationAssembly)->Arg(64)->Arg(256);

void BM_DenseLayerStep(benchmark::State& state) {
  const int n = int(state.range(0));
  const Grid grid = Grid::make(1, n);
  const CovFunctionConfig cfg;
  RandomStream rng(2);
  const Eigen::VectorXd u = rng.gaussian_vector(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_covfun(u, cfg, grid, rng));
  }
}
BENCHMARK(BM_DenseLayerStep)->Arg(64)->Arg(256);

void BM_SpdeLayerStep1d(benchmark::State& state) {
  const int n = int(state.range(0));
  const Grid grid = Grid::make(1, n);
  const CovOperatorConfig cfg;
  RandomStream rng(3);
  const Eigen::VectorXd u = covop_initial_layer(cfg, grid, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_covop(u, cfg, grid, rng));
  }
}
BENCHMARK(BM_SpdeLayerStep1d)->Arg(100)->Arg(400);

void BM_SpdeLayerStep2d(benchmark::State& state) {
  const Grid grid = Grid::make(2, int(state.range(0)));
  const CovOperatorConfig cfg;
  RandomStream rng(4);
  const Eigen::VectorXd u = covop_initial_layer(cfg, grid, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_covop(u, cfg, grid, rng));
  }
}
BENCHMARK(BM_SpdeLayerStep2d)->Arg(33);

void BM_ConvolutionStep(benchmark::State& state) {
  const int n = int(state.range(0));
  const Grid grid = Grid::make(1, n, GridLayout::Periodic);
  const ConvolutionConfig cfg;  // 64 retained modes
  RandomStream rng(5);
  Eigen::VectorXcd u =
      sample_spectral(cfg.cov, grid, rng).field.cast<std::complex<double>>();
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_convolution(u, cfg, grid, rng));
  }
}
BENCHMARK(BM_ConvolutionStep)->Arg(256)->Arg(1024);

void BM_PcnStepMarginalPotential(benchmark::State& state) {
  const Grid grid = Grid::make(1, 100);
  const ConstructionVariant variant = CovOperatorConfig{};
  RandomStream rng(6);
  const Dataset data = make_bench_dataset(grid, 50, rng);
  NonCentredState st = sample_prior_state(variant, grid, 1, 0.2, rng);
  const PotentialFn psi = [&](const std::vector<Eigen::VectorXd>& u) {
    return potential_psi(u.back(), data, variant, grid);
  };
  st.potential = psi(st.u);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcn_step(st, psi, variant, grid, rng));
  }
}
BENCHMARK(BM_PcnStepMarginalPotential);

void BM_TopLayerRegression(benchmark::State& state) {
  const Grid grid = Grid::make(1, 100);
  const ConstructionVariant variant = CovOperatorConfig{};
  RandomStream rng(7);
  const Dataset data = make_bench_dataset(grid, 50, rng);
  const Eigen::VectorXd u_top = 0.5 * rng.gaussian_vector(grid.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gp_regress_top_layer(u_top, data, variant, grid, rng));
  }
}
BENCHMARK(BM_TopLayerRegression);

}  // namespace

BENCHMARK_MAIN();
