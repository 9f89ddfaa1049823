#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgp/constructions.hpp"
#include "dgp/experiments.hpp"
#include "dgp/grid.hpp"
#include "dgp/random.hpp"

namespace dgp {

// ---------------------------------------------------------------------------
// Observation model: y = u(obs) + N(0, noise_std^2 I), point evaluation at the
// nearest grid node of each observation location.

struct Dataset {
  Eigen::MatrixXd obs_points;            // J x dim
  std::vector<Eigen::Index> obs_nodes;   // nearest node per observation
  Eigen::VectorXd y;                     // J noisy values
  double noise_std = 0.0;
};

// Validates shapes, requires noise_std > 0 and points inside [0,1]^d, and
// resolves nearest nodes on the given grid.
Dataset make_dataset(const Eigen::MatrixXd& obs_points,
                     const Eigen::VectorXd& y, double noise_std,
                     const Grid& grid);

// Applies the observation operator: u restricted to the dataset's nodes.
Eigen::VectorXd observe(const Eigen::VectorXd& u, const Dataset& data);

// ---------------------------------------------------------------------------
// Non-centred coordinates. The state holds the hyper layers only (the top
// field handled by exact regression is not part of the MCMC state). By
// convention xi[0] stores the base layer u_0 itself, so the whitening map is
// the identity when there is a single layer; xi[k] for k >= 1 is a standard
// Gaussian vector and u_k = L(u_{k-1}) xi_k per the configured construction.

struct NonCentredState {
  std::vector<Eigen::VectorXd> xi;
  std::vector<Eigen::VectorXd> u;   // cached image of xi under the chain map
  double potential = 0.0;
  Eigen::VectorXd beta;             // per-layer pCN step sizes in (0, 1]
  long proposals = 0;
  Eigen::VectorXd accepts;          // per-layer accepted proposal counts
};

// Deterministic chain map T: u_0 = xi_0, u_{k} = L(u_{k-1}) xi_k. Supported
// constructions: CovFunction (Cholesky of the correlation matrix times xi)
// and CovOperator (precision solve against xi read as white noise). The
// composition and convolution chains have no scalar-field whitening map here
// and are rejected with ConfigError.
std::vector<Eigen::VectorXd> whiten_forward(
    const std::vector<Eigen::VectorXd>& xi, const ConstructionVariant& variant,
    const Grid& grid);

// Returns the construction with data-dependent parameters resolved: a
// non-positive CovOperator sigma is replaced by a pilot-run amplitude
// calibration on the given grid (deterministic, independent of caller
// randomness). Other configurations pass through unchanged.
ConstructionVariant resolve_construction(const ConstructionVariant& variant,
                                         const Grid& grid);

// Draws a fresh state from the prior: xi[0] from the construction's base
// distribution, higher entries standard normal.
NonCentredState sample_prior_state(const ConstructionVariant& variant,
                                   const Grid& grid, int n_hyper_layers,
                                   double beta_init, RandomStream& rng);

// ---------------------------------------------------------------------------
// Covariance of the top (regressed) field conditioned on the last hyper
// layer. Dense-kernel constructions build the matrix once; the operator
// construction keeps the sparse factorization and materializes only the
// columns it is asked for.

class TopLayerModel {
 public:
  TopLayerModel(const Eigen::VectorXd& u_top_hyper,
                const ConstructionVariant& variant, const Grid& grid);
  // Stationary base covariance (the zero-hyper-layer model).
  TopLayerModel(const ConstructionVariant& variant, const Grid& grid);

  // C columns at the given nodes (N x n block).
  Eigen::MatrixXd columns(const std::vector<Eigen::Index>& nodes) const;
  // One prior draw of the top field.
  Eigen::VectorXd prior_draw(RandomStream& rng) const;
  // Full dense covariance; intended for tests and small grids.
  Eigen::MatrixXd dense() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// Potentials.

// Least-squares misfit 0.5 |y - u(obs)|^2 / noise_std^2 for an explicit top
// field.
double potential_phi(const Eigen::VectorXd& u_field, const Dataset& data);

// Marginal-likelihood potential for the regressed top field:
//   0.5 y^T M^{-1} y + 0.5 log det M,  M = A C(u_top) A^T + noise_std^2 I,
// evaluated through the Cholesky factor of M.
double potential_psi(const Eigen::VectorXd& u_top_hyper, const Dataset& data,
                     const ConstructionVariant& variant, const Grid& grid);
double potential_psi(const TopLayerModel& model, const Dataset& data);

// ---------------------------------------------------------------------------
// pCN transition kernel on the non-centred coordinates. The potential is an
// arbitrary function of the realized layers u = T(xi); Psi-based inference
// passes a closure over the dataset. The base layer's proposal perturbation
// is drawn from the construction's base distribution so the chain preserves
// the correct reference measure on xi[0].

using PotentialFn = std::function<double(const std::vector<Eigen::VectorXd>&)>;

struct PcnResult {
  bool accepted = false;
  double log_alpha = 0.0;  // log acceptance probability (capped at 0)
};

// One joint move: all layers proposed together, accepted or rejected as one.
PcnResult pcn_step(NonCentredState& state, const PotentialFn& potential,
                   const ConstructionVariant& variant, const Grid& grid,
                   RandomStream& rng);

// One Metropolis-within-Gibbs sweep: layers proposed and accepted one at a
// time, lowest first. Returns the result of the last sub-step.
PcnResult pcn_sweep(NonCentredState& state, const PotentialFn& potential,
                    const ConstructionVariant& variant, const Grid& grid,
                    RandomStream& rng);

// Multiplicative step-size update toward a 0.3 acceptance target:
// beta <- clamp(beta * exp(rate - 0.3), 1e-4, 1). One entry per layer.
Eigen::VectorXd adapt_beta(const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& window_acceptance);

// ---------------------------------------------------------------------------
// Exact Gaussian regression of the top field given the last hyper layer.

struct GpConditional {
  Eigen::VectorXd mean;        // m_y = C A^T M^{-1} y
  Eigen::MatrixXd covariance;  // C_y = C - C A^T M^{-1} A C (dense)
  Eigen::VectorXd sample;      // one draw from N(m_y, C_y)
};

// Dense-covariance version returning mean, covariance, and one draw. The
// draw uses the decoupled form m_y + v - C A^T M^{-1}(A v + e) with v a prior
// draw and e observation noise, so no factorization of C_y is needed.
GpConditional gp_regress_top_layer(const Eigen::VectorXd& u_top_hyper,
                                   const Dataset& data,
                                   const ConstructionVariant& variant,
                                   const Grid& grid, RandomStream& rng);

// ---------------------------------------------------------------------------
// Full posterior sampling run.

struct PosteriorSummary {
  Eigen::VectorXd mean;                      // posterior mean of the top field
  Eigen::VectorXd q05, q50, q95;             // pointwise quantile bands
  std::vector<Eigen::VectorXd> mean_sqrt_f;  // per hyper layer: E F(u_j)^{1/2}
  double l1_error = 0.0;                     // vs truth on the sampling mesh
  double l2_error = 0.0;
  double acceptance_rate = 0.0;
  Eigen::VectorXd beta_final;
  long samples = 0;
  long burn_in = 0;
  std::uint64_t seed = 0;
  std::uint64_t spec_digest = 0;
};

struct ChainRecord {
  std::vector<double> potential_trace;       // Psi after every step
  std::vector<double> window_acceptance;     // joint rate per 50-step window
};

struct InferenceResult {
  PosteriorSummary summary;
  ChainRecord chain;
  GeneratedData data;
};

struct CheckpointOptions {
  std::string path;    // empty disables checkpointing
  long every = 0;      // write every this many steps (0 = never during run)
  bool resume = false; // restore from `path` before sampling if it exists
};

// Generates data per the spec, runs pCN over the hyper layers with the
// marginal potential, regresses the top layer for every retained sample, and
// accumulates mean, pointwise quantiles (per-node reservoirs), per-layer
// length-scale means, and errors against the truth. With n_layers = 1 the
// model is the stationary base covariance and sampling reduces to repeated
// exact regression draws. Identical (spec, seed) gives bit-identical output,
// with or without checkpoint/restore in between.
InferenceResult run_inference(const ExperimentSpec& spec, RandomStream& rng,
                              const CheckpointOptions& checkpoint = {});

}  // namespace dgp
