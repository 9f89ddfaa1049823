#pragma once

#include <vector>

#include <Eigen/Core>

#include "dgp/constructions.hpp"

namespace dgp {

// Threshold separating almost-sure decay from divergence of convolution
// modes: 2 e^gamma with gamma the Euler-Mascheroni constant.
double convolution_threshold();

// E log|eta|^2 for eta ~ N(0,1): -gamma - log 2.
double log_chi_squared_mean();

// ---------------------------------------------------------------------------
// Ensemble spread decay (composition construction).

struct SpreadSeries {
  Eigen::VectorXd mean_square;  // per-layer ensemble mean of pairwise spread
  Eigen::VectorXd max_spread;   // per-layer ensemble max
  int replicas = 0;
  double rate = 0.0;            // fitted slope of log mean_square vs layer
  double rate_se = 0.0;
  double rate_ci_halfwidth = 0.0;  // 2 * se
  bool trivial = false;            // all spreads identically zero
  int fit_begin = 0;               // first layer used by the fit
  int fit_end = 0;                 // one past the last layer used
};

// Fitted log-decay rate of the ensemble mean-square spread, estimated per
// step: the replica-mean one-step spread ratio is averaged in log over the
// usable steps (the replica mean of the n-step product is far too
// heavy-tailed to fit directly at feasible replica counts). The first two
// layers are excluded as transient; a replica contributes to a step only
// while its spread remains above 1e-8 x its own initial spread
// (factorization jitter floors deeply contracted layers), and the window
// closes once fewer than half the replicas qualify.
SpreadSeries fit_spread_decay(const std::vector<ChainTrajectory>& ensemble);

// ---------------------------------------------------------------------------
// Convolution mode diagnostics.

enum class ModeFate { Decay, Diverge, Indeterminate };

struct ModeVerdict {
  int k = 0;
  double lambda2 = 0.0;
  double threshold = 0.0;       // 2 e^gamma
  double lyapunov = 0.0;        // mean of log |u_{n+1}/u_n|^2
  double lyapunov_se = 0.0;
  ModeFate verdict = ModeFate::Indeterminate;
  double growth_exponent = 0.0;  // mean-square growth rate log lambda^2
};

// Classifies one mode trajectory by its empirical Lyapunov exponent with a
// half-width of 0.5 standard errors: decay when estimate + hw < 0, diverge
// when estimate - hw > 0. Steps whose coefficients underflowed to zero are
// skipped. A zero initial coefficient is indeterminate.
ModeVerdict mode_classifier(const Eigen::VectorXcd& coeff_traj, double lambda2,
                            int k = 0);

// Monte-Carlo estimate of E log|eta|^2 over n standard normals.
double lyapunov_constant_estimate(long n, RandomStream& rng);

// Log-slope of the replica-mean of |u_hat_n|^2 vs n, fitted on the telescoped
// per-step replica means (the raw replica mean of the n-step product is far
// too heavy-tailed to average at feasible replica counts).
double mean_square_growth_slope(const std::vector<Eigen::VectorXcd>& replicas,
                                int fit_begin = 0);

// ---------------------------------------------------------------------------
// Norm traces and two-ensemble comparison.

struct NormTrace {
  Eigen::VectorXd norms;         // per-layer sqrt(mean u^2)
  Eigen::VectorXd running_mean;  // cumulative mean of norms
};

NormTrace norm_trace(const ChainTrajectory& traj);

// Per-layer ensembles from two starting layers; each matrix is replicas x N
// (row r = the grid values of replica r's layer).
struct TwoStartEnsembles {
  std::vector<Eigen::MatrixXd> a;
  std::vector<Eigen::MatrixXd> b;
};

// Runs `replicas` chains from each initial layer. With shared_noise, replica
// r of both ensembles consumes the same derived substream (the coupling
// construction); otherwise all substreams are independent.
TwoStartEnsembles run_two_start(const DeepChainConfig& cfg,
                                const Eigen::MatrixXd& u0_a,
                                const Eigen::MatrixXd& u0_b, int replicas,
                                RandomStream& rng, bool shared_noise = false);

// Energy distance between two samples of vectors (rows):
// 2 E||a-b|| - E||a-a'|| - E||b-b'||, all-pairs estimates.
double energy_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

struct EnergyDistanceSeries {
  Eigen::VectorXd distance;  // per-layer energy distance between ensembles
  int replicas = 0;
};

EnergyDistanceSeries two_start_coupling_diagnostic(
    const DeepChainConfig& cfg, const Eigen::MatrixXd& u0_a,
    const Eigen::MatrixXd& u0_b, int replicas, RandomStream& rng,
    bool shared_noise = false);

// Bootstrap (over replicas) of distance[layer_late] - distance[layer_early];
// returns the requested quantile of the bootstrap distribution. Negative
// values mean the ensembles moved closer between the two layers.
double bootstrap_distance_drop_quantile(const TwoStartEnsembles& ens,
                                        int layer_early, int layer_late,
                                        double quantile, int bootstrap,
                                        RandomStream& rng);

}  // namespace dgp
