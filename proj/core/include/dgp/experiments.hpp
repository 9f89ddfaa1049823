#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgp/constructions.hpp"
#include "dgp/grid.hpp"
#include "dgp/random.hpp"

namespace dgp {

enum class TruthKind { Indicator1D, Trig2D, FromFile };
enum class ObsLayout { Uniform, Random, HalfDomain };
enum class ErrorNorm { L1, L2 };
enum class SweepMode { Joint, Gibbs };

struct McmcParams {
  long samples = 50000;
  long burn_in = 10000;
  double beta_init = 0.2;
  bool adapt = true;
  SweepMode sweep = SweepMode::Joint;
};

// Declarative description of one regression experiment. n_layers counts the
// total fields in the prior: n_layers - 1 hyper fields are sampled by MCMC
// and the observed field on top is handled by exact Gaussian regression;
// n_layers = 1 is the stationary base-covariance model.
struct ExperimentSpec {
  std::string name = "experiment";
  ConstructionVariant construction = CovOperatorConfig{};
  int dim = 1;
  TruthKind truth = TruthKind::Indicator1D;
  std::string truth_file;       // TruthKind::FromFile: CSV of node values
  int generation_mesh = 200;    // per side; strictly finer than sampling_mesh
  int sampling_mesh = 100;      // per side
  int J = 50;
  ObsLayout obs_layout = ObsLayout::Uniform;
  double noise_std = 0.02;
  int n_layers = 2;
  McmcParams mcmc;
  std::uint64_t seed = 0;
  bool allow_inverse_crime = false;

  Grid sampling_grid() const { return Grid::make(dim, sampling_mesh); }
  Grid generation_grid() const { return Grid::make(dim, generation_mesh); }

  bool operator==(const ExperimentSpec& other) const;
};

// Throws ConfigError on any violated invariant (mesh ordering unless
// explicitly allowed, burn-in >= samples, J > generation nodes, ...).
void validate(const ExperimentSpec& spec);

const char* truth_name(TruthKind truth);
TruthKind truth_from_name(const std::string& name);

// FNV-1a hash of the canonical serialized form; stamped on artifacts.
std::uint64_t spec_hash(const ExperimentSpec& spec);

// JSON round trip. parse(serialize(s)) == s.
ExperimentSpec parse_experiment_config(const std::string& json_text);
std::string serialize_experiment_config(const ExperimentSpec& spec);

// ---------------------------------------------------------------------------
// Data generation and error metrics.

// Truth evaluated at each node of a grid.
Eigen::VectorXd evaluate_truth(const ExperimentSpec& spec, const Grid& grid);

struct GeneratedData {
  Eigen::MatrixXd obs_points;             // J x dim
  Eigen::VectorXd y;                      // noisy point observations
  Eigen::VectorXd truth_generation;       // truth on the generation mesh
  Eigen::VectorXd truth_sampling;         // truth restricted to sampling mesh
  std::vector<Eigen::Index> obs_nodes;    // nearest sampling-mesh node per obs
};

// Evaluates the truth on the generation mesh, observes it at J points of the
// requested layout (values from the nearest generation node), and adds
// N(0, noise_std^2) noise.
GeneratedData generate_data(const ExperimentSpec& spec, RandomStream& rng);

// Midpoint-rule error between two fields on the same cell-centered grid.
double compute_error(const Eigen::VectorXd& mean, const Eigen::VectorXd& truth,
                     const Grid& grid, ErrorNorm norm);

// ---------------------------------------------------------------------------
// Report: error table over (J, n_layers) at a common base spec.

struct ErrorRow {
  int J = 0;
  int n_layers = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  double noise_std = 0.0;
  TruthKind truth = TruthKind::Indicator1D;
};

// Fans independent (J, n_layers) runs over `jobs` worker threads; each cell
// derives its seed from (spec.seed, cell index), so the table is reproducible
// regardless of scheduling.
ErrorReport run_report(const ExperimentSpec& base, const std::vector<int>& Js,
                       const std::vector<int>& layer_counts, int jobs);

// Plain-text rendering: one row per J, one column per layer count.
std::string format_report_table(const ErrorReport& report, ErrorNorm norm);

// Refuses to merge rows computed under different noise/truth settings.
ErrorReport merge_reports(const std::vector<ErrorReport>& parts);

}  // namespace dgp
