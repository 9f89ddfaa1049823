#include "dgp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <variant>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "dgp/errors.hpp"
#include "dgp/fields.hpp"
#include "dgp/io.hpp"
#include "dgp/kernels.hpp"

namespace dgp {

namespace {

constexpr double kBetaFloor = 1e-4;
constexpr long kAdaptWindow = 50;
constexpr Eigen::Index kReservoirCapacity = 512;
constexpr int kCalibrationPilot = 200;
// Fixed stream for sigma calibration so resolved configurations do not depend
// on caller randomness.
constexpr std::uint64_t kCalibrationSeed = 0xca11b7a7ed51617aULL;

const CovFunctionConfig* as_covfun(const ConstructionVariant& v) {
  return std::get_if<CovFunctionConfig>(&v);
}
const CovOperatorConfig* as_covop(const ConstructionVariant& v) {
  return std::get_if<CovOperatorConfig>(&v);
}

[[noreturn]] void reject_construction(const char* what) {
  throw ConfigError(std::string(what) +
                    " requires the cov-function or cov-operator construction");
}

// One draw from the base layer's distribution (also the pCN perturbation for
// the non-whitened first coordinate).
Eigen::VectorXd base_layer_draw(const ConstructionVariant& variant,
                                const Grid& grid, RandomStream& rng) {
  if (const auto* cf = as_covfun(variant)) {
    return covfun_initial_layer(*cf, grid, rng);
  }
  if (const auto* co = as_covop(variant)) {
    return covop_initial_layer(*co, grid, rng);
  }
  reject_construction("the non-centred parameterization");
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset.

Dataset make_dataset(const Eigen::MatrixXd& obs_points,
                     const Eigen::VectorXd& y, double noise_std,
                     const Grid& grid) {
  if (obs_points.rows() < 1) throw ConfigError("dataset needs J >= 1 points");
  if (obs_points.cols() != grid.dim()) {
    throw ConfigError("observation points have the wrong dimension");
  }
  if (y.size() != obs_points.rows()) {
    throw ConfigError("observation count does not match y");
  }
  if (!(noise_std > 0.0)) throw ConfigError("noise_std must be positive");
  Dataset ds;
  ds.obs_points = obs_points;
  ds.y = y;
  ds.noise_std = noise_std;
  ds.obs_nodes.resize(static_cast<std::size_t>(obs_points.rows()));
  for (Eigen::Index j = 0; j < obs_points.rows(); ++j) {
    Eigen::Vector2d x{obs_points(j, 0),
                      grid.dim() == 2 ? obs_points(j, 1) : 0.0};
    if (x[0] < 0.0 || x[0] > 1.0 || x[1] < 0.0 || x[1] > 1.0) {
      throw ConfigError("observation point outside the unit domain");
    }
    ds.obs_nodes[static_cast<std::size_t>(j)] = grid.nearest_node(x);
  }
  return ds;
}

Eigen::VectorXd observe(const Eigen::VectorXd& u, const Dataset& data) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(data.obs_nodes.size()));
  for (std::size_t j = 0; j < data.obs_nodes.size(); ++j) {
    out[static_cast<Eigen::Index>(j)] = u[data.obs_nodes[j]];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whitening map.

ConstructionVariant resolve_construction(const ConstructionVariant& variant,
                                         const Grid& grid) {
  if (const auto* co = as_covop(variant); co && co->sigma <= 0.0) {
    CovOperatorConfig resolved = *co;
    RandomStream pilot_rng(kCalibrationSeed);
    resolved.sigma = calibrate_sigma(grid, co->alpha, kCalibrationPilot,
                                     pilot_rng, co->base_gamma);
    return resolved;
  }
  return variant;
}

std::vector<Eigen::VectorXd> whiten_forward(
    const std::vector<Eigen::VectorXd>& xi, const ConstructionVariant& variant,
    const Grid& grid) {
  std::vector<Eigen::VectorXd> u;
  u.reserve(xi.size());
  if (xi.empty()) return u;
  const Eigen::Index n = grid.size();
  for (const auto& layer : xi) {
    if (layer.size() != n) {
      throw ConfigError("whitened layer size does not match the grid");
    }
  }
  u.push_back(xi[0]);
  if (xi.size() == 1) return u;

  if (const auto* cf = as_covfun(variant)) {
    const Eigen::MatrixXd points = grid.points();
    for (std::size_t k = 1; k < xi.size(); ++k) {
      CorrelationMatrix R =
          build_correlation_matrix(points, u[k - 1], cf->F, cf->base);
      CholeskyFactor fac = cholesky_with_jitter(R.entries);
      u.push_back(fac.L * xi[k]);
    }
    return u;
  }
  if (const auto* co = as_covop(variant)) {
    if (co->sigma <= 0.0) {
      ConstructionVariant resolved = resolve_construction(variant, grid);
      return whiten_forward(xi, resolved, grid);
    }
    const double root_vol = std::sqrt(grid.cell_volume());
    for (std::size_t k = 1; k < xi.size(); ++k) {
      PrecisionOperator op(grid, eval_length_scale(co->F, u[k - 1]), co->alpha,
                           co->sigma);
      u.push_back(op.solve(xi[k] / root_vol));
    }
    return u;
  }
  reject_construction("the whitening map");
}

NonCentredState sample_prior_state(const ConstructionVariant& variant,
                                   const Grid& grid, int n_hyper_layers,
                                   double beta_init, RandomStream& rng) {
  if (n_hyper_layers < 0) throw ConfigError("negative layer count");
  if (!(beta_init > 0.0 && beta_init <= 1.0)) {
    throw ConfigError("beta must lie in (0, 1]");
  }
  NonCentredState st;
  st.beta = Eigen::VectorXd::Constant(n_hyper_layers, beta_init);
  st.accepts = Eigen::VectorXd::Zero(n_hyper_layers);
  if (n_hyper_layers == 0) return st;
  st.xi.push_back(base_layer_draw(variant, grid, rng));
  for (int k = 1; k < n_hyper_layers; ++k) {
    st.xi.push_back(rng.gaussian_vector(grid.size()));
  }
  st.u = whiten_forward(st.xi, variant, grid);
  return st;
}

// ---------------------------------------------------------------------------
// Top-layer covariance model.

struct TopLayerModel::Impl {
  // Dense kernel path.
  Eigen::MatrixXd C;
  CholeskyFactor chol;
  bool dense_path = false;
  // Operator path.
  std::optional<PrecisionOperator> op;
};

TopLayerModel::TopLayerModel(const Eigen::VectorXd& u_top_hyper,
                             const ConstructionVariant& variant,
                             const Grid& grid) {
  auto impl = std::make_shared<Impl>();
  if (const auto* cf = as_covfun(variant)) {
    CorrelationMatrix R =
        build_correlation_matrix(grid.points(), u_top_hyper, cf->F, cf->base);
    impl->C = std::move(R.entries);
    impl->chol = cholesky_with_jitter(impl->C);
    impl->dense_path = true;
  } else if (const auto* co = as_covop(variant)) {
    if (co->sigma <= 0.0) throw ConfigError("cov-operator sigma unresolved");
    impl->op.emplace(grid, eval_length_scale(co->F, u_top_hyper), co->alpha,
                     co->sigma);
  } else {
    reject_construction("the top-layer covariance");
  }
  impl_ = std::move(impl);
}

TopLayerModel::TopLayerModel(const ConstructionVariant& variant,
                             const Grid& grid) {
  auto impl = std::make_shared<Impl>();
  if (const auto* cf = as_covfun(variant)) {
    CorrelationMatrix R = build_stationary_matrix(grid.points(), 1.0, cf->base);
    impl->C = std::move(R.entries);
    impl->chol = cholesky_with_jitter(impl->C);
    impl->dense_path = true;
  } else if (const auto* co = as_covop(variant)) {
    if (co->sigma <= 0.0) throw ConfigError("cov-operator sigma unresolved");
    Eigen::VectorXd gamma = Eigen::VectorXd::Constant(
        grid.size(), co->base_gamma * co->base_gamma);
    impl->op.emplace(grid, std::move(gamma), co->alpha, co->sigma);
  } else {
    reject_construction("the top-layer covariance");
  }
  impl_ = std::move(impl);
}

Eigen::MatrixXd TopLayerModel::columns(
    const std::vector<Eigen::Index>& nodes) const {
  if (impl_->dense_path) {
    Eigen::MatrixXd out(impl_->C.rows(),
                        static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      out.col(static_cast<Eigen::Index>(j)) = impl_->C.col(nodes[j]);
    }
    return out;
  }
  return impl_->op->covariance_columns(nodes);
}

Eigen::VectorXd TopLayerModel::prior_draw(RandomStream& rng) const {
  if (impl_->dense_path) return sample_dense(impl_->chol, rng);
  return sample_spde(*impl_->op, rng);
}

Eigen::MatrixXd TopLayerModel::dense() const {
  if (impl_->dense_path) return impl_->C;
  return impl_->op->dense_covariance();
}

// ---------------------------------------------------------------------------
// Potentials.

double potential_phi(const Eigen::VectorXd& u_field, const Dataset& data) {
  Eigen::VectorXd r = data.y - observe(u_field, data);
  return 0.5 * r.squaredNorm() / (data.noise_std * data.noise_std);
}

namespace {

// Shared marginal pieces: M = A C A^T + noise^2 I and its Cholesky factor.
struct MarginalFactor {
  Eigen::MatrixXd cov_cols;       // C A^T, N x J
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_det_half = 0.0;      // 0.5 log det M
};

MarginalFactor marginal_factor(const TopLayerModel& model,
                               const Dataset& data) {
  MarginalFactor mf;
  mf.cov_cols = model.columns(data.obs_nodes);
  const Eigen::Index J = static_cast<Eigen::Index>(data.obs_nodes.size());
  Eigen::MatrixXd M(J, J);
  for (Eigen::Index i = 0; i < J; ++i) {
    for (Eigen::Index j = 0; j < J; ++j) {
      M(i, j) = mf.cov_cols(data.obs_nodes[static_cast<std::size_t>(i)], j);
    }
  }
  M = 0.5 * (M + M.transpose()).eval();
  M.diagonal().array() += data.noise_std * data.noise_std;
  mf.llt.compute(M);
  if (mf.llt.info() != Eigen::Success) {
    throw NumericalError("marginal covariance factorization failed", 0.0);
  }
  mf.log_det_half = mf.llt.matrixLLT().diagonal().array().log().sum();
  return mf;
}

}  // namespace

double potential_psi(const TopLayerModel& model, const Dataset& data) {
  MarginalFactor mf = marginal_factor(model, data);
  const double quad = data.y.dot(mf.llt.solve(data.y));
  return 0.5 * quad + mf.log_det_half;
}

double potential_psi(const Eigen::VectorXd& u_top_hyper, const Dataset& data,
                     const ConstructionVariant& variant, const Grid& grid) {
  return potential_psi(TopLayerModel(u_top_hyper, variant, grid), data);
}

// ---------------------------------------------------------------------------
// pCN kernel.

namespace {

Eigen::VectorXd propose_layer(const Eigen::VectorXd& xi, double beta,
                              const Eigen::VectorXd& perturbation) {
  return std::sqrt(1.0 - beta * beta) * xi + beta * perturbation;
}

}  // namespace

PcnResult pcn_step(NonCentredState& state, const PotentialFn& potential,
                   const ConstructionVariant& variant, const Grid& grid,
                   RandomStream& rng) {
  const std::size_t n = state.xi.size();
  state.proposals += 1;
  if (n == 0) return {true, 0.0};

  std::vector<Eigen::VectorXd> prop(n);
  prop[0] = propose_layer(state.xi[0], state.beta[0],
                          base_layer_draw(variant, grid, rng));
  for (std::size_t k = 1; k < n; ++k) {
    prop[k] =
        propose_layer(state.xi[k], state.beta[static_cast<Eigen::Index>(k)],
                      rng.gaussian_vector(grid.size()));
  }
  std::vector<Eigen::VectorXd> u_prop = whiten_forward(prop, variant, grid);
  const double pot_prop = potential(u_prop);
  const double log_alpha = std::min(0.0, state.potential - pot_prop);
  // The comparison uniform is always consumed so the stream position does not
  // depend on the acceptance decision.
  const bool accepted = std::log(rng.uniform()) < log_alpha;
  if (accepted) {
    state.xi = std::move(prop);
    state.u = std::move(u_prop);
    state.potential = pot_prop;
    state.accepts.array() += 1.0;
  }
  return {accepted, log_alpha};
}

PcnResult pcn_sweep(NonCentredState& state, const PotentialFn& potential,
                    const ConstructionVariant& variant, const Grid& grid,
                    RandomStream& rng) {
  const std::size_t n = state.xi.size();
  state.proposals += 1;
  if (n == 0) return {true, 0.0};

  PcnResult last{true, 0.0};
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Eigen::VectorXd> prop = state.xi;
    const double beta = state.beta[static_cast<Eigen::Index>(k)];
    prop[k] = propose_layer(
        state.xi[k], beta,
        k == 0 ? base_layer_draw(variant, grid, rng)
               : rng.gaussian_vector(grid.size()));
    std::vector<Eigen::VectorXd> u_prop = whiten_forward(prop, variant, grid);
    const double pot_prop = potential(u_prop);
    const double log_alpha = std::min(0.0, state.potential - pot_prop);
    const bool accepted = std::log(rng.uniform()) < log_alpha;
    if (accepted) {
      state.xi = std::move(prop);
      state.u = std::move(u_prop);
      state.potential = pot_prop;
      state.accepts[static_cast<Eigen::Index>(k)] += 1.0;
    }
    last = {accepted, log_alpha};
  }
  return last;
}

Eigen::VectorXd adapt_beta(const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& window_acceptance) {
  if (beta.size() != window_acceptance.size()) {
    throw ConfigError("acceptance statistics do not match the layer count");
  }
  return (beta.array() * (window_acceptance.array() - 0.3).exp())
      .cwiseMax(kBetaFloor)
      .cwiseMin(1.0)
      .matrix();
}

// ---------------------------------------------------------------------------
// Top-layer regression.

namespace {

// Decoupled conditional draw: mean + v - C A^T M^{-1} (A v + e). Consumes the
// prior draw first, then the J noise values.
Eigen::VectorXd conditional_draw(const TopLayerModel& model,
                                 const MarginalFactor& mf,
                                 const Eigen::VectorXd& mean,
                                 const Dataset& data, RandomStream& rng) {
  Eigen::VectorXd v = model.prior_draw(rng);
  Eigen::VectorXd e = data.noise_std *
                      rng.gaussian_vector(static_cast<Eigen::Index>(
                          data.obs_nodes.size()));
  Eigen::VectorXd resid = observe(v, data) + e;
  return mean + v - mf.cov_cols * mf.llt.solve(resid);
}

}  // namespace

GpConditional gp_regress_top_layer(const Eigen::VectorXd& u_top_hyper,
                                   const Dataset& data,
                                   const ConstructionVariant& variant,
                                   const Grid& grid, RandomStream& rng) {
  TopLayerModel model(u_top_hyper, variant, grid);
  MarginalFactor mf = marginal_factor(model, data);
  GpConditional out;
  out.mean = mf.cov_cols * mf.llt.solve(data.y);
  Eigen::MatrixXd C = model.dense();
  out.covariance =
      C - mf.cov_cols * mf.llt.solve(mf.cov_cols.transpose());
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  out.sample = conditional_draw(model, mf, out.mean, data, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Full run.

namespace {

struct Accumulators {
  std::uint64_t retained = 0;
  Eigen::VectorXd mean_accum;
  std::vector<Eigen::VectorXd> sqrt_f_accum;
  std::vector<std::uint64_t> reservoir_seen;
  std::vector<std::vector<double>> reservoirs;

  Accumulators(Eigen::Index n, int n_hyper) {
    mean_accum = Eigen::VectorXd::Zero(n);
    sqrt_f_accum.assign(static_cast<std::size_t>(n_hyper),
                        Eigen::VectorXd::Zero(n));
    reservoir_seen.assign(static_cast<std::size_t>(n), 0);
    reservoirs.assign(static_cast<std::size_t>(n), {});
  }

  void add_draw(const Eigen::VectorXd& draw, RandomStream& rng) {
    retained += 1;
    mean_accum += draw;
    for (std::size_t i = 0; i < reservoirs.size(); ++i) {
      auto& res = reservoirs[i];
      const std::uint64_t seen = ++reservoir_seen[i];
      const double v = draw[static_cast<Eigen::Index>(i)];
      if (res.size() < static_cast<std::size_t>(kReservoirCapacity)) {
        res.push_back(v);
      } else {
        const std::uint64_t j = rng.uniform_index(seen);
        if (j < static_cast<std::uint64_t>(kReservoirCapacity)) {
          res[static_cast<std::size_t>(j)] = v;
        }
      }
    }
  }

  double quantile(std::size_t node, double q) const {
    std::vector<double> sorted = reservoirs[node];
    std::sort(sorted.begin(), sorted.end());
    const auto k = static_cast<double>(sorted.size());
    auto idx = static_cast<std::ptrdiff_t>(std::ceil(q * k)) - 1;
    idx = std::clamp<std::ptrdiff_t>(idx, 0,
                                     static_cast<std::ptrdiff_t>(k) - 1);
    return sorted[static_cast<std::size_t>(idx)];
  }
};

// Length-scale map of the construction, if it has one.
const LengthScaleMap* length_scale_map(const ConstructionVariant& variant) {
  if (const auto* cf = as_covfun(variant)) return &cf->F;
  if (const auto* co = as_covop(variant)) return &co->F;
  return nullptr;
}

}  // namespace

InferenceResult run_inference(const ExperimentSpec& spec, RandomStream& rng,
                              const CheckpointOptions& checkpoint) {
  validate(spec);
  const long total = spec.mcmc.samples;
  const long burn_in = spec.mcmc.burn_in;
  if (total - burn_in <= 0) throw ConfigError("empty chain");

  const Grid grid = spec.sampling_grid();
  const Eigen::Index n = grid.size();
  const ConstructionVariant variant =
      resolve_construction(spec.construction, grid);
  const int n_hyper = spec.n_layers - 1;
  const std::uint64_t digest = spec_hash(spec);

  InferenceResult result;
  result.data = generate_data(spec, rng);
  const Dataset data =
      make_dataset(result.data.obs_points, result.data.y, spec.noise_std, grid);

  NonCentredState st = sample_prior_state(variant, grid, n_hyper,
                                          spec.mcmc.beta_init, rng);
  const PotentialFn psi = [&](const std::vector<Eigen::VectorXd>& u) {
    return potential_psi(u.back(), data, variant, grid);
  };
  if (n_hyper > 0) st.potential = psi(st.u);

  Accumulators acc(n, n_hyper);
  ChainRecord& chain = result.chain;
  std::uint64_t post_accepts = 0;
  Eigen::VectorXd window_accepts = Eigen::VectorXd::Zero(n_hyper);
  std::uint64_t window_count = 0;
  long start_step = 0;

  if (checkpoint.resume && !checkpoint.path.empty() &&
      std::filesystem::exists(checkpoint.path)) {
    ChainCheckpoint ck = load_checkpoint(checkpoint.path);
    if (ck.spec_digest != digest || ck.seed != rng.seed()) {
      throw ConfigError("checkpoint does not match the spec and seed");
    }
    st.xi = ck.xi;
    st.beta = ck.beta;
    st.proposals = static_cast<long>(ck.proposals);
    st.accepts = ck.accepts;
    if (n_hyper > 0) {
      st.u = whiten_forward(st.xi, variant, grid);
      st.potential = psi(st.u);
    }
    post_accepts = ck.post_accepts;
    std::istringstream is(ck.rng_state);
    rng.load(is);
    acc.retained = ck.retained;
    acc.mean_accum = ck.mean_accum;
    acc.sqrt_f_accum = ck.sqrt_f_accum;
    acc.reservoir_seen = ck.reservoir_seen;
    acc.reservoirs = ck.reservoirs;
    chain.potential_trace = ck.potential_trace;
    chain.window_acceptance = ck.window_acceptance;
    window_count = ck.window_count;
    window_accepts = ck.window_accepts;
    start_step = static_cast<long>(ck.step);
  }

  const LengthScaleMap* F = length_scale_map(variant);
  // Regression pieces for the current accepted state, rebuilt lazily.
  std::optional<TopLayerModel> model;
  std::optional<MarginalFactor> marginal;
  Eigen::VectorXd cond_mean;
  long model_version = -1;
  long accept_version = 0;

  auto save_state = [&](long completed_steps) {
    ChainCheckpoint ck;
    ck.spec_digest = digest;
    ck.seed = rng.seed();
    ck.step = static_cast<std::uint64_t>(completed_steps);
    ck.xi = st.xi;
    ck.beta = st.beta;
    ck.proposals = static_cast<std::uint64_t>(st.proposals);
    ck.accepts = st.accepts;
    ck.post_accepts = post_accepts;
    std::ostringstream os;
    rng.save(os);
    ck.rng_state = os.str();
    ck.retained = acc.retained;
    ck.mean_accum = acc.mean_accum;
    ck.sqrt_f_accum = acc.sqrt_f_accum;
    ck.reservoir_seen = acc.reservoir_seen;
    ck.reservoirs = acc.reservoirs;
    ck.potential_trace = chain.potential_trace;
    ck.window_acceptance = chain.window_acceptance;
    ck.window_count = window_count;
    ck.window_accepts = window_accepts;
    save_checkpoint(checkpoint.path, ck);
  };

  for (long step = start_step; step < total; ++step) {
    if (n_hyper > 0) {
      const Eigen::VectorXd accepts_before = st.accepts;
      PcnResult r = spec.mcmc.sweep == SweepMode::Joint
                        ? pcn_step(st, psi, variant, grid, rng)
                        : pcn_sweep(st, psi, variant, grid, rng);
      if (r.accepted) {
        accept_version += 1;
      } else if (spec.mcmc.sweep == SweepMode::Gibbs &&
                 (st.accepts - accepts_before).sum() > 0.0) {
        accept_version += 1;  // some sub-step moved even if the last did not
      }
      chain.potential_trace.push_back(st.potential);
      window_accepts += st.accepts - accepts_before;
      window_count += 1;
      if (step >= burn_in && r.accepted) post_accepts += 1;
      if (window_count == kAdaptWindow) {
        const Eigen::VectorXd rate = window_accepts / double(kAdaptWindow);
        chain.window_acceptance.push_back(rate.mean());
        if (spec.mcmc.adapt && step < burn_in) {
          st.beta = adapt_beta(st.beta, rate);
        }
        window_accepts.setZero();
        window_count = 0;
      }
    }
    if (step >= burn_in) {
      if (model_version != accept_version) {
        if (n_hyper > 0) {
          model.emplace(st.u.back(), variant, grid);
        } else {
          model.emplace(variant, grid);
        }
        marginal.emplace(marginal_factor(*model, data));
        cond_mean = marginal->cov_cols * marginal->llt.solve(data.y);
        model_version = accept_version;
      }
      Eigen::VectorXd draw =
          conditional_draw(*model, *marginal, cond_mean, data, rng);
      acc.add_draw(draw, rng);
      if (F != nullptr) {
        for (int j = 0; j < n_hyper; ++j) {
          acc.sqrt_f_accum[static_cast<std::size_t>(j)] +=
              eval_length_scale(*F, st.u[static_cast<std::size_t>(j)])
                  .cwiseSqrt();
        }
      }
    }
    if (!checkpoint.path.empty() && checkpoint.every > 0 &&
        (step + 1) % checkpoint.every == 0) {
      save_state(step + 1);
    }
  }
  if (!checkpoint.path.empty() && checkpoint.every > 0) save_state(total);

  PosteriorSummary& out = result.summary;
  const double m = static_cast<double>(acc.retained);
  out.mean = acc.mean_accum / m;
  out.q05.resize(n);
  out.q50.resize(n);
  out.q95.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto node = static_cast<std::size_t>(i);
    out.q05[i] = acc.quantile(node, 0.05);
    out.q50[i] = acc.quantile(node, 0.50);
    out.q95[i] = acc.quantile(node, 0.95);
  }
  out.mean_sqrt_f.clear();
  for (const auto& s : acc.sqrt_f_accum) out.mean_sqrt_f.push_back(s / m);
  out.l1_error =
      compute_error(out.mean, result.data.truth_sampling, grid, ErrorNorm::L1);
  out.l2_error =
      compute_error(out.mean, result.data.truth_sampling, grid, ErrorNorm::L2);
  out.acceptance_rate =
      n_hyper > 0 ? static_cast<double>(post_accepts) /
                        static_cast<double>(total - burn_in)
                  : 1.0;
  out.beta_final = st.beta;
  out.samples = total;
  out.burn_in = burn_in;
  out.seed = rng.seed();
  out.spec_digest = digest;
  return result;
}

}  // namespace dgp
