#include "dgp/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dgp {

double convolution_threshold() {
  return 2.0 * std::exp(std::numbers::egamma_v<double>);
}

double log_chi_squared_mean() {
  return -std::numbers::egamma_v<double> - std::numbers::ln2_v<double>;
}

namespace {

// OLS slope of y vs x with the standard error of the slope.
void ols_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double& slope,
               double& se) {
  const double n = double(x.size());
  const double xbar = x.mean();
  const double ybar = y.mean();
  const double sxx = (x.array() - xbar).square().sum();
  slope = ((x.array() - xbar) * (y.array() - ybar)).sum() / sxx;
  if (x.size() > 2) {
    const double intercept = ybar - slope * xbar;
    const double ss_res =
        (y.array() - intercept - slope * x.array()).square().sum();
    se = std::sqrt(ss_res / (n - 2.0) / sxx);
  } else {
    se = 0.0;
  }
}

}  // namespace

SpreadSeries fit_spread_decay(const std::vector<ChainTrajectory>& ensemble) {
  if (ensemble.size() < 100)
    throw std::invalid_argument("fit_spread_decay: need >= 100 replicas");
  const auto layers = Eigen::Index(ensemble.front().layers.size());
  const auto R = Eigen::Index(ensemble.size());

  SpreadSeries out;
  out.replicas = int(R);
  out.mean_square = Eigen::VectorXd::Zero(layers);
  out.max_spread = Eigen::VectorXd::Zero(layers);
  for (const ChainTrajectory& traj : ensemble) {
    if (Eigen::Index(traj.layers.size()) != layers)
      throw std::invalid_argument("fit_spread_decay: ragged ensemble");
    out.mean_square += traj.layer_mean_square_spread;
    out.max_spread = out.max_spread.cwiseMax(traj.layer_max_spread);
  }
  out.mean_square /= double(R);

  if (out.mean_square.maxCoeff() == 0.0) {
    out.trivial = true;
    return out;
  }

  // Telescoped rate: per step, log of the replica-mean one-step spread ratio,
  // averaged over usable steps. The n-step product is far too heavy-tailed
  // for a direct fit of log replica-mean spread at feasible replica counts,
  // while the one-step ratio conditioned on the current spread is unbiased in
  // the contraction regime. A replica contributes to a step only while its
  // spread stays above 1e-8 x its own initial spread (factorization jitter
  // floors deeply contracted layers near ratio one); the window closes once
  // fewer than half the replicas qualify.
  std::vector<double> step_rates;
  int last_step = 1;
  for (Eigen::Index l = 2; l + 1 < layers; ++l) {
    double ratio_sum = 0.0;
    Eigen::Index used = 0;
    for (const ChainTrajectory& traj : ensemble) {
      const double s0 = traj.layer_mean_square_spread[0];
      const double a = traj.layer_mean_square_spread[l];
      if (s0 <= 0.0 || a < 1e-8 * s0) continue;
      ratio_sum += traj.layer_mean_square_spread[l + 1] / a;
      ++used;
    }
    if (used < R / 2) break;
    step_rates.push_back(std::log(ratio_sum / double(used)));
    last_step = int(l);
  }
  if (step_rates.size() < 3)
    throw std::invalid_argument(
        "fit_spread_decay: too few usable steps above the noise floor");
  const auto n = double(step_rates.size());
  double mean = 0.0;
  for (double r : step_rates) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : step_rates) var += (r - mean) * (r - mean);
  var /= n;
  out.fit_begin = 2;
  out.fit_end = last_step + 2;  // one past the last layer entering a ratio
  out.rate = mean;
  out.rate_se = std::sqrt(var / n);
  out.rate_ci_halfwidth = 2.0 * out.rate_se;
  return out;
}

ModeVerdict mode_classifier(const Eigen::VectorXcd& coeff_traj, double lambda2,
                            int k) {
  if (coeff_traj.size() < 2)
    throw std::invalid_argument("mode_classifier: trajectory too short");

  ModeVerdict v;
  v.k = k;
  v.lambda2 = lambda2;
  v.threshold = convolution_threshold();
  v.growth_exponent = std::log(lambda2);

  if (std::abs(coeff_traj[0]) == 0.0) {
    v.verdict = ModeFate::Indeterminate;
    return v;
  }

  // Increments of log |u_hat|^2; steps that underflowed to zero are skipped.
  double sum = 0.0, sum2 = 0.0;
  long m = 0;
  for (Eigen::Index i = 0; i + 1 < coeff_traj.size(); ++i) {
    const double a = std::abs(coeff_traj[i]);
    const double b = std::abs(coeff_traj[i + 1]);
    if (a == 0.0 || b == 0.0) continue;
    const double d = 2.0 * (std::log(b) - std::log(a));
    sum += d;
    sum2 += d * d;
    ++m;
  }
  if (m < 2) {
    // The trajectory died immediately: treat total underflow as decay.
    v.lyapunov = -std::numeric_limits<double>::infinity();
    v.verdict = ModeFate::Decay;
    return v;
  }
  v.lyapunov = sum / double(m);
  const double var = std::max(0.0, sum2 / double(m) - v.lyapunov * v.lyapunov);
  v.lyapunov_se = std::sqrt(var / double(m));
  const double hw = 0.5 * v.lyapunov_se;
  if (v.lyapunov + hw < 0.0)
    v.verdict = ModeFate::Decay;
  else if (v.lyapunov - hw > 0.0)
    v.verdict = ModeFate::Diverge;
  else
    v.verdict = ModeFate::Indeterminate;
  return v;
}

double lyapunov_constant_estimate(long n, RandomStream& rng) {
  if (n < 10000)
    throw std::invalid_argument("lyapunov_constant_estimate: n must be >= 1e4");
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    const double eta = rng.gaussian();
    acc += std::log(eta * eta);
  }
  return acc / double(n);
}

double mean_square_growth_slope(const std::vector<Eigen::VectorXcd>& replicas,
                                int fit_begin) {
  if (replicas.empty())
    throw std::invalid_argument("mean_square_growth_slope: empty ensemble");
  const Eigen::Index steps = replicas.front().size() - 1;
  if (steps < 3)
    throw std::invalid_argument("mean_square_growth_slope: trajectory too short");

  // Telescoped estimator: the slope of log E|u_n|^2 is recovered from the
  // cumulative sum of log of per-step replica means of |u_{n+1}/u_n|^2. The
  // raw replica mean of |u_n|^2 itself has relative variance growing like
  // 3^n and is useless at realistic replica counts.
  Eigen::VectorXd y(steps + 1);
  y[0] = 0.0;
  for (Eigen::Index s = 0; s < steps; ++s) {
    double mean_ratio = 0.0;
    for (const Eigen::VectorXcd& traj : replicas) {
      const double a = std::abs(traj[s]);
      const double b = std::abs(traj[s + 1]);
      mean_ratio += (b * b) / (a * a);
    }
    mean_ratio /= double(replicas.size());
    y[s + 1] = y[s] + std::log(mean_ratio);
  }

  const Eigen::Index m = steps + 1 - fit_begin;
  Eigen::VectorXd x(m);
  for (Eigen::Index i = 0; i < m; ++i) x[i] = double(fit_begin + i);
  double slope, se;
  ols_slope(x, y.tail(m), slope, se);
  return slope;
}

NormTrace norm_trace(const ChainTrajectory& traj) {
  if (traj.layers.size() < 3)
    throw std::invalid_argument("norm_trace: depth must be >= 2");
  NormTrace t;
  t.norms = traj.layer_norms;
  t.running_mean.resize(t.norms.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < t.norms.size(); ++i) {
    acc += t.norms[i];
    t.running_mean[i] = acc / double(i + 1);
  }
  return t;
}

TwoStartEnsembles run_two_start(const DeepChainConfig& cfg,
                                const Eigen::MatrixXd& u0_a,
                                const Eigen::MatrixXd& u0_b, int replicas,
                                RandomStream& rng, bool shared_noise) {
  const auto layers = std::size_t(cfg.depth) + 1;
  const Eigen::Index nvals = u0_a.size();
  TwoStartEnsembles ens;
  ens.a.assign(layers, Eigen::MatrixXd(replicas, nvals));
  ens.b.assign(layers, Eigen::MatrixXd(replicas, nvals));

  for (int r = 0; r < replicas; ++r) {
    RandomStream sa = rng.derive(2 * std::uint64_t(r));
    RandomStream sb =
        shared_noise ? sa : rng.derive(2 * std::uint64_t(r) + 1);
    const ChainTrajectory ta = run_chain(cfg, u0_a, sa);
    const ChainTrajectory tb = run_chain(cfg, u0_b, sb);
    for (std::size_t l = 0; l < layers; ++l) {
      ens.a[l].row(r) = ta.layers[l].reshaped().transpose();
      ens.b[l].row(r) = tb.layers[l].reshaped().transpose();
    }
  }
  return ens;
}

double energy_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::Index ra = A.rows(), rb = B.rows();
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index j = 0; j < rb; ++j) ab += (A.row(i) - B.row(j)).norm();
  ab /= double(ra) * double(rb);
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index j = i + 1; j < ra; ++j) aa += (A.row(i) - A.row(j)).norm();
  aa *= 2.0 / (double(ra) * double(ra));
  for (Eigen::Index i = 0; i < rb; ++i)
    for (Eigen::Index j = i + 1; j < rb; ++j) bb += (B.row(i) - B.row(j)).norm();
  bb *= 2.0 / (double(rb) * double(rb));
  return 2.0 * ab - aa - bb;
}

EnergyDistanceSeries two_start_coupling_diagnostic(
    const DeepChainConfig& cfg, const Eigen::MatrixXd& u0_a,
    const Eigen::MatrixXd& u0_b, int replicas, RandomStream& rng,
    bool shared_noise) {
  if (replicas < 2)
    throw std::invalid_argument("two_start_coupling_diagnostic: replicas >= 2");
  const TwoStartEnsembles ens =
      run_two_start(cfg, u0_a, u0_b, replicas, rng, shared_noise);
  EnergyDistanceSeries out;
  out.replicas = replicas;
  out.distance.resize(Eigen::Index(ens.a.size()));
  for (std::size_t l = 0; l < ens.a.size(); ++l)
    out.distance[Eigen::Index(l)] = energy_distance(ens.a[l], ens.b[l]);
  return out;
}

double bootstrap_distance_drop_quantile(const TwoStartEnsembles& ens,
                                        int layer_early, int layer_late,
                                        double quantile, int bootstrap,
                                        RandomStream& rng) {
  const auto r = int(ens.a[std::size_t(layer_early)].rows());
  std::vector<double> diffs;
  diffs.reserve(std::size_t(bootstrap));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(r));
  for (int b = 0; b < bootstrap; ++b) {
    for (auto& i : idx) i = Eigen::Index(rng.uniform_index(std::uint64_t(r)));
    auto resample = [&](const Eigen::MatrixXd& M) {
      Eigen::MatrixXd S(r, M.cols());
      for (int i = 0; i < r; ++i) S.row(i) = M.row(idx[std::size_t(i)]);
      return S;
    };
    const double early =
        energy_distance(resample(ens.a[std::size_t(layer_early)]),
                        resample(ens.b[std::size_t(layer_early)]));
    const double late =
        energy_distance(resample(ens.a[std::size_t(layer_late)]),
                        resample(ens.b[std::size_t(layer_late)]));
    diffs.push_back(late - early);
  }
  std::sort(diffs.begin(), diffs.end());
  const auto pos = std::size_t(quantile * double(diffs.size() - 1) + 0.5);
  return diffs[std::min(pos, diffs.size() - 1)];
}

}  // namespace dgp
