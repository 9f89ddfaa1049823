#pragma once

#include <variant>

#include <Eigen/Core>

namespace dgp {

// ---------------------------------------------------------------------------
// Isotropic kernels, evaluated on a scalar distance r >= 0.

// h(r) = sigma2 * exp(-r^2 / (2 w2))
struct SquaredExponential {
  double sigma2 = 1.0;
  double w2 = 1.0;
};

// rho_S(r) = exp(-r^2); unit amplitude, so it is a correlation kernel.
struct GaussianCorrelation {};

using IsotropicKernel = std::variant<SquaredExponential, GaussianCorrelation>;

double eval_isotropic(const IsotropicKernel& kernel, double r);
double kernel_at_zero(const IsotropicKernel& kernel);
bool is_correlation(const IsotropicKernel& kernel);  // value 1 at r = 0

// ---------------------------------------------------------------------------
// Pointwise length-scale maps F applied to a layer's values.

struct SquareMap {};  // F(x) = x^2 (may vanish)
struct ExpMap {};     // F(x) = exp(x); conditioning-hazardous, see README
struct ClampedExpMap {
  double f_minus;  // lower plateau
  double a;
  double b;
  double f_plus;   // upper clamp
};  // F(x) = min{ f_minus + a * exp(b x^2), f_plus }

using LengthScaleMap = std::variant<SquareMap, ExpMap, ClampedExpMap>;

double eval_length_scale(const LengthScaleMap& F, double x);
Eigen::VectorXd eval_length_scale(const LengthScaleMap& F, const Eigen::VectorXd& u);

// Default clamped-exponential parameter sets used by the 1-d and 2-d
// experiment configurations.
ClampedExpMap clamped_exp_params_1d();  // f+ = 150^2, f- = 200, a = 100, b = 2
ClampedExpMap clamped_exp_params_2d();  // f+ = 150^2, f- = 50,  a = 25,  b = 0.3

// ---------------------------------------------------------------------------
// Nonstationary correlation with spatially varying scalar length scale.
//
//   rho(x, x') = (4 gx gx' / (gx + gx')^2)^{d/4} * rho_S(sqrt(Q)),
//   Q = 2 ||x - x'||^2 / (gx + gx').
//
// The guarded path applies the limit conventions: rho(x, x) = 1 always, and
// rho(x, x') = 0 when x != x' and either length scale vanishes. The unguarded
// path evaluates the raw formula and rejects gx = gx' = 0. Note the guarded
// value is discontinuous in (gx, gx') at the origin; that is intrinsic to the
// construction, not an artifact.
double paciorek_correlation(const Eigen::Vector2d& x, const Eigen::Vector2d& xp,
                            double gx, double gxp, const IsotropicKernel& base,
                            int dim, bool guarded = true);

struct CorrelationMatrix {
  Eigen::MatrixXd entries;  // N x N, symmetric, unit diagonal
  Eigen::MatrixXd points;   // N x d
};

// Assembles R with entries rho(x_i, x_j) at length scales g_i = F(u_i).
// Points must be pairwise distinct (duplicates are rejected).
CorrelationMatrix build_correlation_matrix(const Eigen::MatrixXd& points,
                                           const Eigen::VectorXd& u,
                                           const LengthScaleMap& F,
                                           const IsotropicKernel& base);

// Stationary special case: entries k(||x_i - x_j|| / sqrt(g)). Yields a
// covariance (not correlation) matrix when the kernel is not normalized.
CorrelationMatrix build_stationary_matrix(const Eigen::MatrixXd& points,
                                          double g, const IsotropicKernel& base);

}  // namespace dgp
