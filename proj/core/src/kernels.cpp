#include "dgp/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "dgp/errors.hpp"

namespace dgp {

double eval_isotropic(const IsotropicKernel& kernel, double r) {
  if (r < 0.0) throw std::invalid_argument("eval_isotropic: r must be >= 0");
  if (const auto* se = std::get_if<SquaredExponential>(&kernel)) {
    return se->sigma2 * std::exp(-r * r / (2.0 * se->w2));
  }
  return std::exp(-r * r);
}

double kernel_at_zero(const IsotropicKernel& kernel) {
  if (const auto* se = std::get_if<SquaredExponential>(&kernel)) return se->sigma2;
  return 1.0;
}

bool is_correlation(const IsotropicKernel& kernel) {
  return kernel_at_zero(kernel) == 1.0;
}

double eval_length_scale(const LengthScaleMap& F, double x) {
  if (std::holds_alternative<SquareMap>(F)) return x * x;
  if (std::holds_alternative<ExpMap>(F)) return std::exp(x);
  const auto& c = std::get<ClampedExpMap>(F);
  return std::min(c.f_minus + c.a * std::exp(c.b * x * x), c.f_plus);
}

Eigen::VectorXd eval_length_scale(const LengthScaleMap& F, const Eigen::VectorXd& u) {
  Eigen::VectorXd g(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) g[i] = eval_length_scale(F, u[i]);
  return g;
}

ClampedExpMap clamped_exp_params_1d() { return {200.0, 100.0, 2.0, 150.0 * 150.0}; }
ClampedExpMap clamped_exp_params_2d() { return {50.0, 25.0, 0.3, 150.0 * 150.0}; }

double paciorek_correlation(const Eigen::Vector2d& x, const Eigen::Vector2d& xp,
                            double gx, double gxp, const IsotropicKernel& base,
                            int dim, bool guarded) {
  if (gx < 0.0 || gxp < 0.0)
    throw std::invalid_argument("paciorek_correlation: length scales must be >= 0");
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("paciorek_correlation: dim must be 1 or 2");

  const double s = gx + gxp;
  if (guarded) {
    if (x == xp) return 1.0;
    if (gx == 0.0 || gxp == 0.0) return 0.0;
  } else if (s == 0.0) {
    throw std::domain_error(
        "paciorek_correlation: unguarded evaluation at gx = gx' = 0");
  }

  const double dist2 = (x - xp).squaredNorm();
  // 4 gx gx' / s^2 is exactly 1.0 in floating point when gx == gx', so the
  // assembled matrices carry an exact unit diagonal without special-casing.
  const double prefactor = std::pow(4.0 * gx * gxp / (s * s), 0.25 * dim);
  return prefactor * eval_isotropic(base, std::sqrt(2.0 * dist2 / s));
}

CorrelationMatrix build_correlation_matrix(const Eigen::MatrixXd& points,
                                           const Eigen::VectorXd& u,
                                           const LengthScaleMap& F,
                                           const IsotropicKernel& base) {
  const Eigen::Index n = points.rows();
  if (u.size() != n)
    throw std::invalid_argument("build_correlation_matrix: |u| != |points|");
  const int dim = int(points.cols());

  Eigen::VectorXd g = eval_length_scale(F, u);

  CorrelationMatrix R;
  R.points = points;
  R.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    R.entries(i, i) = 1.0;
    Eigen::Vector2d xi = Eigen::Vector2d::Zero();
    xi.head(dim) = points.row(i).transpose();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Eigen::Vector2d xj = Eigen::Vector2d::Zero();
      xj.head(dim) = points.row(j).transpose();
      if (xi == xj)
        throw std::invalid_argument(
            "build_correlation_matrix: duplicated points");
      const double rij = paciorek_correlation(xi, xj, g[i], g[j], base, dim);
      R.entries(i, j) = rij;
      R.entries(j, i) = rij;
    }
  }
  return R;
}

CorrelationMatrix build_stationary_matrix(const Eigen::MatrixXd& points,
                                          double g, const IsotropicKernel& base) {
  if (g <= 0.0)
    throw std::invalid_argument("build_stationary_matrix: g must be > 0");
  const Eigen::Index n = points.rows();
  CorrelationMatrix R;
  R.points = points;
  R.entries.resize(n, n);
  const double inv_sqrt_g = 1.0 / std::sqrt(g);
  const double diag = kernel_at_zero(base);
  for (Eigen::Index i = 0; i < n; ++i) {
    R.entries(i, i) = diag;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = (points.row(i) - points.row(j)).norm() * inv_sqrt_g;
      const double v = eval_isotropic(base, r);
      R.entries(i, j) = v;
      R.entries(j, i) = v;
    }
  }
  return R;
}

}  // namespace dgp
