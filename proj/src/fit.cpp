#include "wmmzi/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace wmmzi::detail {

namespace {

double chi_square(const ModelFn& model, std::span<const double> x,
                  std::span<const double> y, std::span<const double> sigma,
                  const Eigen::VectorXd& params) {
  double chi2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (y[i] - model(x[i], params)) / sigma[i];
    chi2 += r * r;
  }
  return chi2;
}

void residuals_and_jacobian(const ModelFn& model, std::span<const double> x,
                            std::span<const double> y,
                            std::span<const double> sigma,
                            const Eigen::VectorXd& params,
                            const Eigen::VectorXd& scale, Eigen::VectorXd& r,
                            Eigen::MatrixXd& jac) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index m = params.size();
  r.resize(n);
  jac.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i) = (y[i] - model(x[i], params)) / sigma[i];
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const double h = 1e-6 * std::max(std::abs(params(j)), scale(j));
    Eigen::VectorXd plus = params;
    Eigen::VectorXd minus = params;
    plus(j) += h;
    minus(j) -= h;
    for (Eigen::Index i = 0; i < n; ++i) {
      jac(i, j) = (model(x[i], plus) - model(x[i], minus)) / (2.0 * h * sigma[i]);
    }
  }
}

}  // namespace

FitResult levenberg_marquardt(const ModelFn& model, std::span<const double> x,
                              std::span<const double> y,
                              std::span<const double> sigma,
                              const Eigen::VectorXd& initial,
                              const FitOptions& options) {
  const Eigen::Index m = initial.size();
  if (static_cast<Eigen::Index>(x.size()) < m) {
    throw std::invalid_argument(
        "levenberg_marquardt: fewer points than parameters");
  }
  if (x.size() != y.size() || x.size() != sigma.size()) {
    throw std::invalid_argument("levenberg_marquardt: size mismatch");
  }
  Eigen::VectorXd scale = options.step_scale;
  if (scale.size() != m) {
    scale = Eigen::VectorXd::Ones(m);
  }

  FitResult result;
  result.params = initial;
  result.chi2 = chi_square(model, x, y, sigma, initial);

  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  double lambda = 1e-3;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    residuals_and_jacobian(model, x, y, sigma, result.params, scale, r, jac);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;

    bool stepped = false;
    while (lambda < 1e14) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index j = 0; j < m; ++j) {
        damped(j, j) += lambda * std::max(jtj(j, j), 1e-30);
      }
      const Eigen::VectorXd step = damped.ldlt().solve(jtr);
      const Eigen::VectorXd trial = result.params + step;
      const double trial_chi2 = chi_square(model, x, y, sigma, trial);
      if (trial_chi2 <= result.chi2) {
        const double drop = result.chi2 - trial_chi2;
        double max_step = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
          max_step = std::max(
              max_step, std::abs(step(j)) /
                            std::max(std::abs(result.params(j)), scale(j)));
        }
        result.params = trial;
        result.chi2 = trial_chi2;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (drop <= options.chi2_tolerance * std::max(result.chi2, 1e-300) ||
            max_step <= options.step_tolerance) {
          result.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // No descent direction left; accept the current point as converged
      // when the damping has bottomed out on a flat chi-square.
      result.converged = true;
    }
    if (result.converged) break;
  }

  residuals_and_jacobian(model, x, y, sigma, result.params, scale, r, jac);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  result.covariance = jtj.completeOrthogonalDecomposition().pseudoInverse();
  return result;
}

}  // namespace wmmzi::detail
