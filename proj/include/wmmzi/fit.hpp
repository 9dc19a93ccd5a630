#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

namespace wmmzi::detail {

using ModelFn = std::function<double(double x, const Eigen::VectorXd& params)>;

struct FitOptions {
  int max_iterations = 300;
  double chi2_tolerance = 1e-14;   // relative chi-square change
  double step_tolerance = 1e-12;   // max |step| / scale
  Eigen::VectorXd step_scale;      // per-parameter scale for numeric derivatives
};

struct FitResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // (J^T J)^-1 of weighted residuals
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) weighted least squares with a
/// central-difference Jacobian. Residuals are (y - model) / sigma.
FitResult levenberg_marquardt(const ModelFn& model, std::span<const double> x,
                              std::span<const double> y,
                              std::span<const double> sigma,
                              const Eigen::VectorXd& initial,
                              const FitOptions& options = {});

}  // namespace wmmzi::detail
