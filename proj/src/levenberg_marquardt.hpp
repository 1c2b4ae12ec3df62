#pragma once

#include <Eigen/Dense>

#include <functional>

namespace uvac::detail {

struct LmOptions {
  int max_iterations = 200;
  double relative_step_tol = 1e-8;
};

struct LmOutcome {
  Eigen::VectorXd params;
  double chi2 = 0.0;
  Eigen::MatrixXd jtj;  // J^T J at the returned parameters
  int iterations = 0;
  bool converged = false;
};

// Fills weighted residuals r = (y - model) / sigma and their Jacobian with
// respect to the parameters.
using LmEvaluate = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>;
// Maps a trial point into the feasible set in place; false rejects the step.
using LmProject = std::function<bool(Eigen::VectorXd&)>;

// Damped Gauss-Newton with Marquardt diagonal scaling. Stops when a step is
// smaller than relative_step_tol relative to every parameter.
LmOutcome levenberg_marquardt(Eigen::VectorXd start, Eigen::Index residual_count,
                              const LmEvaluate& evaluate, const LmProject& project,
                              const LmOptions& options);

}  // namespace uvac::detail
