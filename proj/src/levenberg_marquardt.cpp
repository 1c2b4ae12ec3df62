#include "levenberg_marquardt.hpp"

#include <algorithm>
#include <cmath>

#include "uvac/error.hpp"

namespace uvac::detail {

namespace {

double relative_step(const Eigen::VectorXd& step, const Eigen::VectorXd& params) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < step.size(); ++i) {
    const double ref = std::max(std::abs(params[i]), 1e-12);
    worst = std::max(worst, std::abs(step[i]) / ref);
  }
  return worst;
}

}  // namespace

LmOutcome levenberg_marquardt(Eigen::VectorXd start, Eigen::Index residual_count,
                              const LmEvaluate& evaluate, const LmProject& project,
                              const LmOptions& options) {
  const Eigen::Index k = start.size();
  if (!project(start)) throw NonConvergence("fit: infeasible starting point");

  Eigen::VectorXd p = start;
  Eigen::VectorXd r(residual_count);
  Eigen::MatrixXd jac(residual_count, k);
  evaluate(p, r, jac);
  double chi2 = r.squaredNorm();
  if (!std::isfinite(chi2)) throw NonConvergence("fit: non-finite residuals at the start");

  double lambda = 1e-3;
  Eigen::VectorXd r_trial(residual_count);
  Eigen::MatrixXd jac_trial(residual_count, k);

  LmOutcome out;
  for (int it = 1; it <= options.max_iterations; ++it) {
    out.iterations = it;
    const Eigen::MatrixXd h = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    Eigen::VectorXd diag = h.diagonal();
    const double floor = 1e-12 * std::max(diag.maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < k; ++i) diag[i] = std::max(diag[i], floor);

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = h;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      const double rel = relative_step(step, p);
      if (!step.allFinite()) {
        lambda *= 10.0;
      } else {
        Eigen::VectorXd trial = p + step;
        if (project(trial)) {
          evaluate(trial, r_trial, jac_trial);
          const double chi2_trial = r_trial.squaredNorm();
          if (std::isfinite(chi2_trial) && chi2_trial <= chi2) {
            p = trial;
            r = r_trial;
            jac = jac_trial;
            chi2 = chi2_trial;
            lambda = std::max(lambda / 10.0, 1e-12);
            accepted = true;
          } else {
            lambda *= 10.0;
          }
        } else {
          lambda *= 10.0;
        }
      }
      // A step this small cannot move the solution: the minimum is reached.
      if (rel < options.relative_step_tol || lambda > 1e20) {
        out.params = p;
        out.chi2 = chi2;
        out.jtj = jac.transpose() * jac;
        out.converged = true;
        return out;
      }
    }
  }
  out.params = p;
  out.chi2 = chi2;
  out.jtj = jac.transpose() * jac;
  out.converged = false;
  return out;
}

}  // namespace uvac::detail
