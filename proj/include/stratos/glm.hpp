// Maximum-likelihood logistic regression via iteratively reweighted least
// squares. Serves both as the plain GLM and as the inner solver / boundary
// case of the mixed model.
#pragma once

#include <Eigen/Dense>

namespace stratos::glm {

struct GlmOptions {
  int max_iter = 100;
  double score_tol = 1e-8;       // max |score| at convergence
  double deviance_tol = 1e-10;   // or deviance change below this
  double separation_bound = 30;  // |beta_j| beyond this flags separation
};

struct GlmFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd z;
  Eigen::VectorXd p;
  Eigen::VectorXd fitted;  // probabilities, strictly inside (0,1)
  double loglik = 0.0;
  double deviance = 0.0;
  int iterations = 0;
  bool converged = false;
  long long n_obs = 0;
};

GlmFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const GlmOptions& options = {});

}  // namespace stratos::glm
