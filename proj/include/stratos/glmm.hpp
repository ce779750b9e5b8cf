// Logistic mixed model with a scalar random intercept per cluster.
//
// Inner step: penalized IRLS jointly over the fixed effects and the cluster
// modes. Outer step: one-dimensional search over the random-intercept
// standard deviation, maximizing the Laplace (default) or adaptive
// Gauss-Hermite approximation of the marginal likelihood. agq(1) coincides
// with the Laplace approximation.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stratos/core.hpp"

namespace stratos::glmm {

enum class Method { laplace, agq };

struct GlmmOptions {
  Method method = Method::laplace;
  int agq_points = 1;          // used when method == agq
  double sigma_max = 4.0;      // outer search upper bound on sigma
  int grid_points = 24;        // coarse log-spaced scan before refinement
  double outer_tol = 1e-7;     // bracket width on sigma at termination
  int max_pirls = 200;
  double score_tol = 1e-8;
  double objective_tol = 1e-10;
  double separation_bound = 30.0;
  double boundary_sigma2 = 1e-8;  // below this the fit is reported as sigma2=0
};

struct GlmmFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd z;
  Eigen::VectorXd p;
  double sigma2 = 0.0;           // random-intercept variance
  bool boundary = false;         // sigma2 hit the zero boundary (not an error)
  double loglik = 0.0;           // approximated marginal log-likelihood
  double aic = 0.0, bic = 0.0;   // count fixed effects + 1 variance parameter
  bool converged = false;
  long long n_obs = 0;
  int n_clusters = 0;
  Eigen::VectorXd cluster_modes;
  Eigen::VectorXd fitted;        // conditional probabilities at the modes
};

/// Thrown when the inner or outer iteration gives up; carries the last
/// iterate for inspection.
struct glmm_convergence_error : convergence_error {
  glmm_convergence_error(const std::string& msg, Eigen::VectorXd beta,
                         double sigma2)
      : convergence_error(msg), last_beta(std::move(beta)), last_sigma2(sigma2) {}
  Eigen::VectorXd last_beta;
  double last_sigma2;
};

GlmmFit fit_glmm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const std::vector<int>& cluster_ids,
                 const GlmmOptions& options = {});

/// Approximate marginal log-likelihood at fixed parameters (cluster modes
/// found internally). Exposed so the quadrature refinement can be used as an
/// oracle against a fitted model.
double marginal_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const std::vector<int>& cluster_ids,
                       const Eigen::VectorXd& beta, double sigma2,
                       Method method, int agq_points = 1);

}  // namespace stratos::glmm
