#include "stratos/glm.hpp"

#include <cmath>

#include "stratos/core.hpp"
#include "stratos/kernels.hpp"
#include "stratos/prob.hpp"

namespace stratos::glm {

namespace {

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size())
    throw validation_error("fit_logistic: X and y sizes differ");
  if (X.rows() == 0) throw missing_data_error("fit_logistic: no observations");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 0.0 && y(i) != 1.0)
      throw validation_error("fit_logistic: response must be 0/1");
}

Eigen::LDLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& H) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  const auto d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success ||
      d.minCoeff() <= 1e-12 * std::max(d.maxCoeff(), 1.0))
    throw degenerate_data_error(
        "fit_logistic: information matrix is singular (rank-deficient design)");
  return ldlt;
}

}  // namespace

GlmFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const GlmOptions& options) {
  check_inputs(X, y);
  const Eigen::Index p = X.cols();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(y.size());
  Eigen::VectorXd prob, w;
  kernels::logistic_mean_weight(eta, prob, w);
  double loglik = kernels::bernoulli_loglik(eta, y);

  GlmFit fit;
  fit.n_obs = y.size();
  Eigen::MatrixXd info;

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    fit.iterations = iter;
    const Eigen::VectorXd score = kernels::xtv(X, y - prob);
    info = kernels::xtwx(X, w);
    const auto ldlt = factor_or_throw(info);
    const Eigen::VectorXd step = ldlt.solve(score);

    // Newton with step halving against a decreasing log-likelihood.
    double scale = 1.0;
    Eigen::VectorXd beta_new, eta_new;
    double ll_new = loglik;
    for (int half = 0; half < 40; ++half) {
      beta_new = beta + scale * step;
      eta_new = X * beta_new;
      ll_new = kernels::bernoulli_loglik(eta_new, y);
      if (ll_new >= loglik - 1e-13) break;
      scale *= 0.5;
    }
    const double dev_change = std::fabs(-2.0 * ll_new - (-2.0 * loglik));
    beta = beta_new;
    eta = eta_new;
    loglik = ll_new;
    kernels::logistic_mean_weight(eta, prob, w);

    if (beta.cwiseAbs().maxCoeff() > options.separation_bound)
      throw convergence_error(
          "fit_logistic: coefficients diverging (|beta| > " +
          std::to_string(options.separation_bound) +
          "); data is perfectly separated");

    const double score_max = kernels::xtv(X, y - prob).cwiseAbs().maxCoeff();
    if (score_max < options.score_tol || dev_change < options.deviance_tol) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged)
    throw convergence_error("fit_logistic: no convergence after " +
                            std::to_string(options.max_iter) + " iterations");

  info = kernels::xtwx(X, w);
  const Eigen::MatrixXd cov = factor_or_throw(info).solve(
      Eigen::MatrixXd::Identity(p, p));
  fit.beta = beta;
  fit.se = cov.diagonal().cwiseSqrt();
  fit.z.resize(p);
  fit.p.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.z(j) = fit.beta(j) / fit.se(j);
    fit.p(j) = prob::normal_two_sided_p(fit.z(j));
  }
  fit.fitted = prob;
  fit.loglik = loglik;
  fit.deviance = -2.0 * loglik;
  return fit;
}

}  // namespace stratos::glm
