// Blocked OpenMP linear-algebra kernels shared by the model fits. Each kernel
// partitions rows into fixed chunks and combines per-chunk partials in chunk
// order, so results do not depend on the thread count.
#pragma once

#include <Eigen/Dense>

namespace stratos::kernels {

/// X^T diag(w) X
Eigen::MatrixXd xtwx(const Eigen::MatrixXd& X, const Eigen::VectorXd& w);

/// X^T v
Eigen::VectorXd xtv(const Eigen::MatrixXd& X, const Eigen::VectorXd& v);

/// Bernoulli log-likelihood sum_i [y_i eta_i - log(1 + exp(eta_i))],
/// evaluated stably for large |eta|.
double bernoulli_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y);

/// In-place logistic mean and IRLS weight: p = sigmoid(eta), w = p(1-p).
void logistic_mean_weight(const Eigen::VectorXd& eta, Eigen::VectorXd& p,
                          Eigen::VectorXd& w);

}  // namespace stratos::kernels
