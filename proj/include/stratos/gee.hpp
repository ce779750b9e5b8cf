// Population-averaged logit fitted by generalized estimating equations with
// a cluster-robust sandwich covariance.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stratos/core.hpp"

namespace stratos::gee {

enum class WorkingCorr { independence, exchangeable };

WorkingCorr parse_working(std::string_view s);
std::string working_name(WorkingCorr w);

struct GeeOptions {
  WorkingCorr working = WorkingCorr::independence;
  int max_iter = 100;
  double beta_tol = 1e-10;
};

struct GeeFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;     // robust (sandwich) standard errors
  Eigen::VectorXd z;
  Eigen::VectorXd p;
  Eigen::MatrixXd vcov;   // sandwich covariance, symmetric PSD
  double alpha = 0.0;     // exchangeable working correlation estimate
  double phi = 1.0;       // Pearson dispersion used in the alpha estimate
  WorkingCorr working = WorkingCorr::independence;
  bool converged = false;
  long long n_obs = 0;
  int n_clusters = 0;
  Eigen::VectorXd fitted;
};

GeeFit fit_gee(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const std::vector<int>& cluster_ids,
               const GeeOptions& options = {});

}  // namespace stratos::gee
