// Model-quality battery: collinearity, dispersion, residuals, discrimination
// and latent-scale variance decomposition.
#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "stratos/core.hpp"

namespace stratos::diagnostics {

struct GvifRow {
  std::string term;
  double gvif = 1.0;
  int df = 1;
  double gvif_adjusted = 1.0;  // gvif^(1/(2 df))
};

/// Generalized variance inflation factors over the correlation matrix of the
/// non-intercept design columns: det(R_JJ) det(R_KK) / det(R) per term.
std::vector<GvifRow> gvif(
    const Eigen::MatrixXd& X,
    const std::vector<std::pair<std::string, std::vector<int>>>& term_groups);

struct OverdispersionResult {
  double chi2 = 0.0;
  long long df_resid = 0;
  double ratio = 0.0;
  double p = 1.0;  // upper tail: small only under OVERdispersion
};

/// Pearson chi-square against residual degrees of freedom;
/// n_params counts fixed effects plus variance components.
OverdispersionResult overdispersion(const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& fitted,
                                    int n_params);

struct ResidualSummary {
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0, mean = 0, sd = 0;
};

ResidualSummary pearson_residual_summary(const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& fitted);

/// Rank-based (concordance) AUC with half credit for ties.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Latent-scale intraclass correlation sigma2 / (sigma2 + pi^2/3).
double icc(double sigma2);

struct R2Nakagawa {
  double marginal = 0.0;
  double conditional = 0.0;
};

/// Latent-scale variance decomposition: var(X beta) against the random
/// intercept variance and the logistic residual pi^2/3.
R2Nakagawa r2_nakagawa(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                       double sigma2);

}  // namespace stratos::diagnostics
