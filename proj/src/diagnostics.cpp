#include "stratos/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stratos/prob.hpp"

namespace stratos::diagnostics {

namespace {

// log|det| via LU; throws if effectively singular.
double log_abs_det(const Eigen::MatrixXd& M, const std::string& what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const auto& U = lu.matrixLU();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    const double d = std::fabs(U(i, i));
    if (d < 1e-300)
      throw degenerate_data_error("gvif: singular correlation matrix (" +
                                  what + ")");
    logdet += std::log(d);
  }
  return logdet;
}

}  // namespace

std::vector<GvifRow> gvif(
    const Eigen::MatrixXd& X,
    const std::vector<std::pair<std::string, std::vector<int>>>& term_groups) {
  // Columns taking part: everything referenced by the groups (the intercept
  // is not a term). Build their correlation matrix.
  std::vector<int> cols;
  for (const auto& [name, idx] : term_groups)
    cols.insert(cols.end(), idx.begin(), idx.end());
  const int q = static_cast<int>(cols.size());
  if (q < 1) throw validation_error("gvif: no terms");

  Eigen::MatrixXd Z(X.rows(), q);
  for (int j = 0; j < q; ++j) {
    Eigen::VectorXd c = X.col(cols[j]);
    const double mean = c.mean();
    c.array() -= mean;
    const double norm = c.norm();
    if (norm < 1e-12)
      throw degenerate_data_error("gvif: constant column " +
                                  std::to_string(cols[j]));
    Z.col(j) = c / norm;
  }
  const Eigen::MatrixXd R = Z.transpose() * Z;
  const double logdet_R = log_abs_det(R, "all terms");

  // column position within R per design column index
  std::vector<int> pos(X.cols(), -1);
  for (int j = 0; j < q; ++j) pos[cols[j]] = j;

  std::vector<GvifRow> out;
  out.reserve(term_groups.size());
  for (const auto& [name, idx] : term_groups) {
    std::vector<int> J, K;
    for (int c : idx) J.push_back(pos[c]);
    std::sort(J.begin(), J.end());
    for (int j = 0; j < q; ++j)
      if (!std::binary_search(J.begin(), J.end(), j)) K.push_back(j);

    GvifRow row;
    row.term = name;
    row.df = static_cast<int>(J.size());
    if (K.empty()) {
      row.gvif = 1.0;  // a single term spanning everything
    } else {
      Eigen::MatrixXd RJ(J.size(), J.size()), RK(K.size(), K.size());
      for (std::size_t a = 0; a < J.size(); ++a)
        for (std::size_t b = 0; b < J.size(); ++b) RJ(a, b) = R(J[a], J[b]);
      for (std::size_t a = 0; a < K.size(); ++a)
        for (std::size_t b = 0; b < K.size(); ++b) RK(a, b) = R(K[a], K[b]);
      row.gvif = std::exp(log_abs_det(RJ, row.term) +
                          log_abs_det(RK, "complement of " + row.term) -
                          logdet_R);
    }
    row.gvif_adjusted = std::pow(row.gvif, 1.0 / (2.0 * row.df));
    out.push_back(std::move(row));
  }
  return out;
}

OverdispersionResult overdispersion(const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& fitted,
                                    int n_params) {
  if (y.size() != fitted.size())
    throw validation_error("overdispersion: y and fitted sizes differ");
  OverdispersionResult out;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double v = fitted(i) * (1.0 - fitted(i));
    if (v <= 0.0) continue;  // saturated point, zero residual
    const double r = (y(i) - fitted(i)) / std::sqrt(v);
    out.chi2 += r * r;
  }
  out.df_resid = static_cast<long long>(y.size()) - n_params;
  if (out.df_resid <= 0)
    throw degenerate_data_error("overdispersion: no residual degrees of freedom");
  out.ratio = out.chi2 / static_cast<double>(out.df_resid);
  out.p = prob::chi_squared_sf(out.chi2, static_cast<double>(out.df_resid));
  return out;
}

namespace {

// type-7 quantile on already sorted data
double quantile_sorted(const std::vector<double>& s, double q) {
  const double h = q * static_cast<double>(s.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= s.size()) return s.back();
  return s[lo] + (h - std::floor(h)) * (s[lo + 1] - s[lo]);
}

}  // namespace

ResidualSummary pearson_residual_summary(const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& fitted) {
  if (y.size() != fitted.size())
    throw validation_error("pearson_residual_summary: sizes differ");
  if (y.size() == 0)
    throw missing_data_error("pearson_residual_summary: no observations");
  std::vector<double> r(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double v = fitted(i) * (1.0 - fitted(i));
    r[static_cast<std::size_t>(i)] =
        v > 0.0 ? (y(i) - fitted(i)) / std::sqrt(v) : 0.0;
  }
  std::sort(r.begin(), r.end());
  ResidualSummary s;
  s.min = r.front();
  s.max = r.back();
  s.q25 = quantile_sorted(r, 0.25);
  s.median = quantile_sorted(r, 0.50);
  s.q75 = quantile_sorted(r, 0.75);
  const double n = static_cast<double>(r.size());
  s.mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : r) ss += (v - s.mean) * (v - s.mean);
  s.sd = r.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return s;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw validation_error("auc: scores and labels sizes differ");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw validation_error("auc: labels must be 0/1");
    n_pos += static_cast<std::size_t>(l);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw degenerate_data_error("auc: both classes must be present");

  // midranks of the scores, then the rank-sum form of the U statistic
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                                       (static_cast<double>(n_pos) + 1.0);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double icc(double sigma2) {
  if (sigma2 < 0.0) throw validation_error("icc: sigma2 must be >= 0");
  const double resid = M_PI * M_PI / 3.0;
  return sigma2 / (sigma2 + resid);
}

R2Nakagawa r2_nakagawa(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                       double sigma2) {
  if (X.cols() != beta.size())
    throw validation_error("r2_nakagawa: dimension mismatch");
  if (X.rows() < 2)
    throw degenerate_data_error("r2_nakagawa: need at least 2 observations");
  const Eigen::VectorXd eta = X * beta;
  const double mean = eta.mean();
  const double var_fixed =
      (eta.array() - mean).square().sum() / (static_cast<double>(eta.size()) - 1.0);
  const double resid = M_PI * M_PI / 3.0;
  const double denom = var_fixed + sigma2 + resid;
  return {var_fixed / denom, (var_fixed + sigma2) / denom};
}

}  // namespace stratos::diagnostics
