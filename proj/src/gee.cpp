#include "stratos/gee.hpp"

#include <algorithm>
#include <cmath>

#include "stratos/glm.hpp"
#include "stratos/kernels.hpp"
#include "stratos/par.hpp"
#include "stratos/prob.hpp"

namespace stratos::gee {

namespace {

constexpr std::size_t kClusterChunk = 256;

std::vector<std::vector<Eigen::Index>> group_clusters(
    const std::vector<int>& ids, Eigen::Index n) {
  if (static_cast<Eigen::Index>(ids.size()) != n)
    throw validation_error("fit_gee: cluster ids must align with rows");
  int m = 0;
  for (int id : ids) {
    if (id < 0) throw validation_error("fit_gee: negative cluster id");
    m = std::max(m, id + 1);
  }
  std::vector<std::vector<Eigen::Index>> rows(m);
  for (Eigen::Index i = 0; i < n; ++i) rows[ids[i]].push_back(i);
  for (const auto& r : rows)
    if (r.empty())
      throw validation_error("fit_gee: cluster ids must be dense 0..m-1");
  return rows;
}

struct Accum {
  Eigen::MatrixXd bread;
  Eigen::MatrixXd meat;
};

// Bread, meat and per-cluster scores for a given beta/alpha.
Accum accumulate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const std::vector<std::vector<Eigen::Index>>& clusters,
                 const Eigen::VectorXd& prob, const Eigen::VectorXd& w,
                 double alpha, Eigen::VectorXd* score_out) {
  const Eigen::Index p = X.cols();
  const std::size_t m = clusters.size();
  const std::size_t nchunk = par::detail::num_chunks(m, kClusterChunk);
  std::vector<Eigen::MatrixXd> pb(nchunk), pm(nchunk);
  std::vector<Eigen::VectorXd> ps(nchunk);
  par::for_chunks(
      m,
      [&](std::size_t b, std::size_t e) {
        Eigen::MatrixXd bread = Eigen::MatrixXd::Zero(p, p);
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
        Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
        Eigen::MatrixXd v;   // sqrt(w_j) x_j rows for one cluster
        Eigen::VectorXd z;   // standardized residuals
        for (std::size_t i = b; i < e; ++i) {
          const auto& rows = clusters[i];
          const Eigen::Index ni = static_cast<Eigen::Index>(rows.size());
          v.resize(ni, p);
          z.resize(ni);
          for (Eigen::Index j = 0; j < ni; ++j) {
            const Eigen::Index r = rows[j];
            const double sw = std::sqrt(w(r));
            v.row(j) = sw * X.row(r);
            z(j) = (y(r) - prob(r)) / sw;
          }
          // exchangeable R^{-1} = [I - a/(1+(n-1)a) J] / (1-a)
          const double shrink =
              alpha / (1.0 + (static_cast<double>(ni) - 1.0) * alpha);
          const Eigen::RowVectorXd vsum = v.colwise().sum();
          const double zsum = z.sum();
          Eigen::MatrixXd bi =
              (v.transpose() * v - shrink * (vsum.transpose() * vsum)) /
              (1.0 - alpha);
          Eigen::VectorXd gi =
              (v.transpose() * z - shrink * vsum.transpose() * zsum) /
              (1.0 - alpha);
          bread += bi;
          meat.noalias() += gi * gi.transpose();
          score += gi;
        }
        pb[b / kClusterChunk] = std::move(bread);
        pm[b / kClusterChunk] = std::move(meat);
        ps[b / kClusterChunk] = std::move(score);
      },
      kClusterChunk);
  Accum out{Eigen::MatrixXd::Zero(p, p), Eigen::MatrixXd::Zero(p, p)};
  Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
  for (std::size_t c = 0; c < nchunk; ++c) {
    out.bread += pb[c];
    out.meat += pm[c];
    score += ps[c];
  }
  if (score_out) *score_out = std::move(score);
  return out;
}

// Moment estimates of the Pearson dispersion and the exchangeable
// correlation from current residuals.
std::pair<double, double> estimate_alpha(
    const Eigen::VectorXd& y, const Eigen::VectorXd& prob,
    const Eigen::VectorXd& w,
    const std::vector<std::vector<Eigen::Index>>& clusters, Eigen::Index p) {
  const Eigen::Index n = y.size();
  double press = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double e = (y(r) - prob(r)) / std::sqrt(w(r));
    press += e * e;
  }
  const double phi = press / (static_cast<double>(n) - static_cast<double>(p));

  double cross = 0.0;
  long long pairs = 0;
  long long max_ni = 1;
  for (const auto& rows : clusters) {
    const std::size_t ni = rows.size();
    max_ni = std::max<long long>(max_ni, static_cast<long long>(ni));
    if (ni < 2) continue;
    double sum = 0.0, sumsq = 0.0;
    for (Eigen::Index r : rows) {
      const double e = (y(r) - prob(r)) / std::sqrt(w(r));
      sum += e;
      sumsq += e * e;
    }
    cross += 0.5 * (sum * sum - sumsq);
    pairs += static_cast<long long>(ni) * (static_cast<long long>(ni) - 1) / 2;
  }
  double alpha = 0.0;
  if (pairs > 0) {
    const double denom =
        phi * (static_cast<double>(pairs) - static_cast<double>(p));
    if (denom > 0.0) alpha = cross / denom;
  }
  // keep R exchangeable positive definite for the largest cluster
  const double lower = max_ni > 1
                           ? -0.99 / (static_cast<double>(max_ni) - 1.0)
                           : 0.0;
  alpha = std::clamp(alpha, lower, 0.99);
  return {phi, alpha};
}

}  // namespace

WorkingCorr parse_working(std::string_view s) {
  if (s == "independence") return WorkingCorr::independence;
  if (s == "exchangeable") return WorkingCorr::exchangeable;
  throw input_error("unknown working correlation '" + std::string(s) +
                    "', expected independence or exchangeable");
}

std::string working_name(WorkingCorr w) {
  return w == WorkingCorr::independence ? "independence" : "exchangeable";
}

GeeFit fit_gee(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const std::vector<int>& cluster_ids, const GeeOptions& options) {
  const auto clusters = group_clusters(cluster_ids, X.rows());
  const Eigen::Index p = X.cols();

  GeeFit fit;
  fit.working = options.working;
  fit.n_obs = X.rows();
  fit.n_clusters = static_cast<int>(clusters.size());

  Eigen::VectorXd beta;
  Eigen::VectorXd prob, w;
  if (options.working == WorkingCorr::independence) {
    // With an identity working correlation the estimating equations are the
    // ML score equations, so the point estimates come straight from IRLS.
    const glm::GlmFit base = glm::fit_logistic(X, y);
    beta = base.beta;
    kernels::logistic_mean_weight(X * beta, prob, w);
    auto [phi, alpha] = estimate_alpha(y, prob, w, clusters, p);
    fit.phi = phi;
    fit.alpha = 0.0;
    fit.converged = true;
  } else {
    beta = glm::fit_logistic(X, y).beta;  // warm start
    double alpha = 0.0;
    for (int iter = 1; iter <= options.max_iter; ++iter) {
      kernels::logistic_mean_weight(X * beta, prob, w);
      auto [phi, a] = estimate_alpha(y, prob, w, clusters, p);
      fit.phi = phi;
      alpha = a;
      Eigen::VectorXd score;
      const Accum acc = accumulate(X, y, clusters, prob, w, alpha, &score);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(acc.bread);
      const auto d = ldlt.vectorD();
      if (ldlt.info() != Eigen::Success ||
          d.minCoeff() <= 1e-12 * std::max(d.maxCoeff(), 1.0))
        throw degenerate_data_error("fit_gee: working information singular");
      const Eigen::VectorXd step = ldlt.solve(score);
      beta += step;
      if (step.cwiseAbs().maxCoeff() < options.beta_tol) {
        fit.converged = true;
        break;
      }
      if (iter == options.max_iter)
        throw convergence_error("fit_gee: no convergence after " +
                                std::to_string(options.max_iter) +
                                " iterations");
    }
    fit.alpha = alpha;
    kernels::logistic_mean_weight(X * beta, prob, w);
  }

  const Accum acc =
      accumulate(X, y, clusters, prob, w, fit.alpha, nullptr);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(acc.bread);
  const Eigen::MatrixXd binv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd vcov = binv * acc.meat * binv;
  vcov = 0.5 * (vcov + vcov.transpose());  // enforce exact symmetry

  fit.beta = beta;
  fit.vcov = vcov;
  fit.se = vcov.diagonal().cwiseSqrt();
  fit.z.resize(p);
  fit.p.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.z(j) = fit.beta(j) / fit.se(j);
    fit.p(j) = prob::normal_two_sided_p(fit.z(j));
  }
  fit.fitted = prob;
  return fit;
}

}  // namespace stratos::gee
