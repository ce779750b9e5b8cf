#include "stratos/glmm.hpp"

#include <algorithm>
#include <cmath>

#include "stratos/glm.hpp"
#include "stratos/kernels.hpp"
#include "stratos/par.hpp"
#include "stratos/prob.hpp"

namespace stratos::glmm {

namespace {

constexpr std::size_t kClusterChunk = 256;

double log1pexp(double e) {
  return e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
}

double sigmoid(double e) {
  return e >= 0.0 ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e) / (1.0 + std::exp(e));
}

// Row indices grouped by cluster, clusters kept in id order.
struct ClusterIndex {
  std::vector<std::vector<Eigen::Index>> rows;
  int m = 0;
};

ClusterIndex index_clusters(const std::vector<int>& ids, Eigen::Index n) {
  if (static_cast<Eigen::Index>(ids.size()) != n)
    throw validation_error("fit_glmm: cluster ids must align with rows");
  int m = 0;
  for (int id : ids) {
    if (id < 0) throw validation_error("fit_glmm: negative cluster id");
    m = std::max(m, id + 1);
  }
  ClusterIndex idx;
  idx.m = m;
  idx.rows.resize(m);
  for (Eigen::Index i = 0; i < n; ++i) idx.rows[ids[i]].push_back(i);
  for (const auto& r : idx.rows)
    if (r.empty())
      throw validation_error("fit_glmm: cluster ids must be dense 0..m-1");
  return idx;
}

// State shared by the PIRLS iterations and the objective evaluations.
struct Workspace {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  const ClusterIndex& idx;
  Eigen::VectorXd beta;
  Eigen::VectorXd u;     // cluster modes
  Eigen::VectorXd xb;    // X beta cache
  Workspace(const Eigen::MatrixXd& X_, const Eigen::VectorXd& y_,
            const ClusterIndex& idx_)
      : X(X_), y(y_), idx(idx_), beta(Eigen::VectorXd::Zero(X_.cols())),
        u(Eigen::VectorXd::Zero(idx_.m)), xb(Eigen::VectorXd::Zero(X_.rows())) {}
};

// Newton refinement of each cluster mode at fixed beta; returns the joint
// penalized log-likelihood and fills s with the conditional curvatures
// sum_j w_j per cluster. Deterministic: clusters are chunked in index order.
double refine_modes(Workspace& ws, double sigma2, Eigen::VectorXd& s) {
  const int m = ws.idx.m;
  s.resize(m);
  const double inv_s2 = 1.0 / sigma2;
  std::vector<double> partial_q(par::detail::num_chunks(m, kClusterChunk), 0.0);
  par::for_chunks(
      static_cast<std::size_t>(m),
      [&](std::size_t b, std::size_t e) {
        double q = 0.0;
        for (std::size_t i = b; i < e; ++i) {
          const auto& rows = ws.idx.rows[i];
          double ui = ws.u(static_cast<Eigen::Index>(i));
          double sw = 0.0;
          for (int it = 0; it < 100; ++it) {
            double grad = -ui * inv_s2;
            sw = 0.0;
            for (Eigen::Index r : rows) {
              const double p = sigmoid(ws.xb(r) + ui);
              grad += ws.y(r) - p;
              sw += p * (1.0 - p);
            }
            const double step = grad / (sw + inv_s2);
            ui += step;
            if (std::fabs(step) < 1e-13) break;
          }
          ws.u(static_cast<Eigen::Index>(i)) = ui;
          sw = 0.0;
          double ll = 0.0;
          for (Eigen::Index r : rows) {
            const double eta = ws.xb(r) + ui;
            ll += ws.y(r) * eta - log1pexp(eta);
            const double p = sigmoid(eta);
            sw += p * (1.0 - p);
          }
          s(static_cast<Eigen::Index>(i)) = sw;
          q += ll - 0.5 * ui * ui * inv_s2;
        }
        partial_q[b / kClusterChunk] = q;
      },
      kClusterChunk);
  double q = 0.0;
  for (double v : partial_q) q += v;
  return q;
}

// Laplace or AGQ approximation of the marginal log-likelihood, evaluated at
// the current beta with modes refined per cluster.
double objective(Workspace& ws, double sigma2, Method method, int agq_k) {
  if (sigma2 <= 0.0) {
    ws.u.setZero();
    return kernels::bernoulli_loglik(ws.xb, ws.y);
  }
  Eigen::VectorXd s;
  const double q = refine_modes(ws, sigma2, s);
  if (method == Method::laplace || agq_k == 1) {
    double logdet = par::sum(static_cast<std::size_t>(ws.idx.m), [&](std::size_t i) {
      return std::log(sigma2 * s(static_cast<Eigen::Index>(i)) + 1.0);
    }, kClusterChunk);
    return q - 0.5 * logdet;
  }

  const auto [nodes, weights] = prob::gauss_hermite(agq_k);
  const double inv_s2 = 1.0 / sigma2;
  const double half_log_2pi_s2 = 0.5 * std::log(2.0 * M_PI * sigma2);
  const int m = ws.idx.m;
  std::vector<double> partial(par::detail::num_chunks(m, kClusterChunk), 0.0);
  par::for_chunks(
      static_cast<std::size_t>(m),
      [&](std::size_t b, std::size_t e) {
        std::vector<double> terms(nodes.size());
        double acc = 0.0;
        for (std::size_t i = b; i < e; ++i) {
          const auto& rows = ws.idx.rows[i];
          const double ui = ws.u(static_cast<Eigen::Index>(i));
          const double h = s(static_cast<Eigen::Index>(i)) + inv_s2;
          const double tau = 1.0 / std::sqrt(h);
          for (std::size_t k = 0; k < nodes.size(); ++k) {
            const double uk = ui + std::sqrt(2.0) * tau * nodes[k];
            double ll = 0.0;
            for (Eigen::Index r : rows) {
              const double eta = ws.xb(r) + uk;
              ll += ws.y(r) * eta - log1pexp(eta);
            }
            terms[k] = std::log(weights[k]) + nodes[k] * nodes[k] + ll -
                       0.5 * uk * uk * inv_s2 - half_log_2pi_s2;
          }
          const double mx = *std::max_element(terms.begin(), terms.end());
          double sum = 0.0;
          for (double t : terms) sum += std::exp(t - mx);
          acc += mx + std::log(sum) + std::log(std::sqrt(2.0) * tau);
        }
        partial[b / kClusterChunk] = acc;
      },
      kClusterChunk);
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

// Penalized IRLS jointly over (beta, u) at fixed sigma2.
struct PirlsResult {
  bool converged = false;
  Eigen::MatrixXd schur;  // X'WX - sum_i c_i c_i' / (s_i + 1/sigma2)
  int iterations = 0;
};

PirlsResult pirls_fit(Workspace& ws, double sigma2, const GlmmOptions& opt,
                      const std::vector<int>& cluster_ids) {
  const Eigen::Index n = ws.X.rows();
  const Eigen::Index p = ws.X.cols();
  const int m = ws.idx.m;
  const double inv_s2 = 1.0 / sigma2;

  Eigen::VectorXd eta(n), prob(n), w(n);
  auto update_eta = [&] {
    ws.xb = ws.X * ws.beta;
    par::for_each_index(static_cast<std::size_t>(n), [&](std::size_t r) {
      const Eigen::Index j = static_cast<Eigen::Index>(r);
      eta(j) = ws.xb(j) + ws.u(cluster_ids[r]);
    });
  };
  auto penalized = [&]() {
    return kernels::bernoulli_loglik(eta, ws.y) -
           0.5 * inv_s2 * ws.u.squaredNorm();
  };

  update_eta();
  double q = penalized();

  PirlsResult res;
  for (int iter = 1; iter <= opt.max_pirls; ++iter) {
    res.iterations = iter;
    kernels::logistic_mean_weight(eta, prob, w);

    // Per-cluster accumulations, chunked deterministically.
    Eigen::VectorXd s(m), resid(m);
    Eigen::MatrixXd C(m, p);  // rows are c_i^T
    par::for_chunks(
        static_cast<std::size_t>(m),
        [&](std::size_t b, std::size_t e) {
          for (std::size_t i = b; i < e; ++i) {
            const Eigen::Index ii = static_cast<Eigen::Index>(i);
            double sw = 0.0, rr = -ws.u(ii) * inv_s2;
            Eigen::RowVectorXd ci = Eigen::RowVectorXd::Zero(p);
            for (Eigen::Index r : ws.idx.rows[i]) {
              sw += w(r);
              rr += ws.y(r) - prob(r);
              ci.noalias() += w(r) * ws.X.row(r);
            }
            s(ii) = sw;
            resid(ii) = rr;
            C.row(ii) = ci;
          }
        },
        kClusterChunk);

    const Eigen::VectorXd score_beta = kernels::xtv(ws.X, ws.y - prob);
    const double score_max =
        std::max(score_beta.cwiseAbs().maxCoeff(), resid.cwiseAbs().maxCoeff());

    // Schur system for the beta step.
    Eigen::MatrixXd A = kernels::xtwx(ws.X, w);
    Eigen::VectorXd rhs = score_beta;
    {
      const std::size_t nchunk = par::detail::num_chunks(m, kClusterChunk);
      std::vector<Eigen::MatrixXd> pa(nchunk);
      std::vector<Eigen::VectorXd> pr(nchunk);
      par::for_chunks(
          static_cast<std::size_t>(m),
          [&](std::size_t b, std::size_t e) {
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
            Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
            for (std::size_t i = b; i < e; ++i) {
              const Eigen::Index ii = static_cast<Eigen::Index>(i);
              const double denom = s(ii) + inv_s2;
              a.noalias() += (C.row(ii).transpose() * C.row(ii)) / denom;
              v.noalias() += C.row(ii).transpose() * (resid(ii) / denom);
            }
            pa[b / kClusterChunk] = std::move(a);
            pr[b / kClusterChunk] = std::move(v);
          },
          kClusterChunk);
      for (const auto& a : pa) A -= a;
      for (const auto& v : pr) rhs -= v;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const auto d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success ||
        d.minCoeff() <= 1e-12 * std::max(d.maxCoeff(), 1.0))
      throw degenerate_data_error(
          "fit_glmm: penalized information matrix is singular");
    const Eigen::VectorXd dbeta = ldlt.solve(rhs);
    Eigen::VectorXd du(m);
    par::for_each_index(static_cast<std::size_t>(m), [&](std::size_t i) {
      const Eigen::Index ii = static_cast<Eigen::Index>(i);
      du(ii) = (resid(ii) - C.row(ii).dot(dbeta)) / (s(ii) + inv_s2);
    });

    // Step halving on the penalized objective.
    const Eigen::VectorXd beta0 = ws.beta, u0 = ws.u;
    double scale = 1.0, q_new = q;
    for (int half = 0; half < 40; ++half) {
      ws.beta = beta0 + scale * dbeta;
      ws.u = u0 + scale * du;
      update_eta();
      q_new = penalized();
      if (q_new >= q - 1e-13) break;
      scale *= 0.5;
    }
    const double dq = std::fabs(q_new - q);
    q = q_new;

    if (ws.beta.cwiseAbs().maxCoeff() > opt.separation_bound)
      throw glmm_convergence_error(
          "fit_glmm: coefficients diverging; data may be separated", ws.beta,
          sigma2);

    if (score_max < opt.score_tol || dq < opt.objective_tol) {
      res.converged = true;
      res.schur = std::move(A);
      break;
    }
    if (iter == opt.max_pirls) res.schur = std::move(A);
  }
  if (!res.converged)
    throw glmm_convergence_error(
        "fit_glmm: penalized IRLS did not converge in " +
            std::to_string(opt.max_pirls) + " iterations",
        ws.beta, sigma2);
  return res;
}

}  // namespace

GlmmFit fit_glmm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const std::vector<int>& cluster_ids,
                 const GlmmOptions& options) {
  const ClusterIndex idx = index_clusters(cluster_ids, X.rows());
  if (idx.m < 2)
    throw degenerate_data_error("fit_glmm: need at least 2 clusters");
  const int agq_k = options.method == Method::agq ? options.agq_points : 1;
  if (agq_k < 1) throw validation_error("fit_glmm: agq points must be >= 1");

  Workspace ws(X, y, idx);

  // Profile objective over sigma: PIRLS for beta/u, then the approximation.
  auto evaluate = [&](double sigma) -> double {
    if (sigma <= 0.0) {
      const glm::GlmFit boundary = glm::fit_logistic(X, y);
      ws.beta = boundary.beta;
      ws.u.setZero();
      ws.xb = X * ws.beta;
      return boundary.loglik;
    }
    const double sigma2 = sigma * sigma;
    pirls_fit(ws, sigma2, options, cluster_ids);
    return objective(ws, sigma2, options.method, agq_k);
  };

  // Coarse scan: sigma = 0 plus a log-spaced grid.
  std::vector<double> grid{0.0};
  const double lo_sigma = 1e-3;
  for (int i = 0; i < options.grid_points; ++i) {
    const double t = static_cast<double>(i) / (options.grid_points - 1);
    grid.push_back(lo_sigma *
                   std::pow(options.sigma_max / lo_sigma, t));
  }
  std::vector<double> value(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    value[i] = evaluate(grid[i]);
    if (value[i] > value[best]) best = i;
  }

  // Golden-section refinement inside the bracketing interval.
  double lo = best > 0 ? grid[best - 1] : 0.0;
  double hi = best + 1 < grid.size() ? grid[best + 1] : grid.back();
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = evaluate(x1), f2 = evaluate(x2);
  double best_sigma = grid[best], best_value = value[best];
  auto consider = [&](double s, double f) {
    if (f > best_value) {
      best_value = f;
      best_sigma = s;
    }
  };
  consider(x1, f1);
  consider(x2, f2);
  int outer_iters = 0;
  while (b - a > options.outer_tol && ++outer_iters < 200) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = evaluate(x2);
      consider(x2, f2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = evaluate(x1);
      consider(x1, f1);
    }
  }

  // The zero boundary wins whenever the interior refinement cannot beat it.
  bool boundary = best_sigma * best_sigma <= options.boundary_sigma2 ||
                  value[0] >= best_value - 1e-12;
  const double sigma2_hat = boundary ? 0.0 : best_sigma * best_sigma;

  GlmmFit fit;
  fit.n_obs = X.rows();
  fit.n_clusters = idx.m;
  fit.sigma2 = sigma2_hat;
  fit.boundary = boundary;

  const Eigen::Index p = X.cols();
  Eigen::MatrixXd cov;
  if (boundary) {
    const glm::GlmFit base = glm::fit_logistic(X, y);
    fit.beta = base.beta;
    fit.se = base.se;
    fit.z = base.z;
    fit.p = base.p;
    fit.loglik = base.loglik;
    fit.fitted = base.fitted;
    fit.cluster_modes = Eigen::VectorXd::Zero(idx.m);
    fit.converged = true;
  } else {
    const PirlsResult final_fit = pirls_fit(ws, sigma2_hat, options, cluster_ids);
    fit.loglik = objective(ws, sigma2_hat, options.method, agq_k);
    fit.beta = ws.beta;
    fit.cluster_modes = ws.u;
    cov = Eigen::LDLT<Eigen::MatrixXd>(final_fit.schur)
              .solve(Eigen::MatrixXd::Identity(p, p));
    fit.se = cov.diagonal().cwiseSqrt();
    fit.z.resize(p);
    fit.p.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      fit.z(j) = fit.beta(j) / fit.se(j);
      fit.p(j) = prob::normal_two_sided_p(fit.z(j));
    }
    fit.fitted.resize(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r)
      fit.fitted(r) = sigmoid(ws.xb(r) + ws.u(cluster_ids[r]));
    fit.converged = final_fit.converged;
  }
  const double k_params = static_cast<double>(p) + 1.0;  // + variance
  fit.aic = -2.0 * fit.loglik + 2.0 * k_params;
  fit.bic = -2.0 * fit.loglik + k_params * std::log(static_cast<double>(fit.n_obs));
  return fit;
}

double marginal_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const std::vector<int>& cluster_ids,
                       const Eigen::VectorXd& beta, double sigma2,
                       Method method, int agq_points) {
  const ClusterIndex idx = index_clusters(cluster_ids, X.rows());
  Workspace ws(X, y, idx);
  ws.beta = beta;
  ws.xb = X * beta;
  return objective(ws, sigma2, method, method == Method::agq ? agq_points : 1);
}

}  // namespace stratos::glmm
