#include "stratos/kernels.hpp"

#include <cmath>
#include <vector>

#include "stratos/par.hpp"

namespace stratos::kernels {

namespace {
constexpr std::size_t kRowChunk = 4096;
}

Eigen::MatrixXd xtwx(const Eigen::MatrixXd& X, const Eigen::VectorXd& w) {
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const Eigen::Index p = X.cols();
  const std::size_t m = par::detail::num_chunks(n, kRowChunk);
  std::vector<Eigen::MatrixXd> partial(m);
  par::for_chunks(
      n,
      [&](std::size_t b, std::size_t e) {
        const Eigen::Index rows = static_cast<Eigen::Index>(e - b);
        const auto Xb = X.middleRows(static_cast<Eigen::Index>(b), rows);
        const auto wb = w.segment(static_cast<Eigen::Index>(b), rows);
        partial[b / kRowChunk].noalias() =
            Xb.transpose() * wb.asDiagonal() * Xb;
      },
      kRowChunk);
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(p, p);
  for (const auto& part : partial) total += part;
  return total;
}

Eigen::VectorXd xtv(const Eigen::MatrixXd& X, const Eigen::VectorXd& v) {
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const Eigen::Index p = X.cols();
  const std::size_t m = par::detail::num_chunks(n, kRowChunk);
  std::vector<Eigen::VectorXd> partial(m);
  par::for_chunks(
      n,
      [&](std::size_t b, std::size_t e) {
        const Eigen::Index rows = static_cast<Eigen::Index>(e - b);
        partial[b / kRowChunk].noalias() =
            X.middleRows(static_cast<Eigen::Index>(b), rows).transpose() *
            v.segment(static_cast<Eigen::Index>(b), rows);
      },
      kRowChunk);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(p);
  for (const auto& part : partial) total += part;
  return total;
}

double bernoulli_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  return par::sum(static_cast<std::size_t>(eta.size()), [&](std::size_t i) {
    const double e = eta(static_cast<Eigen::Index>(i));
    const double yi = y(static_cast<Eigen::Index>(i));
    // log(1 + exp(e)) without overflow
    const double log1pe = e > 0.0 ? e + std::log1p(std::exp(-e))
                                  : std::log1p(std::exp(e));
    return yi * e - log1pe;
  });
}

void logistic_mean_weight(const Eigen::VectorXd& eta, Eigen::VectorXd& p,
                          Eigen::VectorXd& w) {
  p.resize(eta.size());
  w.resize(eta.size());
  par::for_each_index(static_cast<std::size_t>(eta.size()), [&](std::size_t i) {
    const Eigen::Index j = static_cast<Eigen::Index>(i);
    const double e = eta(j);
    const double pi = e >= 0.0 ? 1.0 / (1.0 + std::exp(-e))
                               : std::exp(e) / (1.0 + std::exp(e));
    p(j) = pi;
    w(j) = pi * (1.0 - pi);
  });
}

}  // namespace stratos::kernels
