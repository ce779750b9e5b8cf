#include "stratos/prob.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stratos/core.hpp"

namespace stratos::prob {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_two_sided_p(double z) {
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

namespace {

// log of the prefactor x^a e^{-x} / Gamma(a)
double log_prefactor(double a, double x) {
  return a * std::log(x) - x - std::lgamma(a);
}

// series for P(a,x), valid (and fast) for x < a+1
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  double lp = log_prefactor(a, x) + std::log(sum);
  return lp < -745.0 ? 0.0 : std::exp(lp);
}

// Lentz continued fraction for Q(a,x), valid for x >= a+1
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  double lq = log_prefactor(a, x) + std::log(h);
  return lq < -745.0 ? 0.0 : std::exp(lq);
}

}  // namespace

double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw validation_error("gamma_p: a > 0, x >= 0 required");
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw validation_error("gamma_q: a > 0, x >= 0 required");
  if (x == 0.0) return 1.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

double chi_squared_sf(double x, double df) {
  if (df <= 0.0) throw validation_error("chi_squared_sf: df > 0 required");
  if (x <= 0.0) return 1.0;
  return gamma_q(df / 2.0, x / 2.0);
}

std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int k) {
  if (k < 1) throw validation_error("gauss_hermite: k >= 1 required");
  if (k == 1) return {{0.0}, {std::sqrt(M_PI)}};
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(k, k);
  for (int i = 1; i < k; ++i) {
    double off = std::sqrt(i / 2.0);
    jacobi(i, i - 1) = off;
    jacobi(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  std::vector<double> nodes(k), weights(k);
  const double mu0 = std::sqrt(M_PI);  // \int e^{-t^2} dt
  for (int i = 0; i < k; ++i) {
    nodes[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
  return {nodes, weights};
}

}  // namespace stratos::prob
