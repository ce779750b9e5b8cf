// Probability helpers used by the test statistics and model fits.
#pragma once

#include <utility>
#include <vector>

namespace stratos::prob {

double normal_cdf(double z);
double normal_sf(double z);

/// Two-sided p-value for a standard-normal statistic.
double normal_two_sided_p(double z);

/// Regularized lower/upper incomplete gamma P(a,x), Q(a,x), a > 0, x >= 0.
/// Series expansion below a+1, Lentz continued fraction above; both evaluated
/// in log space so very large shape parameters stay finite.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Upper tail of the chi-squared distribution with df degrees of freedom.
double chi_squared_sf(double x, double df);

/// Gauss-Hermite nodes and weights for \int e^{-t^2} f(t) dt, via the
/// Golub-Welsch eigendecomposition of the Jacobi matrix. Nodes ascending.
std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int k);

}  // namespace stratos::prob
