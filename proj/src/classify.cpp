#include "stratos/classify.hpp"

#include <algorithm>
#include <cmath>

namespace stratos::classify {

CellClassification classify_cell(std::span<const double> productivities,
                                 double quantile) {
  const std::size_t n = productivities.size();
  if (n < 2)
    throw degenerate_data_error(
        "classify_cell: need at least 2 members, got " + std::to_string(n));
  if (!(quantile > 0.0 && quantile < 1.0))
    throw validation_error("classify_cell: quantile must be in (0,1)");

  std::vector<double> sorted(productivities.begin(), productivities.end());
  std::sort(sorted.begin(), sorted.end());

  // Nearest-rank index of the quantile, robust to qn landing on an integer
  // up to floating noise.
  const double qn = quantile * static_cast<double>(n);
  const double rounded = std::round(qn);
  std::size_t k = std::fabs(qn - rounded) < 1e-9 * static_cast<double>(n)
                      ? static_cast<std::size_t>(rounded)
                      : static_cast<std::size_t>(std::floor(qn));
  if (k < 1) k = 1;
  if (k > n) k = n;
  const double threshold = sorted[k - 1];

  CellClassification out;
  out.threshold = threshold;
  out.is_top.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool top = productivities[i] > threshold;
    out.is_top[i] = top;
    if (top) ++out.n_top;
  }
  return out;
}

DeltaMatrix delta_matrix(std::span<const CellKey> cells,
                         std::span<const metrics::DecileHistogram> histograms,
                         std::span<const bool> is_top) {
  if (cells.size() != histograms.size() || cells.size() != is_top.size())
    throw validation_error("delta_matrix: input spans must be aligned");

  struct Acc {
    std::array<double, 10> sum_top{}, sum_rest{};
    long long n_top = 0, n_rest = 0;
  };
  std::map<CellKey, Acc> acc;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    Acc& a = acc[cells[i]];
    if (is_top[i]) {
      ++a.n_top;
      for (int b = 0; b < 10; ++b) a.sum_top[b] += histograms[i].shares[b];
    } else {
      ++a.n_rest;
      for (int b = 0; b < 10; ++b) a.sum_rest[b] += histograms[i].shares[b];
    }
  }

  DeltaMatrix out;
  for (const auto& [cell, a] : acc) {
    if (a.n_top == 0 || a.n_rest == 0) {
      out.missing.push_back(cell);
      continue;
    }
    std::array<double, 10> delta{};
    for (int b = 0; b < 10; ++b)
      delta[b] = a.sum_top[b] / static_cast<double>(a.n_top) -
                 a.sum_rest[b] / static_cast<double>(a.n_rest);
    out.values.emplace(cell, delta);
  }
  return out;
}

double concentration_share(std::span<const double> weighted_prod,
                           std::span<const bool> is_top) {
  if (weighted_prod.size() != is_top.size())
    throw validation_error("concentration_share: input spans must be aligned");
  if (weighted_prod.empty())
    throw missing_data_error("concentration_share: empty cell");
  double top = 0.0, total = 0.0;
  for (std::size_t i = 0; i < weighted_prod.size(); ++i) {
    total += weighted_prod[i];
    if (is_top[i]) top += weighted_prod[i];
  }
  if (total <= 0.0)
    throw degenerate_data_error(
        "concentration_share: zero total productivity in cell");
  return top / total;
}

}  // namespace stratos::classify
