#include "stratos/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "stratos/prob.hpp"

namespace stratos::stats {

namespace {

// Midranks of the pooled sample (1-based, ties get the average rank) and the
// tie correction term sum(t^3 - t) over tie groups.
struct PooledRanks {
  std::vector<double> rank;  // aligned with the pooled value order passed in
  double tie_term = 0.0;
};

PooledRanks midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  PooledRanks out;
  out.rank.assign(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    const double t = static_cast<double>(j - i + 1);
    out.tie_term += t * t * t - t;
    for (std::size_t k = i; k <= j; ++k) out.rank[order[k]] = avg;
    i = j + 1;
  }
  return out;
}

// U from the rank sum of the first n1 pooled entries.
double u_from_ranksum(double ranksum, std::size_t n1) {
  return ranksum - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
}

// Exact two-sided permutation p-value: enumerate every assignment of the
// pooled values into groups of sizes (n1, n2); the doubled single tail is
// capped at 1.
double exact_p(const std::vector<double>& rank, std::size_t n1, double u_obs) {
  const std::size_t n = rank.size();
  const double mean = 0.5 * static_cast<double>(n1) *
                      static_cast<double>(n - n1);
  const double eps = 1e-9;
  std::vector<std::size_t> comb(n1);
  std::iota(comb.begin(), comb.end(), 0);
  long long total = 0, c_le = 0, c_ge = 0;
  for (;;) {
    double rs = 0.0;
    for (std::size_t idx : comb) rs += rank[idx];
    const double u = u_from_ranksum(rs, n1);
    ++total;
    if (u <= u_obs + eps) ++c_le;
    if (u >= u_obs - eps) ++c_ge;
    // next combination in lexicographic order
    std::size_t i = n1;
    while (i > 0 && comb[i - 1] == n - n1 + i - 1) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t k = i; k < n1; ++k) comb[k] = comb[k - 1] + 1;
  }
  double p;
  if (u_obs < mean - eps)
    p = 2.0 * static_cast<double>(c_le) / static_cast<double>(total);
  else if (u_obs > mean + eps)
    p = 2.0 * static_cast<double>(c_ge) / static_cast<double>(total);
  else
    p = 1.0;
  return std::min(p, 1.0);
}

}  // namespace

MWResult mann_whitney(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty())
    throw missing_data_error("mann_whitney: both samples must be nonempty");
  const std::size_t n1 = x.size(), n2 = y.size(), n = n1 + n2;

  std::vector<double> pooled;
  pooled.reserve(n);
  pooled.insert(pooled.end(), x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const PooledRanks pr = midranks(pooled);

  double ranksum_x = 0.0;
  for (std::size_t i = 0; i < n1; ++i) ranksum_x += pr.rank[i];
  const double u = u_from_ranksum(ranksum_x, n1);

  const double mean = 0.5 * static_cast<double>(n1) * static_cast<double>(n2);
  const double nn = static_cast<double>(n);
  const double var =
      static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
      ((nn + 1.0) - pr.tie_term / (nn * (nn - 1.0)));

  MWResult res;
  res.u = u;
  if (var > 0.0) {
    const double cc = std::max(std::fabs(u - mean) - 0.5, 0.0);
    res.z = (u >= mean ? cc : -cc) / std::sqrt(var);
  } else {
    res.z = 0.0;  // all pooled values identical
  }

  if (n <= kExactLimit) {
    res.exact = true;
    res.p_two_sided = exact_p(pr.rank, n1, u);
  } else {
    res.exact = false;
    res.p_two_sided = var > 0.0 ? prob::normal_two_sided_p(res.z) : 1.0;
  }
  res.stars = significance_stars(res.p_two_sided);
  return res;
}

std::string significance_stars(double p) {
  if (p < 0.0 || p > 1.0)
    throw validation_error("significance_stars: p outside [0,1]");
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

}  // namespace stratos::stats
