// Rank-based two-sample comparison (Mann-Whitney U).
#pragma once

#include <span>
#include <string>

#include "stratos/core.hpp"

namespace stratos::stats {

/// Combined sample sizes up to this limit get an exact permutation p-value;
/// larger samples use the tie-corrected normal approximation with continuity
/// correction.
inline constexpr std::size_t kExactLimit = 16;

struct MWResult {
  double u = 0.0;        // pairs (x_i > y_j) plus half-ties
  double z = 0.0;        // standardized statistic (continuity-corrected)
  double p_two_sided = 1.0;
  std::string stars;     // "", "*", "**", "***"
  bool exact = false;    // whether the permutation path produced p
};

MWResult mann_whitney(std::span<const double> x, std::span<const double> y);

/// "***" p<0.001, "**" p<0.01, "*" p<0.05, else "".
std::string significance_stars(double p);

}  // namespace stratos::stats
