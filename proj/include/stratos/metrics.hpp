// Journal-prestige weighting and per-portfolio prestige analytics.
#pragma once

#include <array>
#include <span>

#include "stratos/core.hpp"

namespace stratos::metrics {

inline constexpr double kPrestigeExponent = 2.5;
inline constexpr int kTopBandLow = 90;
inline constexpr int kTopBandHigh = 99;

enum class Counting { full, fractional };

/// (rank/99)^2.5 in [0,1]; strictly increasing and convex in rank.
double prestige_weight(int rank);

/// Linear variant (rank/99) used as the comparison baseline.
double linear_weight(int rank);

/// Sum of prestige weights over one author-period portfolio, full counting.
double weighted_productivity(std::span<const int> ranks);

/// Counting-mode variant; fractional divides each weight by the byline size.
double weighted_productivity(std::span<const int> ranks,
                             std::span<const int> team_sizes, Counting mode);

/// Same portfolios under the linear y = x weighting.
double linear_productivity(std::span<const int> ranks);

/// Fraction of publications with rank in the inclusive band [lo, hi].
double top_share(std::span<const int> ranks, int lo = kTopBandLow,
                 int hi = kTopBandHigh);

struct DecileHistogram {
  std::array<double, 10> shares{};  // band b covers ranks [10b, 10b+9]

  double operator[](int band) const { return shares[band]; }
};

/// Share of the portfolio falling in each journal decile; shares sum to 1.
DecileHistogram decile_histogram(std::span<const int> ranks);

}  // namespace stratos::metrics
