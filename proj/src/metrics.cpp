#include "stratos/metrics.hpp"

#include <cmath>

namespace stratos::metrics {

namespace {
void check_rank(int rank) {
  if (rank < 0 || rank > 99)
    throw validation_error("percentile rank out of range [0,99]: " +
                           std::to_string(rank));
}
void check_nonempty(std::span<const int> ranks) {
  if (ranks.empty())
    throw missing_data_error("empty publication portfolio");
}
}  // namespace

double prestige_weight(int rank) {
  check_rank(rank);
  return std::pow(rank / 99.0, kPrestigeExponent);
}

double linear_weight(int rank) {
  check_rank(rank);
  return rank / 99.0;
}

double weighted_productivity(std::span<const int> ranks) {
  check_nonempty(ranks);
  double sum = 0.0;
  for (int r : ranks) sum += prestige_weight(r);
  return sum;
}

double weighted_productivity(std::span<const int> ranks,
                             std::span<const int> team_sizes, Counting mode) {
  check_nonempty(ranks);
  if (mode == Counting::full) return weighted_productivity(ranks);
  if (team_sizes.size() != ranks.size())
    throw validation_error("fractional counting needs one team size per rank");
  double sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (team_sizes[i] < 1)
      throw validation_error("team size must be >= 1");
    sum += prestige_weight(ranks[i]) / team_sizes[i];
  }
  return sum;
}

double linear_productivity(std::span<const int> ranks) {
  check_nonempty(ranks);
  double sum = 0.0;
  for (int r : ranks) sum += linear_weight(r);
  return sum;
}

double top_share(std::span<const int> ranks, int lo, int hi) {
  check_nonempty(ranks);
  int in_band = 0;
  for (int r : ranks) {
    check_rank(r);
    if (r >= lo && r <= hi) ++in_band;
  }
  return static_cast<double>(in_band) / static_cast<double>(ranks.size());
}

DecileHistogram decile_histogram(std::span<const int> ranks) {
  check_nonempty(ranks);
  std::array<int, 10> counts{};
  for (int r : ranks) {
    check_rank(r);
    ++counts[r / 10];
  }
  DecileHistogram h;
  for (int b = 0; b < 10; ++b)
    h.shares[b] = static_cast<double>(counts[b]) / static_cast<double>(ranks.size());
  return h;
}

}  // namespace stratos::metrics
