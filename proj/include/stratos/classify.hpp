// Per-cell top-performer classification and the stratification analytics
// derived from it (delta matrices, concentration shares).
#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "stratos/core.hpp"
#include "stratos/metrics.hpp"

namespace stratos::classify {

struct ClassLabel {
  bool is_top = false;
  CellKey cell;
  double threshold_used = 0.0;
};

struct CellClassification {
  std::vector<bool> is_top;  // aligned with the input productivities
  double threshold = 0.0;    // the cell's nearest-rank quantile productivity
  int n_top = 0;
};

/// Ranks one cell's productivities and labels the members above the
/// nearest-rank quantile threshold. With all-distinct values the top class
/// has exactly ceil((1-quantile)*n) members; ties at the threshold are
/// excluded, so tied cells can fall short of the nominal share (the 8.8%-type
/// cells) while ceil effects in small cells push it above (the 11.8%-type).
CellClassification classify_cell(std::span<const double> productivities,
                                 double quantile = 0.90);

struct DeltaMatrix {
  // per populated cell: mean decile share among top performers minus mean
  // among the rest; cells with a single class are recorded as missing
  std::map<CellKey, std::array<double, 10>> values;
  std::vector<CellKey> missing;
};

/// Rows grouped by cell: for each cell with both classes present, the
/// per-band difference of mean per-author decile shares.
DeltaMatrix delta_matrix(std::span<const CellKey> cells,
                         std::span<const metrics::DecileHistogram> histograms,
                         std::span<const bool> is_top);

/// Share of cell-total weighted production held by the labeled top class.
double concentration_share(std::span<const double> weighted_prod,
                           std::span<const bool> is_top);

}  // namespace stratos::classify
