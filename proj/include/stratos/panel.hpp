// Aggregation of the clean corpus into the author x period x discipline
// micro-panel, covariate centering, and the panel interchange files.
#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stratos/core.hpp"
#include "stratos/ingest.hpp"
#include "stratos/metrics.hpp"

namespace stratos::panel {

struct PanelRow {
  std::string author_id;
  CellKey cell;
  int n_pubs = 0;
  double ln_pubs = 0.0;
  double ln_pubs2 = 0.0;          // square of ln_pubs (pre-centering)
  double mean_journal_pct = 0.0;  // 0..99
  double coop = 0.0;              // share of multi-authored publications
  double coopint = 0.0;           // share with a foreign co-affiliation
  bool male = false;
  int acage = 0;                  // years since first publication
  InstType inst_type = InstType::rest;
  double ats = 1.0;               // mean byline size
  double prestmed = 0.0;          // median journal percentile
  double weighted_prod = 0.0;     // prestige-normalized productivity
  double top_share = 0.0;         // share in ranks 90-99
};

struct PanelTable {
  std::vector<PanelRow> rows;                        // sorted (author, period)
  std::vector<metrics::DecileHistogram> histograms;  // aligned with rows
};

/// Most frequent ASJC code across the code lists of one author-period's
/// publications; ties break to the alphabetically first code.
Discipline modal_discipline(
    std::span<const PublicationRecord* const> period_pubs);
Discipline modal_discipline(const ingest::Corpus& corpus,
                            const std::string& author_id, Period period);

/// period.end_year - first_pub_year.
int academic_age(const AuthorRecord& author, Period period);

/// One row per (retained author, period with at least one coded publication),
/// every covariate computed from that period's publications only.
PanelTable build_panel(const ingest::Corpus& corpus,
                       metrics::Counting counting = metrics::Counting::full);

struct CenteredCovariates {
  double ln_pubs = 0.0;
  double ln_pubs2 = 0.0;  // square of centered ln_pubs, then centered
  double mean_journal_pct = 0.0;
  double coop = 0.0;
  double coopint = 0.0;
  double acage = 0.0;
  double ats = 0.0;
  double prestmed = 0.0;
};

struct CenteredPanel {
  std::vector<PanelRow> rows;  // the source rows, untouched
  std::vector<CenteredCovariates> centered;
  std::map<std::string, double> centering_means;
};

CenteredPanel center_covariates(std::span<const PanelRow> rows);
/// Recentering: applied to an already centered panel it is the identity.
CenteredPanel center_covariates(const CenteredPanel& panel);

// ---------------------------------------------------------------------------
// Interchange files. panel.csv column order is fixed:
//   author_id,period,discipline,n_pubs,ln_pubs,ln_pubs2,mean_journal_pct,
//   coop,coopint,male,acage,inst_type,ats,prestmed,weighted_prod,top_share
// with optional trailing label columns is_top20,is_top10,is_top5,is_top1.
// Decile histograms travel in a sidecar file (author_id,period,d0..d9).

struct PanelFile {
  std::vector<PanelRow> rows;
  std::map<std::string, std::vector<char>> labels;  // "top10" -> 0/1 per row
};

void write_panel(const std::filesystem::path& path,
                 std::span<const PanelRow> rows,
                 const std::map<std::string, std::vector<char>>& labels = {});
PanelFile read_panel(const std::filesystem::path& path);

void write_histograms(const std::filesystem::path& path,
                      std::span<const PanelRow> rows,
                      std::span<const metrics::DecileHistogram> histograms);
std::vector<metrics::DecileHistogram> read_histograms(
    const std::filesystem::path& path, std::span<const PanelRow> expected_rows);

}  // namespace stratos::panel
