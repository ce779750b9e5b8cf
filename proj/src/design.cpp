#include "stratos/design.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace stratos::design {

double response_quantile(Response r) {
  switch (r) {
    case Response::top20: return 0.80;
    case Response::top10: return 0.90;
    case Response::top5: return 0.95;
    case Response::top1: return 0.99;
  }
  throw validation_error("unknown response");
}

std::string response_name(Response r) {
  switch (r) {
    case Response::top20: return "top20";
    case Response::top10: return "top10";
    case Response::top5: return "top5";
    case Response::top1: return "top1";
  }
  throw validation_error("unknown response");
}

Response parse_response(std::string_view s) {
  if (s == "top20") return Response::top20;
  if (s == "top10") return Response::top10;
  if (s == "top5") return Response::top5;
  if (s == "top1") return Response::top1;
  throw input_error("unknown response '" + std::string(s) +
                    "', expected top20|top10|top5|top1");
}

namespace {

// type-7 (linear interpolation) quantile of sorted values
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - std::floor(h)) * (sorted[lo + 1] - sorted[lo]);
}

std::string spline_term(int df, int j) {
  return "ns(ln_pubs_c, df = " + std::to_string(df) + ")" + std::to_string(j);
}

}  // namespace

std::vector<double> natural_spline_knots(const Eigen::VectorXd& x, int df) {
  if (df < 1) throw validation_error("natural_spline_basis: df >= 1 required");
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct(sorted);
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (static_cast<int>(distinct.size()) < df + 1)
    throw degenerate_data_error(
        "natural_spline_basis: need at least df+1 distinct values, got " +
        std::to_string(distinct.size()));

  std::vector<double> knots;
  knots.push_back(sorted.front());
  for (int j = 1; j < df; ++j)
    knots.push_back(quantile_sorted(sorted, static_cast<double>(j) / df));
  knots.push_back(sorted.back());
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1]))
      throw degenerate_data_error(
          "natural_spline_basis: coincident knots; data too concentrated");
  return knots;
}

Eigen::MatrixXd natural_spline_basis(const Eigen::VectorXd& x, int df) {
  const std::vector<double> knots = natural_spline_knots(x, df);
  const int K = static_cast<int>(knots.size());  // df + 1
  const double boundary = knots[K - 1];

  auto cube_plus = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  // d_k(t) from the natural cubic spline construction: the truncated-power
  // cubics combined so the result is linear beyond the boundary knots
  auto d = [&](int k, double t) {
    return (cube_plus(t - knots[k]) - cube_plus(t - boundary)) /
           (boundary - knots[k]);
  };

  Eigen::MatrixXd basis(x.size(), df);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double t = x(i);
    basis(i, 0) = t;
    for (int k = 0; k + 2 < K; ++k)
      basis(i, k + 1) = d(k, t) - d(K - 2, t);
  }
  return basis;
}

DesignMatrix build_design(const panel::CenteredPanel& panel,
                          std::span<const char> labels,
                          const DesignSpec& spec) {
  const std::size_t n = panel.rows.size();
  if (n == 0) throw missing_data_error("build_design: empty panel");
  if (labels.size() != n)
    throw validation_error("build_design: labels must align with panel rows");

  DesignMatrix out;
  auto add_group = [&](const std::string& name, int first, int count) {
    std::vector<int> cols(count);
    for (int i = 0; i < count; ++i) cols[i] = first + i;
    out.term_groups.emplace_back(name, std::move(cols));
  };

  out.terms.push_back("(Intercept)");
  for (int t = 1; t < kNumPeriods; ++t)
    out.terms.push_back("Period " + Period{t}.label());
  add_group("Period", 1, kNumPeriods - 1);
  for (int d = 1; d < kNumDisciplines; ++d)
    out.terms.push_back(
        "Discipline: " +
        std::string(discipline_code(static_cast<Discipline>(d))));
  add_group("Discipline", kNumPeriods, kNumDisciplines - 1);

  int col = 1 + (kNumPeriods - 1) + (kNumDisciplines - 1);
  const int spline_first = col;
  if (spec.form == ProductivityForm::quadratic) {
    out.terms.push_back("ln_pubs_c");
    add_group("ln_pubs_c", col++, 1);
    out.terms.push_back("ln_pubs2_c");
    add_group("ln_pubs2_c", col++, 1);
  } else {
    for (int j = 1; j <= spec.spline_df; ++j)
      out.terms.push_back(spline_term(spec.spline_df, j));
    add_group("ns(ln_pubs_c, df = " + std::to_string(spec.spline_df) + ")",
              col, spec.spline_df);
    col += spec.spline_df;
  }
  const auto add_single = [&](const std::string& name) {
    out.terms.push_back(name);
    add_group(name, col++, 1);
  };
  add_single("mean_journal_pct_c");
  add_single("coop_c");
  add_single("coopint_c");
  add_single("MaleMale");
  add_single("acage_c");
  add_single("inst_typeRest");
  add_single("ATS_c");
  add_single("prestmed_c");
  if (spec.interaction()) add_single("ln_pubs_c:mean_journal_pct_c");

  const int p = static_cast<int>(out.terms.size());
  out.X.resize(static_cast<Eigen::Index>(n), p);
  out.y.resize(static_cast<Eigen::Index>(n));
  out.cluster.resize(n);

  Eigen::MatrixXd spline;
  if (spec.form == ProductivityForm::spline) {
    Eigen::VectorXd lnp(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) lnp(i) = panel.centered[i].ln_pubs;
    spline = natural_spline_basis(lnp, spec.spline_df);
  }

  std::unordered_map<std::string, int> cluster_of;
  for (std::size_t i = 0; i < n; ++i) {
    const panel::PanelRow& r = panel.rows[i];
    const panel::CenteredCovariates& c = panel.centered[i];
    const Eigen::Index row = static_cast<Eigen::Index>(i);
    out.X.row(row).setZero();
    out.X(row, 0) = 1.0;
    if (r.cell.period.index > 0) out.X(row, r.cell.period.index) = 1.0;
    if (r.cell.discipline != Discipline::AGRI)
      out.X(row, kNumPeriods - 1 + static_cast<int>(r.cell.discipline)) = 1.0;
    int k = spline_first;
    if (spec.form == ProductivityForm::quadratic) {
      out.X(row, k++) = c.ln_pubs;
      out.X(row, k++) = c.ln_pubs2;
    } else {
      for (int j = 0; j < spec.spline_df; ++j) out.X(row, k++) = spline(row, j);
    }
    out.X(row, k++) = c.mean_journal_pct;
    out.X(row, k++) = c.coop;
    out.X(row, k++) = c.coopint;
    out.X(row, k++) = r.male ? 1.0 : 0.0;
    out.X(row, k++) = c.acage;
    out.X(row, k++) = r.inst_type == InstType::rest ? 1.0 : 0.0;
    out.X(row, k++) = c.ats;
    out.X(row, k++) = c.prestmed;
    if (spec.interaction()) out.X(row, k++) = c.ln_pubs * c.mean_journal_pct;

    out.y(row) = labels[i] ? 1.0 : 0.0;
    auto [it, inserted] =
        cluster_of.emplace(r.author_id, static_cast<int>(cluster_of.size()));
    out.cluster[i] = it->second;
  }
  out.n_clusters = static_cast<int>(cluster_of.size());

  // Empty factor levels show up as all-zero dummy columns; name them rather
  // than failing later inside a solver.
  for (int j = 1; j < p; ++j) {
    if (out.X.col(j).cwiseAbs().maxCoeff() == 0.0)
      throw degenerate_data_error("build_design: column '" + out.terms[j] +
                                  "' is identically zero (empty level)");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(out.X);
  if (qr.rank() < p) {
    const auto& perm = qr.colsPermutation().indices();
    std::string names;
    for (int j = qr.rank(); j < p; ++j) {
      if (!names.empty()) names += ", ";
      names += out.terms[perm[j]];
    }
    throw degenerate_data_error("build_design: rank-deficient design; "
                                "dependent column(s): " + names);
  }
  return out;
}

}  // namespace stratos::design
