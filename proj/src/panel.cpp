#include "stratos/panel.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "stratos/par.hpp"

namespace stratos::panel {

Discipline modal_discipline(
    std::span<const PublicationRecord* const> period_pubs) {
  if (period_pubs.empty())
    throw missing_data_error("modal_discipline: no publications in period");
  std::array<int, kNumDisciplines> counts{};
  bool any = false;
  for (const auto* p : period_pubs) {
    for (Discipline d : p->asjc_codes) {
      ++counts[static_cast<int>(d)];
      any = true;
    }
  }
  if (!any)
    throw missing_data_error(
        "modal_discipline: no discipline codes on any publication");
  int best = 0;
  for (int i = 1; i < kNumDisciplines; ++i)
    if (counts[i] > counts[best]) best = i;  // ties keep the earlier code
  return static_cast<Discipline>(best);
}

Discipline modal_discipline(const ingest::Corpus& corpus,
                            const std::string& author_id, Period period) {
  std::vector<const PublicationRecord*> pubs;
  for (const auto& p : corpus.publications) {
    if (period_of_year(p.year) != period) continue;
    if (std::find(p.author_ids.begin(), p.author_ids.end(), author_id) !=
        p.author_ids.end())
      pubs.push_back(&p);
  }
  return modal_discipline(pubs);
}

int academic_age(const AuthorRecord& author, Period period) {
  if (!author.first_pub_year)
    throw missing_data_error("academic_age: first_pub_year missing for " +
                             author.author_id);
  if (*author.first_pub_year > period.end_year())
    throw validation_error("academic_age: first publication of " +
                           author.author_id + " (" +
                           std::to_string(*author.first_pub_year) +
                           ") is after period end " +
                           std::to_string(period.end_year()));
  return period.end_year() - *author.first_pub_year;
}

namespace {

double median(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

PanelTable build_panel(const ingest::Corpus& corpus,
                       metrics::Counting counting) {
  // One bucket per (retained author, period); publications enter buckets in
  // corpus order, which the cleaner has sorted by pub_id.
  std::unordered_map<std::string, const AuthorRecord*> author_index;
  author_index.reserve(corpus.authors.size());
  for (const auto& a : corpus.authors) author_index[a.author_id] = &a;

  struct Bucket {
    std::vector<const PublicationRecord*> pubs;
  };
  std::unordered_map<std::string, std::array<Bucket, kNumPeriods>> buckets;
  buckets.reserve(corpus.authors.size());
  for (const auto& p : corpus.publications) {
    const int period = period_of_year(p.year).index;
    for (const auto& id : p.author_ids) {
      if (!author_index.count(id)) continue;  // non-retained co-author
      buckets[id][period].pubs.push_back(&p);
    }
  }

  // Flatten into deterministic (author, period) tasks, sorted like the
  // authors table.
  struct Task {
    const AuthorRecord* author;
    Period period;
    const Bucket* bucket;
  };
  std::vector<Task> tasks;
  for (const auto& a : corpus.authors) {
    auto it = buckets.find(a.author_id);
    if (it == buckets.end()) continue;
    for (int t = 0; t < kNumPeriods; ++t) {
      const Bucket& b = it->second[t];
      if (b.pubs.empty()) continue;
      bool any_code = std::any_of(b.pubs.begin(), b.pubs.end(),
                                  [](const auto* p) { return !p->asjc_codes.empty(); });
      if (!any_code) continue;  // no modal discipline derivable in this period
      tasks.push_back({&a, Period{t}, &b});
    }
  }

  PanelTable out;
  out.rows.resize(tasks.size());
  out.histograms.resize(tasks.size());
  par::for_each_index(tasks.size(), [&](std::size_t i) {
    const Task& task = tasks[i];
    const auto& pubs = task.bucket->pubs;
    std::vector<int> ranks, teams;
    ranks.reserve(pubs.size());
    teams.reserve(pubs.size());
    int multi = 0, foreign = 0;
    long long team_total = 0;
    for (const auto* p : pubs) {
      ranks.push_back(p->percentile.rank());
      teams.push_back(p->author_count());
      team_total += p->author_count();
      if (p->author_count() >= 2) ++multi;
      if (p->any_foreign_affiliation) ++foreign;
    }
    const double n = static_cast<double>(pubs.size());

    PanelRow row;
    row.author_id = task.author->author_id;
    row.cell = CellKey{task.period, modal_discipline(pubs)};
    row.n_pubs = static_cast<int>(pubs.size());
    row.ln_pubs = std::log(n);
    row.ln_pubs2 = row.ln_pubs * row.ln_pubs;
    double rank_sum = 0.0;
    for (int r : ranks) rank_sum += r;
    row.mean_journal_pct = rank_sum / n;
    row.coop = multi / n;
    row.coopint = foreign / n;
    row.male = task.author->gender == Gender::male;
    row.acage = academic_age(*task.author, task.period);
    row.inst_type = task.author->inst_type;
    row.ats = static_cast<double>(team_total) / n;
    row.prestmed = median(ranks);
    row.weighted_prod = metrics::weighted_productivity(ranks, teams, counting);
    row.top_share = metrics::top_share(ranks);
    out.rows[i] = std::move(row);
    out.histograms[i] = metrics::decile_histogram(ranks);
  });
  return out;
}

CenteredPanel center_covariates(std::span<const PanelRow> rows) {
  if (rows.empty())
    throw missing_data_error("center_covariates: empty panel");
  const double n = static_cast<double>(rows.size());

  auto mean = [&](auto&& get) {
    double s = 0.0;
    for (const auto& r : rows) s += get(r);
    return s / n;
  };

  CenteredPanel out;
  out.rows.assign(rows.begin(), rows.end());
  out.centered.resize(rows.size());

  const double m_ln = mean([](const PanelRow& r) { return r.ln_pubs; });
  const double m_pct = mean([](const PanelRow& r) { return r.mean_journal_pct; });
  const double m_coop = mean([](const PanelRow& r) { return r.coop; });
  const double m_ci = mean([](const PanelRow& r) { return r.coopint; });
  const double m_age = mean([](const PanelRow& r) { return double(r.acage); });
  const double m_ats = mean([](const PanelRow& r) { return r.ats; });
  const double m_med = mean([](const PanelRow& r) { return r.prestmed; });

  // the quadratic term is the square of the centered log count, centered again
  double m_sq = 0.0;
  for (const auto& r : rows) {
    const double c = r.ln_pubs - m_ln;
    m_sq += c * c;
  }
  m_sq /= n;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const PanelRow& r = rows[i];
    CenteredCovariates& c = out.centered[i];
    c.ln_pubs = r.ln_pubs - m_ln;
    c.ln_pubs2 = c.ln_pubs * c.ln_pubs - m_sq;
    c.mean_journal_pct = r.mean_journal_pct - m_pct;
    c.coop = r.coop - m_coop;
    c.coopint = r.coopint - m_ci;
    c.acage = static_cast<double>(r.acage) - m_age;
    c.ats = r.ats - m_ats;
    c.prestmed = r.prestmed - m_med;
  }

  out.centering_means = {
      {"ln_pubs", m_ln},   {"ln_pubs2", m_sq}, {"mean_journal_pct", m_pct},
      {"coop", m_coop},    {"coopint", m_ci},  {"acage", m_age},
      {"ats", m_ats},      {"prestmed", m_med},
  };
  return out;
}

CenteredPanel center_covariates(const CenteredPanel& panel) {
  if (panel.centered.empty())
    throw missing_data_error("center_covariates: empty panel");
  const double n = static_cast<double>(panel.centered.size());

  auto mean = [&](auto&& get) {
    double s = 0.0;
    for (const auto& c : panel.centered) s += get(c);
    return s / n;
  };
  const double m_ln = mean([](const CenteredCovariates& c) { return c.ln_pubs; });
  const double m_pct = mean([](const CenteredCovariates& c) { return c.mean_journal_pct; });
  const double m_coop = mean([](const CenteredCovariates& c) { return c.coop; });
  const double m_ci = mean([](const CenteredCovariates& c) { return c.coopint; });
  const double m_age = mean([](const CenteredCovariates& c) { return c.acage; });
  const double m_ats = mean([](const CenteredCovariates& c) { return c.ats; });
  const double m_med = mean([](const CenteredCovariates& c) { return c.prestmed; });
  double m_sq = 0.0;
  for (const auto& c : panel.centered) {
    const double v = c.ln_pubs - m_ln;
    m_sq += v * v;
  }
  m_sq /= n;

  CenteredPanel out;
  out.rows = panel.rows;
  out.centered.resize(panel.centered.size());
  for (std::size_t i = 0; i < panel.centered.size(); ++i) {
    const CenteredCovariates& c = panel.centered[i];
    CenteredCovariates& o = out.centered[i];
    o.ln_pubs = c.ln_pubs - m_ln;
    o.ln_pubs2 = o.ln_pubs * o.ln_pubs - m_sq;
    o.mean_journal_pct = c.mean_journal_pct - m_pct;
    o.coop = c.coop - m_coop;
    o.coopint = c.coopint - m_ci;
    o.acage = c.acage - m_age;
    o.ats = c.ats - m_ats;
    o.prestmed = c.prestmed - m_med;
  }
  out.centering_means = {
      {"ln_pubs", m_ln},   {"ln_pubs2", m_sq}, {"mean_journal_pct", m_pct},
      {"coop", m_coop},    {"coopint", m_ci},  {"acage", m_age},
      {"ats", m_ats},      {"prestmed", m_med},
  };
  return out;
}

// ---------------------------------------------------------------------------
// Interchange files.

namespace {

const char* kPanelHeaderBase =
    "author_id,period,discipline,n_pubs,ln_pubs,ln_pubs2,mean_journal_pct,"
    "coop,coopint,male,acage,inst_type,ats,prestmed,weighted_prod,top_share";
constexpr int kPanelBaseFields = 16;
const std::array<const char*, 4> kLabelNames = {"top20", "top10", "top5", "top1"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

Period parse_period_label(const std::string& s, std::size_t line) {
  int start = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), start);
  if (ec != std::errc{})
    throw parse_error("bad period label '" + s + "'", line);
  Period period = period_of_year(start);
  if (period.label() != s)
    throw parse_error("bad period label '" + s + "'", line);
  return period;
}

double parse_num(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw parse_error("bad numeric field '" + s + "'", line);
  }
}

}  // namespace

void write_panel(const std::filesystem::path& path,
                 std::span<const PanelRow> rows,
                 const std::map<std::string, std::vector<char>>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write " + path.string());
  out << kPanelHeaderBase;
  for (const char* name : kLabelNames)
    if (labels.count(name)) out << ",is_" << name;
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const PanelRow& r = rows[i];
    out << r.author_id << ',' << r.cell.period.label() << ','
        << discipline_code(r.cell.discipline) << ',' << r.n_pubs << ','
        << fmt(r.ln_pubs) << ',' << fmt(r.ln_pubs2) << ','
        << fmt(r.mean_journal_pct) << ',' << fmt(r.coop) << ','
        << fmt(r.coopint) << ',' << (r.male ? '1' : '0') << ',' << r.acage
        << ',' << inst_type_code(r.inst_type) << ',' << fmt(r.ats) << ','
        << fmt(r.prestmed) << ',' << fmt(r.weighted_prod) << ','
        << fmt(r.top_share);
    for (const char* name : kLabelNames) {
      auto it = labels.find(name);
      if (it == labels.end()) continue;
      if (it->second.size() != rows.size())
        throw validation_error("label column size mismatch for " +
                               std::string(name));
      out << ',' << (it->second[i] ? '1' : '0');
    }
    out << '\n';
  }
}

PanelFile read_panel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  std::string row;
  if (!std::getline(in, row)) throw parse_error("empty panel file", 1);
  if (!row.empty() && row.back() == '\r') row.pop_back();
  auto header = split(row, ',');
  if (header.size() < kPanelBaseFields ||
      split(kPanelHeaderBase, ',') !=
          std::vector<std::string>(header.begin(),
                                   header.begin() + kPanelBaseFields))
    throw parse_error("unexpected panel header", 1);

  PanelFile out;
  std::vector<std::string> label_cols(header.begin() + kPanelBaseFields,
                                      header.end());
  for (const auto& col : label_cols) {
    if (col.rfind("is_", 0) != 0)
      throw parse_error("unexpected panel column '" + col + "'", 1);
    out.labels[col.substr(3)] = {};
  }

  std::size_t line = 1;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    auto f = split(row, ',');
    if (f.size() != header.size())
      throw parse_error("expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(f.size()),
                        line);
    PanelRow r;
    r.author_id = f[0];
    r.cell.period = parse_period_label(f[1], line);
    auto d = parse_discipline(f[2]);
    if (!d) throw parse_error("unknown discipline '" + f[2] + "'", line);
    r.cell.discipline = *d;
    r.n_pubs = static_cast<int>(parse_num(f[3], line));
    r.ln_pubs = parse_num(f[4], line);
    r.ln_pubs2 = parse_num(f[5], line);
    r.mean_journal_pct = parse_num(f[6], line);
    r.coop = parse_num(f[7], line);
    r.coopint = parse_num(f[8], line);
    r.male = f[9] == "1";
    r.acage = static_cast<int>(parse_num(f[10], line));
    auto t = parse_inst_type(f[11]);
    if (!t) throw parse_error("unknown inst_type '" + f[11] + "'", line);
    r.inst_type = *t;
    r.ats = parse_num(f[12], line);
    r.prestmed = parse_num(f[13], line);
    r.weighted_prod = parse_num(f[14], line);
    r.top_share = parse_num(f[15], line);
    for (std::size_t c = 0; c < label_cols.size(); ++c)
      out.labels[label_cols[c].substr(3)].push_back(
          f[kPanelBaseFields + c] == "1" ? 1 : 0);
    out.rows.push_back(std::move(r));
  }
  return out;
}

void write_histograms(const std::filesystem::path& path,
                      std::span<const PanelRow> rows,
                      std::span<const metrics::DecileHistogram> histograms) {
  if (rows.size() != histograms.size())
    throw validation_error("write_histograms: spans must be aligned");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write " + path.string());
  out << "author_id,period";
  for (int b = 0; b < 10; ++b) out << ",d" << b;
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i].author_id << ',' << rows[i].cell.period.label();
    for (int b = 0; b < 10; ++b) out << ',' << fmt(histograms[i].shares[b]);
    out << '\n';
  }
}

std::vector<metrics::DecileHistogram> read_histograms(
    const std::filesystem::path& path,
    std::span<const PanelRow> expected_rows) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  std::string row;
  if (!std::getline(in, row)) throw parse_error("empty histogram file", 1);
  std::vector<metrics::DecileHistogram> out;
  std::size_t line = 1;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    auto f = split(row, ',');
    if (f.size() != 12) throw parse_error("expected 12 fields", line);
    const std::size_t i = out.size();
    if (i >= expected_rows.size())
      throw parse_error("more histogram rows than panel rows", line);
    if (f[0] != expected_rows[i].author_id ||
        f[1] != expected_rows[i].cell.period.label())
      throw parse_error("histogram row does not match panel row order", line);
    metrics::DecileHistogram h;
    for (int b = 0; b < 10; ++b) h.shares[b] = parse_num(f[2 + b], line);
    out.push_back(h);
  }
  if (out.size() != expected_rows.size())
    throw parse_error("fewer histogram rows than panel rows", line);
  return out;
}

}  // namespace stratos::panel
