#include "stratos/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace stratos::ingest {

using nlohmann::json;

FileFormat parse_format(std::string_view s) {
  if (s == "csv") return FileFormat::csv;
  if (s == "jsonl") return FileFormat::jsonl;
  throw input_error("unknown format '" + std::string(s) + "', expected csv or jsonl");
}

namespace {

constexpr char kFieldSep = ',';
constexpr char kListSep = ';';

std::vector<std::string> split(std::string_view s, char sep) {
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

int parse_int(std::string_view s, const char* what, std::size_t line) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw parse_error(std::string("invalid ") + what + " '" + std::string(s) + "'", line);
  return v;
}

double parse_double(std::string_view s, const char* what, std::size_t line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(std::string(s), &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw parse_error(std::string("invalid ") + what + " '" + std::string(s) + "'", line);
  }
}

bool parse_bool(std::string_view s, const char* what, std::size_t line) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw parse_error(std::string("invalid ") + what + " '" + std::string(s) + "'", line);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write " + path.string());
  return out;
}

void validate_publication(PublicationRecord& rec, std::size_t line) {
  if (rec.pub_id.empty()) throw parse_error("empty pub_id", line);
  if (rec.author_ids.empty())
    throw parse_error("publication " + rec.pub_id + " has no authors", line);
  if (rec.year < kFirstYear || rec.year > kLastYear)
    throw parse_error("publication " + rec.pub_id + " year " +
                          std::to_string(rec.year) + " outside 1992-2021",
                      line);
}

std::vector<Discipline> parse_codes(std::string_view field, std::size_t line) {
  std::vector<Discipline> codes;
  if (field.empty()) return codes;
  for (const std::string& tok : split(field, kListSep)) {
    auto d = parse_discipline(tok);
    if (!d) throw parse_error("unknown discipline code '" + tok + "'", line);
    codes.push_back(*d);
  }
  return codes;
}

const char* kPubHeader = "pub_id,year,journal_percentile,author_ids,asjc_codes,any_foreign_affiliation";
const char* kAuthorHeader = "author_id,gender,gender_confidence,first_pub_year,inst_type";

PublicationRecord pub_from_csv(const std::string& row, std::size_t line) {
  auto f = split(row, kFieldSep);
  if (f.size() != 6)
    throw parse_error("expected 6 fields, got " + std::to_string(f.size()), line);
  PublicationRecord rec;
  rec.pub_id = f[0];
  rec.year = parse_int(f[1], "year", line);
  int rank = parse_int(f[2], "journal_percentile", line);
  try {
    rec.percentile = JournalPercentile(rank);
  } catch (const validation_error& e) {
    throw parse_error(e.what(), line);
  }
  if (!f[3].empty()) rec.author_ids = split(f[3], kListSep);
  rec.asjc_codes = parse_codes(f[4], line);
  rec.any_foreign_affiliation = parse_bool(f[5], "any_foreign_affiliation", line);
  validate_publication(rec, line);
  return rec;
}

PublicationRecord pub_from_json(const std::string& row, std::size_t line) {
  json j;
  try {
    j = json::parse(row);
  } catch (const json::exception& e) {
    throw parse_error(std::string("bad json: ") + e.what(), line);
  }
  PublicationRecord rec;
  try {
    rec.pub_id = j.at("pub_id").get<std::string>();
    rec.year = j.at("year").get<int>();
    int rank = j.at("journal_percentile").get<int>();
    rec.percentile = JournalPercentile(rank);
    rec.author_ids = j.at("author_ids").get<std::vector<std::string>>();
    for (const auto& code : j.at("asjc_codes")) {
      auto d = parse_discipline(code.get<std::string>());
      if (!d) throw parse_error("unknown discipline code '" + code.get<std::string>() + "'", line);
      rec.asjc_codes.push_back(*d);
    }
    rec.any_foreign_affiliation = j.at("any_foreign_affiliation").get<bool>();
  } catch (const json::exception& e) {
    throw parse_error(std::string("bad publication object: ") + e.what(), line);
  } catch (const validation_error& e) {
    throw parse_error(e.what(), line);
  }
  validate_publication(rec, line);
  return rec;
}

AuthorRecord author_from_csv(const std::string& row, std::size_t line) {
  auto f = split(row, kFieldSep);
  if (f.size() != 5)
    throw parse_error("expected 5 fields, got " + std::to_string(f.size()), line);
  AuthorRecord rec;
  rec.author_id = f[0];
  if (rec.author_id.empty()) throw parse_error("empty author_id", line);
  auto g = parse_gender(f[1]);
  if (!g) throw parse_error("unknown gender '" + f[1] + "'", line);
  rec.gender = *g;
  rec.gender_confidence = parse_double(f[2], "gender_confidence", line);
  if (rec.gender_confidence < 0.0 || rec.gender_confidence > 1.0)
    throw parse_error("gender_confidence outside [0,1]", line);
  if (!f[3].empty()) rec.first_pub_year = parse_int(f[3], "first_pub_year", line);
  auto t = parse_inst_type(f[4]);
  if (!t) throw parse_error("unknown inst_type '" + f[4] + "'", line);
  rec.inst_type = *t;
  return rec;
}

AuthorRecord author_from_json(const std::string& row, std::size_t line) {
  json j;
  try {
    j = json::parse(row);
  } catch (const json::exception& e) {
    throw parse_error(std::string("bad json: ") + e.what(), line);
  }
  AuthorRecord rec;
  try {
    rec.author_id = j.at("author_id").get<std::string>();
    auto g = parse_gender(j.at("gender").get<std::string>());
    if (!g) throw parse_error("unknown gender", line);
    rec.gender = *g;
    rec.gender_confidence = j.at("gender_confidence").get<double>();
    if (rec.gender_confidence < 0.0 || rec.gender_confidence > 1.0)
      throw parse_error("gender_confidence outside [0,1]", line);
    if (j.contains("first_pub_year") && !j["first_pub_year"].is_null())
      rec.first_pub_year = j["first_pub_year"].get<int>();
    auto t = parse_inst_type(j.at("inst_type").get<std::string>());
    if (!t) throw parse_error("unknown inst_type", line);
    rec.inst_type = *t;
  } catch (const json::exception& e) {
    throw parse_error(std::string("bad author object: ") + e.what(), line);
  }
  if (rec.author_id.empty()) throw parse_error("empty author_id", line);
  return rec;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string format_confidence(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", c);
  return buf;
}

}  // namespace

std::vector<PublicationRecord> load_publications(
    const std::filesystem::path& path, FileFormat format) {
  auto in = open_input(path);
  std::vector<PublicationRecord> out;
  std::unordered_set<std::string> seen;
  std::string row;
  std::size_t line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    if (format == FileFormat::csv && line == 1) {
      if (row != kPubHeader)
        throw parse_error("unexpected publications header '" + row + "'", line);
      continue;
    }
    PublicationRecord rec = format == FileFormat::csv ? pub_from_csv(row, line)
                                                      : pub_from_json(row, line);
    if (!seen.insert(rec.pub_id).second)
      throw parse_error("duplicate pub_id '" + rec.pub_id + "'", line);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<AuthorRecord> load_authors(const std::filesystem::path& path,
                                       FileFormat format) {
  auto in = open_input(path);
  std::vector<AuthorRecord> out;
  std::unordered_set<std::string> seen;
  std::string row;
  std::size_t line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    if (format == FileFormat::csv && line == 1) {
      if (row != kAuthorHeader)
        throw parse_error("unexpected authors header '" + row + "'", line);
      continue;
    }
    AuthorRecord rec = format == FileFormat::csv ? author_from_csv(row, line)
                                                 : author_from_json(row, line);
    if (!seen.insert(rec.author_id).second)
      throw parse_error("duplicate author_id '" + rec.author_id + "'", line);
    out.push_back(std::move(rec));
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& publications_path,
                   const std::filesystem::path& authors_path,
                   FileFormat format) {
  Corpus c;
  c.publications = load_publications(publications_path, format);
  c.authors = load_authors(authors_path, format);
  return c;
}

void write_publications(const std::filesystem::path& path,
                        const std::vector<PublicationRecord>& pubs,
                        FileFormat format) {
  auto out = open_output(path);
  if (format == FileFormat::csv) {
    out << kPubHeader << '\n';
    for (const auto& p : pubs) {
      std::vector<std::string> codes;
      codes.reserve(p.asjc_codes.size());
      for (auto d : p.asjc_codes) codes.emplace_back(discipline_code(d));
      out << p.pub_id << ',' << p.year << ',' << p.percentile.rank() << ','
          << join(p.author_ids, kListSep) << ',' << join(codes, kListSep) << ','
          << (p.any_foreign_affiliation ? '1' : '0') << '\n';
    }
  } else {
    for (const auto& p : pubs) {
      json j;
      j["pub_id"] = p.pub_id;
      j["year"] = p.year;
      j["journal_percentile"] = p.percentile.rank();
      j["author_ids"] = p.author_ids;
      std::vector<std::string> codes;
      for (auto d : p.asjc_codes) codes.emplace_back(discipline_code(d));
      j["asjc_codes"] = codes;
      j["any_foreign_affiliation"] = p.any_foreign_affiliation;
      out << j.dump() << '\n';
    }
  }
}

void write_authors(const std::filesystem::path& path,
                   const std::vector<AuthorRecord>& authors,
                   FileFormat format) {
  auto out = open_output(path);
  if (format == FileFormat::csv) {
    out << kAuthorHeader << '\n';
    for (const auto& a : authors) {
      out << a.author_id << ',' << gender_code(a.gender) << ','
          << format_confidence(a.gender_confidence) << ',';
      if (a.first_pub_year) out << *a.first_pub_year;
      out << ',' << inst_type_code(a.inst_type) << '\n';
    }
  } else {
    for (const auto& a : authors) {
      json j;
      j["author_id"] = a.author_id;
      j["gender"] = std::string(gender_code(a.gender));
      j["gender_confidence"] = a.gender_confidence;
      if (a.first_pub_year)
        j["first_pub_year"] = *a.first_pub_year;
      else
        j["first_pub_year"] = nullptr;
      j["inst_type"] = std::string(inst_type_code(a.inst_type));
      out << j.dump() << '\n';
    }
  }
}

std::pair<Corpus, CleaningReport> clean(const Corpus& corpus,
                                        const CleaningConfig& config) {
  if (config.max_authors < 1)
    throw validation_error("cleaning: max_authors must be >= 1");
  if (config.gender_confidence_min < 0.0 || config.gender_confidence_min > 1.0)
    throw validation_error("cleaning: gender_confidence_min outside [0,1]");

  Corpus out;
  CleaningReport report;

  out.publications.reserve(corpus.publications.size());
  for (const auto& p : corpus.publications) {
    if (p.author_count() > config.max_authors) {
      ++report.dropped_big_author_lists;
    } else {
      out.publications.push_back(p);
    }
  }

  // Authors with at least one retained coded publication can be assigned a
  // modal discipline somewhere; the rest cannot.
  std::unordered_set<std::string> has_coded_pub;
  if (config.require_discipline) {
    for (const auto& p : out.publications) {
      if (p.asjc_codes.empty()) continue;
      for (const auto& id : p.author_ids) has_coded_pub.insert(id);
    }
  }

  out.authors.reserve(corpus.authors.size());
  for (const auto& a : corpus.authors) {
    if (a.gender == Gender::unknown ||
        a.gender_confidence < config.gender_confidence_min) {
      ++report.dropped_gender;
    } else if (config.require_first_pub_year && !a.first_pub_year) {
      ++report.dropped_first_year;
    } else if (config.require_discipline && !has_coded_pub.count(a.author_id)) {
      ++report.dropped_discipline;
    } else {
      out.authors.push_back(a);
    }
  }

  std::sort(out.publications.begin(), out.publications.end(),
            [](const auto& a, const auto& b) { return a.pub_id < b.pub_id; });
  std::sort(out.authors.begin(), out.authors.end(),
            [](const auto& a, const auto& b) { return a.author_id < b.author_id; });

  report.retained_publications = static_cast<long long>(out.publications.size());
  report.retained_authors = static_cast<long long>(out.authors.size());
  return {std::move(out), report};
}

}  // namespace stratos::ingest
