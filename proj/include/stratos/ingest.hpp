// Corpus file parsing (delimited and JSON-lines) and the cleaning rules that
// produce the analyzable corpus plus an audit report.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stratos/core.hpp"

namespace stratos::ingest {

enum class FileFormat { csv, jsonl };

FileFormat parse_format(std::string_view s);  // "csv" | "jsonl"

struct Corpus {
  std::vector<PublicationRecord> publications;
  std::vector<AuthorRecord> authors;
};

struct CleaningConfig {
  int max_authors = 100;
  double gender_confidence_min = 0.85;  // inclusive: >= retains
  bool require_first_pub_year = true;
  bool require_discipline = true;
};

struct CleaningReport {
  long long dropped_gender = 0;
  long long dropped_first_year = 0;
  long long dropped_discipline = 0;
  long long dropped_big_author_lists = 0;
  long long retained_authors = 0;
  long long retained_publications = 0;
};

// Parsers reject malformed rows with the line number and refuse duplicate
// keys; they never drop rows silently.
std::vector<PublicationRecord> load_publications(
    const std::filesystem::path& path, FileFormat format);
std::vector<AuthorRecord> load_authors(const std::filesystem::path& path,
                                       FileFormat format);
Corpus load_corpus(const std::filesystem::path& publications_path,
                   const std::filesystem::path& authors_path,
                   FileFormat format);

void write_publications(const std::filesystem::path& path,
                        const std::vector<PublicationRecord>& pubs,
                        FileFormat format);
void write_authors(const std::filesystem::path& path,
                   const std::vector<AuthorRecord>& authors,
                   FileFormat format);

/// Applies the cleaning rules and reports every drop. Total: never fails on
/// content. Publications are dropped only for oversized bylines; authors for
/// unresolved gender (unknown or confidence below the threshold), missing
/// first publication year, or no coded publication to derive a discipline
/// from. Output is sorted by pub_id / author_id. Each dropped author is
/// counted once, against the first failing rule in that order.
std::pair<Corpus, CleaningReport> clean(const Corpus& corpus,
                                        const CleaningConfig& config = {});

}  // namespace stratos::ingest
