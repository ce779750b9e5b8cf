// Domain vocabulary shared by every stage: analytical periods, the 15 STEMM
// discipline codes, journal percentile ranks, publication/author records and
// the (period, discipline) reference cells.
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stratos {

// ---------------------------------------------------------------------------
// Errors. The CLI maps these onto process exit codes (see tools/).

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files, bad configuration, missing upstream artifacts.
struct input_error : error {
  using error::error;
};

// Parse failures carry the offending line where available.
struct parse_error : input_error {
  parse_error(const std::string& msg, std::size_t line)
      : input_error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
  explicit parse_error(const std::string& msg) : input_error(msg), line(0) {}
  std::size_t line;
};

// Domain invariant violated by otherwise well-formed data.
struct validation_error : input_error {
  using input_error::input_error;
};

// Requested value cannot be computed because the data is absent.
struct missing_data_error : error {
  using error::error;
};

// Cells/samples too small or too collinear to carry the requested analysis.
struct degenerate_data_error : error {
  using error::error;
};

// Iterative fits that failed to converge (includes perfect separation).
struct convergence_error : error {
  using error::error;
};

// ---------------------------------------------------------------------------
// Periods. Five disjoint six-year windows covering 1992-2021.

inline constexpr int kFirstYear = 1992;
inline constexpr int kLastYear = 2021;
inline constexpr int kPeriodYears = 6;
inline constexpr int kNumPeriods = 5;

struct Period {
  int index = 0;  // 0..4

  int start_year() const { return kFirstYear + index * kPeriodYears; }
  int end_year() const { return start_year() + kPeriodYears - 1; }
  std::string label() const {
    return std::to_string(start_year()) + "-" + std::to_string(end_year());
  }

  auto operator<=>(const Period&) const = default;
};

/// Unique period containing `year`; throws validation_error outside 1992-2021.
Period period_of_year(int year);

// ---------------------------------------------------------------------------
// Disciplines. The 2-digit ASJC STEMM subset, alphabetical.

enum class Discipline : std::uint8_t {
  AGRI, BIO, CHEM, CHEMENG, COMP, EARTH, ENER, ENG,
  ENVI, MATER, MATH, MED, NEURO, PHARM, PHYS,
};

inline constexpr int kNumDisciplines = 15;

std::string_view discipline_code(Discipline d);
std::optional<Discipline> parse_discipline(std::string_view code);
const std::array<Discipline, kNumDisciplines>& all_disciplines();

// ---------------------------------------------------------------------------
// Journal percentile rank, 0-99, frozen at publication year.

class JournalPercentile {
 public:
  JournalPercentile() = default;
  explicit JournalPercentile(int rank) : rank_(rank) {
    if (rank < 0 || rank > 99)
      throw validation_error("journal percentile rank out of range [0,99]: " +
                             std::to_string(rank));
  }
  int rank() const { return rank_; }
  auto operator<=>(const JournalPercentile&) const = default;

 private:
  int rank_ = 0;
};

// ---------------------------------------------------------------------------
// Records.

struct PublicationRecord {
  std::string pub_id;
  std::vector<std::string> author_ids;  // full byline, never empty
  int year = kFirstYear;
  JournalPercentile percentile;
  std::vector<Discipline> asjc_codes;  // may be empty before cleaning
  bool any_foreign_affiliation = false;

  int author_count() const { return static_cast<int>(author_ids.size()); }
};

enum class Gender : std::uint8_t { female, male, unknown };
enum class InstType : std::uint8_t { idub, rest };

std::string_view gender_code(Gender g);
std::optional<Gender> parse_gender(std::string_view s);
std::string_view inst_type_code(InstType t);
std::optional<InstType> parse_inst_type(std::string_view s);

struct AuthorRecord {
  std::string author_id;
  Gender gender = Gender::unknown;
  double gender_confidence = 0.0;       // 0..1, precomputed upstream
  std::optional<int> first_pub_year;    // missing before cleaning
  InstType inst_type = InstType::rest;
};

// ---------------------------------------------------------------------------
// Reference cell: ranking and classification happen within one of these.

struct CellKey {
  Period period;
  Discipline discipline = Discipline::AGRI;

  auto operator<=>(const CellKey&) const = default;
  std::string label() const {
    return period.label() + "/" + std::string(discipline_code(discipline));
  }
};

}  // namespace stratos
