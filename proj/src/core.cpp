#include "stratos/core.hpp"

#include <algorithm>

namespace stratos {

Period period_of_year(int year) {
  if (year < kFirstYear || year > kLastYear)
    throw validation_error("year outside analytical window 1992-2021: " +
                           std::to_string(year));
  return Period{(year - kFirstYear) / kPeriodYears};
}

namespace {
constexpr std::array<std::string_view, kNumDisciplines> kCodes = {
    "AGRI", "BIO",  "CHEM",  "CHEMENG", "COMP", "EARTH", "ENER", "ENG",
    "ENVI", "MATER", "MATH", "MED",     "NEURO", "PHARM", "PHYS",
};
}  // namespace

std::string_view discipline_code(Discipline d) {
  return kCodes[static_cast<int>(d)];
}

std::optional<Discipline> parse_discipline(std::string_view code) {
  auto it = std::find(kCodes.begin(), kCodes.end(), code);
  if (it == kCodes.end()) return std::nullopt;
  return static_cast<Discipline>(it - kCodes.begin());
}

const std::array<Discipline, kNumDisciplines>& all_disciplines() {
  static const auto all = [] {
    std::array<Discipline, kNumDisciplines> a{};
    for (int i = 0; i < kNumDisciplines; ++i) a[i] = static_cast<Discipline>(i);
    return a;
  }();
  return all;
}

std::string_view gender_code(Gender g) {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "female") return Gender::female;
  if (s == "male") return Gender::male;
  if (s == "unknown") return Gender::unknown;
  return std::nullopt;
}

std::string_view inst_type_code(InstType t) {
  return t == InstType::idub ? "IDUB" : "Rest";
}

std::optional<InstType> parse_inst_type(std::string_view s) {
  if (s == "IDUB") return InstType::idub;
  if (s == "Rest") return InstType::rest;
  return std::nullopt;
}

}  // namespace stratos
