#include "lithub/citation.hpp"

#include <sstream>

namespace lithub {

namespace {

void sentence(std::ostringstream& out, std::string_view text) {
  text = trim(text);
  if (text.empty()) return;
  out << text;
  if (text.back() != '.' && text.back() != '?' && text.back() != '!') out << '.';
  out << ' ';
}

std::string one_line(std::string_view text) {
  std::string out(trim(text));
  for (char& c : out)
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  return out;
}

}  // namespace

std::optional<CitationStyle> parse_citation_style(std::string_view name) noexcept {
  if (name == "text") return CitationStyle::Text;
  if (name == "ris") return CitationStyle::Ris;
  return std::nullopt;
}

std::string cite_text(const CitationRecord& record) {
  std::ostringstream out;
  std::string authors;
  for (const auto& a : record.authors) {
    if (trim(a).empty()) continue;
    if (!authors.empty()) authors += ", ";
    authors += trim(a);
  }
  sentence(out, authors);
  sentence(out, one_line(record.title));
  sentence(out, one_line(record.journal));
  out << record.pub_date.year << ". PMID: " << record.pmid << '.';
  return out.str();
}

std::string cite_ris(const CitationRecord& record) {
  std::ostringstream out;
  out << "TY  - JOUR\n";
  for (const auto& a : record.authors)
    if (!trim(a).empty()) out << "AU  - " << one_line(a) << '\n';
  out << "TI  - " << one_line(record.title) << '\n';
  out << "JO  - " << one_line(record.journal) << '\n';
  out << "PY  - " << record.pub_date.year << '\n';
  out << "ID  - " << record.pmid << '\n';
  out << "ER  - \n";
  return out.str();
}

std::string cite(const CitationRecord& record, CitationStyle style) {
  return style == CitationStyle::Ris ? cite_ris(record) : cite_text(record);
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace lithub
