#pragma once
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lithub {

using Pmid = std::int64_t;

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  // Accepts YYYY-MM-DD or YYYY-MM (day normalized to 01).
  static std::optional<Date> parse(std::string_view text);
  static Date from_days(std::int64_t days_since_epoch);

  std::int64_t days_since_epoch() const;
  std::string iso() const;
  bool valid() const;

  auto operator<=>(const Date&) const = default;
};

// Seconds since the Unix epoch, UTC.
struct Timestamp {
  std::int64_t seconds = 0;

  static Timestamp now();
  static std::optional<Timestamp> parse(std::string_view iso);
  Date date() const;
  std::string iso() const;

  auto operator<=>(const Timestamp&) const = default;
};

struct CitationRecord {
  Pmid pmid = 0;
  std::string title;
  std::string abstract;
  std::string journal;
  Date pub_date;
  std::vector<std::string> authors;
  std::vector<std::string> keywords;
  std::vector<std::string> mesh_terms;
  std::string funding_text;
  std::string country;
  Timestamp ingested_at;

  bool operator==(const CitationRecord&) const = default;
};

// Parses one corpus line. Throws Error{MalformedLine|MissingField|BadDate}.
CitationRecord parse_record(std::string_view line);

// Inverse of parse_record; keys are emitted in a fixed order.
std::string serialize_record(const CitationRecord& record);

// Hash over (title, abstract, journal, pub_date); equal hashes under one
// pmid mean a re-delivered duplicate.
std::uint64_t content_hash(const CitationRecord& record);

// The text every classifier, recognizer and the index consume.
std::string document_text(const CitationRecord& record);

std::string_view trim(std::string_view text) noexcept;

}  // namespace lithub
