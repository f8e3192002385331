#include "lithub/record.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>

#include "lithub/error.hpp"
#include "lithub/hash.hpp"

namespace lithub {

namespace {

using ordered_json = nlohmann::ordered_json;

std::optional<int> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool all_digits(std::string_view s) {
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return !s.empty();
}

std::string string_field(const ordered_json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string())
    throw Error(Errc::MalformedLine, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> list_field(const ordered_json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array())
    throw Error(Errc::MalformedLine, std::string("field '") + key + "' must be a list");
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_string())
      throw Error(Errc::MalformedLine, std::string("field '") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
  text = trim(text);
  if (text.size() != 7 && text.size() != 10) return std::nullopt;
  if (text[4] != '-') return std::nullopt;
  auto ys = text.substr(0, 4), ms = text.substr(5, 2);
  if (!all_digits(ys) || !all_digits(ms)) return std::nullopt;
  Date d{*parse_int(ys), *parse_int(ms), 1};
  if (text.size() == 10) {
    if (text[7] != '-') return std::nullopt;
    auto ds = text.substr(8, 2);
    if (!all_digits(ds)) return std::nullopt;
    d.day = *parse_int(ds);
  }
  if (!d.valid()) return std::nullopt;
  return d;
}

bool Date::valid() const {
  using namespace std::chrono;
  if (month < 1 || month > 12 || day < 1 || day > 31) return false;
  return year_month_day{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                        std::chrono::day{static_cast<unsigned>(day)}}
      .ok();
}

std::int64_t Date::days_since_epoch() const {
  using namespace std::chrono;
  sys_days days = year_month_day{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                 std::chrono::day{static_cast<unsigned>(day)}};
  return days.time_since_epoch().count();
}

Date Date::from_days(std::int64_t days_since_epoch) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{days_since_epoch}}};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
          static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

Timestamp Timestamp::now() {
  using namespace std::chrono;
  return {duration_cast<std::chrono::seconds>(system_clock::now().time_since_epoch()).count()};
}

std::optional<Timestamp> Timestamp::parse(std::string_view iso) {
  // YYYY-MM-DDTHH:MM:SSZ
  if (iso.size() != 20 || iso[10] != 'T' || iso[13] != ':' || iso[16] != ':' || iso[19] != 'Z')
    return std::nullopt;
  auto date = Date::parse(iso.substr(0, 10));
  auto hh = parse_int(iso.substr(11, 2)), mm = parse_int(iso.substr(14, 2)),
       ss = parse_int(iso.substr(17, 2));
  if (!date || !hh || !mm || !ss || *hh > 23 || *mm > 59 || *ss > 60) return std::nullopt;
  return Timestamp{date->days_since_epoch() * 86400 + *hh * 3600 + *mm * 60 + *ss};
}

Date Timestamp::date() const {
  auto days = seconds >= 0 ? seconds / 86400 : -((-seconds + 86399) / 86400);
  return Date::from_days(days);
}

std::string Timestamp::iso() const {
  auto d = date();
  auto rem = seconds - d.days_since_epoch() * 86400;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", d.iso().c_str(), static_cast<int>(rem / 3600),
                static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
  return buf;
}

std::string_view trim(std::string_view text) noexcept {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto b = text.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = text.find_last_not_of(ws);
  return text.substr(b, e - b + 1);
}

CitationRecord parse_record(std::string_view line) {
  ordered_json obj;
  try {
    obj = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedLine, std::string("not valid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw Error(Errc::MalformedLine, "record must be a JSON object");

  CitationRecord r;
  auto pmid = obj.find("pmid");
  if (pmid == obj.end() || pmid->is_null()) throw Error(Errc::MissingField, "pmid");
  if (!pmid->is_number_integer() || pmid->get<std::int64_t>() <= 0)
    throw Error(Errc::MalformedLine, "pmid must be a positive integer");
  r.pmid = pmid->get<std::int64_t>();

  r.title = string_field(obj, "title");
  if (trim(r.title).empty()) throw Error(Errc::MissingField, "title");

  auto date = string_field(obj, "pub_date");
  if (trim(date).empty()) throw Error(Errc::MissingField, "pub_date");
  auto parsed = Date::parse(date);
  if (!parsed) throw Error(Errc::BadDate, "unparseable pub_date '" + date + "'");
  r.pub_date = *parsed;

  r.abstract = string_field(obj, "abstract");
  r.journal = string_field(obj, "journal");
  r.authors = list_field(obj, "authors");
  r.keywords = list_field(obj, "keywords");
  r.mesh_terms = list_field(obj, "mesh_terms");
  r.funding_text = string_field(obj, "funding_text");
  r.country = string_field(obj, "country");
  auto ingested = string_field(obj, "ingested_at");
  if (!ingested.empty()) {
    auto ts = Timestamp::parse(ingested);
    if (!ts) throw Error(Errc::BadDate, "unparseable ingested_at '" + ingested + "'");
    r.ingested_at = *ts;
  }
  return r;
}

std::string serialize_record(const CitationRecord& r) {
  ordered_json obj;
  obj["pmid"] = r.pmid;
  obj["title"] = r.title;
  obj["abstract"] = r.abstract;
  obj["journal"] = r.journal;
  obj["pub_date"] = r.pub_date.iso();
  obj["authors"] = r.authors;
  obj["keywords"] = r.keywords;
  obj["mesh_terms"] = r.mesh_terms;
  obj["funding_text"] = r.funding_text;
  obj["country"] = r.country;
  if (r.ingested_at.seconds != 0) obj["ingested_at"] = r.ingested_at.iso();
  return obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::uint64_t content_hash(const CitationRecord& r) {
  return Fnv1a{}.add(r.title).sep().add(r.abstract).sep().add(r.journal).sep().add(r.pub_date.iso()).value();
}

std::string document_text(const CitationRecord& r) {
  std::string text = r.title;
  text += '\n';
  text += r.abstract;
  return text;
}

}  // namespace lithub
