#include "lithub/datasets.hpp"

#include <json.hpp>

#include "lithub/corpus_store.hpp"
#include "lithub/error.hpp"

namespace lithub {

namespace {

Error at_line(const Error& e, std::size_t line) {
  return Error(e.code(), "line " + std::to_string(line) + ": " + e.what());
}

}  // namespace

std::vector<CitationRecord> read_corpus(const std::filesystem::path& path) {
  std::vector<CitationRecord> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    try {
      out.push_back(parse_record(line));
    } catch (const Error& e) {
      throw at_line(e, n);
    }
  }
  return out;
}

std::vector<LabeledRecord> read_labeled_records(const std::filesystem::path& path, const std::string& key) {
  std::vector<LabeledRecord> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    try {
      LabeledRecord ex{parse_record(line), false};
      auto obj = nlohmann::json::parse(line);
      auto it = obj.find(key);
      if (it == obj.end()) it = obj.find("label");
      if (it == obj.end()) throw Error(Errc::MissingField, key);
      if (it->is_boolean())
        ex.label = it->get<bool>();
      else if (it->is_number_integer() && (it->get<int>() == 0 || it->get<int>() == 1))
        ex.label = it->get<int>() == 1;
      else
        throw Error(Errc::MalformedLine, key + " must be a boolean or 0/1");
      out.push_back(std::move(ex));
    } catch (const Error& e) {
      throw at_line(e, n);
    }
  }
  return out;
}

std::vector<Pmid> read_pmids(const std::filesystem::path& path) {
  std::vector<Pmid> out;
  for (const auto& raw : read_lines(path)) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    try {
      std::size_t used = 0;
      const auto tab = line.find('\t');
      const std::string head(line.substr(0, tab));
      const Pmid pmid = std::stoll(head, &used);
      if (used != head.size() || pmid <= 0) throw std::invalid_argument(head);
      out.push_back(pmid);
    } catch (const std::logic_error&) {
      throw Error(Errc::MalformedLine, "bad pmid line '" + std::string(line) + "'");
    }
  }
  return out;
}

}  // namespace lithub
