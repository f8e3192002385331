#pragma once
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lithub/record.hpp"

namespace lithub {

enum class Facet { Topic, Variant, Vaccine, Drug, Journal };
inline constexpr std::array<Facet, 5> kAllFacets{Facet::Topic, Facet::Variant, Facet::Vaccine, Facet::Drug,
                                                 Facet::Journal};

std::string_view facet_name(Facet f) noexcept;
std::optional<Facet> parse_facet(std::string_view name) noexcept;

enum class LongCovidStatus { None, Member, Provisional };
std::string_view longcovid_status_name(LongCovidStatus s) noexcept;

// Annotation-side facet values for one document.
struct DocumentFacets {
  std::set<std::string> topics;
  std::set<std::string> strains;
  std::set<std::string> vaccines;
  std::set<std::string> drugs;
  LongCovidStatus longcovid = LongCovidStatus::None;

  bool operator==(const DocumentFacets&) const = default;
};

struct IndexedDocument {
  Pmid pmid = 0;
  Date pub_date;
  std::string journal;
  DocumentFacets facets;
  std::map<std::string, double, std::less<>> term_weights;  // title tokens count double
  double length = 0;

  const std::set<std::string>& values(Facet f) const;
};

enum class SortOrder { Relevance, DateDesc };

struct FacetQuery {
  std::string text;
  std::map<Facet, std::set<std::string>> filters;  // OR within a facet, AND across
  std::optional<Date> from;
  std::optional<Date> to;
  std::size_t page = 1;
  std::size_t page_size = 20;
  SortOrder sort = SortOrder::DateDesc;
};

// Free text plus facet:value pairs (quote values containing spaces) and
// from:/to: dates. Throws BadFacet for an unknown facet, BadDate.
FacetQuery parse_query(std::string_view query);

struct SearchHit {
  Pmid pmid = 0;
  double score = 0;
  Date pub_date;
  LongCovidStatus longcovid = LongCovidStatus::None;

  bool operator==(const SearchHit&) const = default;
};

using FacetCounts = std::map<Facet, std::map<std::string, std::size_t>>;

struct SearchResult {
  std::size_t total = 0;
  std::vector<SearchHit> page;
  FacetCounts facet_counts;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Inverted index with facet postings. A value type: update() returns the
// successor so a published snapshot is never mutated.
class SearchIndex {
 public:
  SearchIndex() = default;

  // Throws AnnotationMismatch when an annotation names a pmid not in records.
  static SearchIndex build(std::span<const CitationRecord> records, const std::map<Pmid, DocumentFacets>& annotations);
  // Adds or replaces the given records and drops the removed pmids.
  SearchIndex update(std::span<const CitationRecord> records, const std::map<Pmid, DocumentFacets>& annotations,
                     std::span<const Pmid> removed = {}) const;

  // Throws BadPage (page < 1 or size outside [1, 500]).
  SearchResult search(const FacetQuery& query) const;
  FacetCounts facet_counts(const FacetQuery& query) const;
  // Every hit in the query's sort order, no paging.
  std::vector<SearchHit> all_hits(const FacetQuery& query) const;

  std::size_t size() const { return docs_.size(); }
  const IndexedDocument* document(Pmid pmid) const;
  const std::map<Pmid, IndexedDocument>& documents() const { return docs_; }

 private:
  void add(const CitationRecord& record, const DocumentFacets& facets);
  void erase(Pmid pmid);
  // Documents passing text, dates and all facet filters except `skip`.
  std::vector<Pmid> candidates(const FacetQuery& q, std::optional<Facet> skip) const;
  std::vector<SearchHit> ranked(const FacetQuery& q, const std::vector<Pmid>& hits) const;

  std::map<Pmid, IndexedDocument> docs_;
  std::unordered_map<std::string, std::map<Pmid, double>> postings_;
  std::map<Facet, std::map<std::string, std::set<Pmid>>> facet_postings_;
  double total_length_ = 0;
  Bm25Params bm25_;
};

void check_page(const FacetQuery& q);

}  // namespace lithub
