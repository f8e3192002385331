#include "lithub/search_index.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "lithub/error.hpp"
#include "lithub/text_core.hpp"

namespace lithub {

std::string_view facet_name(Facet f) noexcept {
  switch (f) {
    case Facet::Topic: return "topic";
    case Facet::Variant: return "variant";
    case Facet::Vaccine: return "vaccine";
    case Facet::Drug: return "drug";
    case Facet::Journal: return "journal";
  }
  return "unknown";
}

std::optional<Facet> parse_facet(std::string_view name) noexcept {
  for (auto f : kAllFacets)
    if (facet_name(f) == name) return f;
  return std::nullopt;
}

std::string_view longcovid_status_name(LongCovidStatus s) noexcept {
  switch (s) {
    case LongCovidStatus::None: return "none";
    case LongCovidStatus::Member: return "member";
    case LongCovidStatus::Provisional: return "provisional";
  }
  return "none";
}

const std::set<std::string>& IndexedDocument::values(Facet f) const {
  static const std::set<std::string> empty;
  switch (f) {
    case Facet::Topic: return facets.topics;
    case Facet::Variant: return facets.strains;
    case Facet::Vaccine: return facets.vaccines;
    case Facet::Drug: return facets.drugs;
    case Facet::Journal: return empty;
  }
  return empty;
}

FacetQuery parse_query(std::string_view query) {
  FacetQuery q;
  std::string text;
  std::size_t i = 0;
  while (i < query.size()) {
    while (i < query.size() && query[i] == ' ') ++i;
    if (i >= query.size()) break;
    // Read one whitespace-delimited chunk, honouring double quotes.
    std::string chunk;
    bool quoted = false;
    while (i < query.size() && (quoted || query[i] != ' ')) {
      if (query[i] == '"') quoted = !quoted;
      else chunk += query[i];
      ++i;
    }
    auto colon = chunk.find(':');
    bool is_pair = colon != std::string::npos && colon > 0 &&
                   std::all_of(chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(colon),
                               [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); });
    if (!is_pair) {
      if (!text.empty()) text += ' ';
      text += chunk;
      continue;
    }
    auto key = chunk.substr(0, colon), value = chunk.substr(colon + 1);
    if (key == "from" || key == "to") {
      auto d = Date::parse(value);
      if (!d) throw Error(Errc::BadDate, "bad " + key + " date '" + value + "'");
      (key == "from" ? q.from : q.to) = *d;
      continue;
    }
    auto facet = parse_facet(key);
    if (!facet) throw Error(Errc::BadFacet, key);
    q.filters[*facet].insert(value);
  }
  q.text = std::move(text);
  return q;
}

void check_page(const FacetQuery& q) {
  if (q.page < 1) throw Error(Errc::BadPage, "page must be >= 1");
  if (q.page_size < 1 || q.page_size > 500) throw Error(Errc::BadPage, "page size must lie in [1, 500]");
}

SearchIndex SearchIndex::build(std::span<const CitationRecord> records,
                               const std::map<Pmid, DocumentFacets>& annotations) {
  return SearchIndex{}.update(records, annotations);
}

SearchIndex SearchIndex::update(std::span<const CitationRecord> records,
                                const std::map<Pmid, DocumentFacets>& annotations,
                                std::span<const Pmid> removed) const {
  std::set<Pmid> incoming;
  for (const auto& r : records) incoming.insert(r.pmid);
  for (const auto& [pmid, facets] : annotations)
    if (!incoming.contains(pmid))
      throw Error(Errc::AnnotationMismatch, "annotation for pmid " + std::to_string(pmid) + " has no record");
  SearchIndex next = *this;
  for (auto pmid : removed) next.erase(pmid);
  static const DocumentFacets no_facets;
  for (const auto& r : records) {
    next.erase(r.pmid);
    auto it = annotations.find(r.pmid);
    next.add(r, it == annotations.end() ? no_facets : it->second);
  }
  return next;
}

void SearchIndex::add(const CitationRecord& r, const DocumentFacets& facets) {
  IndexedDocument doc;
  doc.pmid = r.pmid;
  doc.pub_date = r.pub_date;
  doc.journal = r.journal;
  doc.facets = facets;
  for (const auto& t : tokenize(r.title)) doc.term_weights[t.surface] += 2.0;
  for (const auto& t : tokenize(r.abstract)) doc.term_weights[t.surface] += 1.0;
  for (const auto& [term, w] : doc.term_weights) {
    postings_[term][r.pmid] = w;
    doc.length += w;
  }
  total_length_ += doc.length;
  for (auto f : kAllFacets) {
    if (f == Facet::Journal) {
      if (!doc.journal.empty()) facet_postings_[f][doc.journal].insert(r.pmid);
      continue;
    }
    for (const auto& v : doc.values(f)) facet_postings_[f][v].insert(r.pmid);
  }
  docs_.emplace(r.pmid, std::move(doc));
}

void SearchIndex::erase(Pmid pmid) {
  auto it = docs_.find(pmid);
  if (it == docs_.end()) return;
  const auto& doc = it->second;
  for (const auto& [term, w] : doc.term_weights) {
    auto p = postings_.find(term);
    p->second.erase(pmid);
    if (p->second.empty()) postings_.erase(p);
  }
  total_length_ -= doc.length;
  auto drop = [&](Facet f, const std::string& v) {
    auto& values = facet_postings_[f];
    auto vit = values.find(v);
    if (vit == values.end()) return;
    vit->second.erase(pmid);
    if (vit->second.empty()) values.erase(vit);
  };
  for (auto f : kAllFacets) {
    if (f == Facet::Journal) {
      drop(f, doc.journal);
      continue;
    }
    for (const auto& v : doc.values(f)) drop(f, v);
  }
  docs_.erase(it);
}

const IndexedDocument* SearchIndex::document(Pmid pmid) const {
  auto it = docs_.find(pmid);
  return it == docs_.end() ? nullptr : &it->second;
}

namespace {

std::vector<std::string> query_terms(std::string_view text) {
  std::set<std::string> unique;
  for (auto& t : tokenize(text)) unique.insert(std::move(t.surface));
  return {unique.begin(), unique.end()};
}

void intersect_into(std::optional<std::vector<Pmid>>& acc, std::vector<Pmid> next) {
  if (!acc) {
    acc = std::move(next);
    return;
  }
  std::vector<Pmid> out;
  std::set_intersection(acc->begin(), acc->end(), next.begin(), next.end(), std::back_inserter(out));
  acc = std::move(out);
}

}  // namespace

std::vector<Pmid> SearchIndex::candidates(const FacetQuery& q, std::optional<Facet> skip) const {
  std::optional<std::vector<Pmid>> acc;
  for (const auto& term : query_terms(q.text)) {
    auto p = postings_.find(term);
    std::vector<Pmid> ids;
    if (p != postings_.end())
      for (const auto& [pmid, w] : p->second) ids.push_back(pmid);
    intersect_into(acc, std::move(ids));
  }
  for (const auto& [facet, values] : q.filters) {
    if (skip && *skip == facet) continue;
    std::set<Pmid> any;
    auto fp = facet_postings_.find(facet);
    if (fp != facet_postings_.end()) {
      for (const auto& v : values) {
        auto vit = fp->second.find(v);
        if (vit != fp->second.end()) any.insert(vit->second.begin(), vit->second.end());
      }
    }
    intersect_into(acc, {any.begin(), any.end()});
  }
  std::vector<Pmid> out;
  auto in_range = [&](Pmid pmid) {
    const auto& d = docs_.at(pmid).pub_date;
    return (!q.from || d >= *q.from) && (!q.to || d <= *q.to);
  };
  if (acc) {
    for (auto pmid : *acc)
      if (in_range(pmid)) out.push_back(pmid);
  } else {
    for (const auto& [pmid, doc] : docs_)
      if (in_range(pmid)) out.push_back(pmid);
  }
  return out;
}

std::vector<SearchHit> SearchIndex::ranked(const FacetQuery& q, const std::vector<Pmid>& hits) const {
  std::vector<SearchHit> out;
  out.reserve(hits.size());
  const auto terms = query_terms(q.text);
  const double n = static_cast<double>(docs_.size());
  const double avg_len = docs_.empty() ? 1.0 : std::max(total_length_ / n, 1e-9);
  std::vector<double> idf;
  for (const auto& term : terms) {
    auto p = postings_.find(term);
    const double df = p == postings_.end() ? 0.0 : static_cast<double>(p->second.size());
    idf.push_back(std::log(1.0 + (n - df + 0.5) / (df + 0.5)));
  }
  for (auto pmid : hits) {
    const auto& doc = docs_.at(pmid);
    double score = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      auto w = doc.term_weights.find(terms[i]);
      if (w == doc.term_weights.end()) continue;
      const double tf = w->second;
      score += idf[i] * tf * (bm25_.k1 + 1) / (tf + bm25_.k1 * (1 - bm25_.b + bm25_.b * doc.length / avg_len));
    }
    out.push_back(SearchHit{pmid, score, doc.pub_date, doc.facets.longcovid});
  }
  auto by_date = [](const SearchHit& a, const SearchHit& b) {
    if (a.pub_date != b.pub_date) return a.pub_date > b.pub_date;
    return a.pmid > b.pmid;
  };
  if (q.sort == SortOrder::Relevance) {
    std::sort(out.begin(), out.end(), [&](const SearchHit& a, const SearchHit& b) {
      if (a.score != b.score) return a.score > b.score;
      return by_date(a, b);
    });
  } else {
    std::sort(out.begin(), out.end(), by_date);
  }
  return out;
}

std::vector<SearchHit> SearchIndex::all_hits(const FacetQuery& q) const { return ranked(q, candidates(q, std::nullopt)); }

FacetCounts SearchIndex::facet_counts(const FacetQuery& q) const {
  check_page(q);
  FacetCounts counts;
  for (auto f : kAllFacets) {
    auto& slot = counts[f];
    for (auto pmid : candidates(q, f)) {
      const auto& doc = docs_.at(pmid);
      if (f == Facet::Journal) {
        if (!doc.journal.empty()) ++slot[doc.journal];
        continue;
      }
      for (const auto& v : doc.values(f)) ++slot[v];
    }
  }
  return counts;
}

SearchResult SearchIndex::search(const FacetQuery& q) const {
  check_page(q);
  SearchResult r;
  auto hits = all_hits(q);
  r.total = hits.size();
  const std::size_t begin = (q.page - 1) * q.page_size;
  for (std::size_t i = begin; i < hits.size() && r.page.size() < q.page_size; ++i) r.page.push_back(hits[i]);
  r.facet_counts = facet_counts(q);
  return r;
}

}  // namespace lithub
