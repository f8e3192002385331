#pragma once
#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lithub/entities.hpp"
#include "lithub/record.hpp"

namespace lithub {

// Empty denominators give precision/recall 1.0 so silence on negative
// documents is not penalized; f1 is 0 when precision + recall is 0.
struct Prf {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;

  static Prf from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
  std::string summary_line() const;
};

template <class T, class Cmp>
Prf prf(const std::set<T, Cmp>& gold, const std::set<T, Cmp>& pred) {
  std::size_t tp = 0;
  for (const auto& item : pred)
    if (gold.contains(item)) ++tp;
  return Prf::from_counts(tp, pred.size() - tp, gold.size() - tp);
}

// Unweighted mean of per-group precision, recall and f1; counts are summed.
Prf macro_average(std::span<const Prf> groups);

// Identity of an annotation for agreement and scoring: span, type, concept.
struct MentionKey {
  Pmid pmid = 0;
  TextField field = TextField::Title;
  std::size_t start = 0;
  std::size_t end = 0;
  EntityType type = EntityType::Strain;
  std::string concept_id;

  static MentionKey of(const EntityMention& m) { return {m.pmid, m.field, m.start, m.end, m.type, m.concept_id}; }
  auto operator<=>(const MentionKey&) const = default;
};

std::set<MentionKey> mention_keys(std::span<const EntityMention> mentions);

// Micro PRF over mention triples; with by_type also one PRF per entity type.
struct MentionScore {
  Prf micro;
  Prf macro;
  std::map<EntityType, Prf> by_type;
};
MentionScore score_mentions(std::span<const EntityMention> gold, std::span<const EntityMention> pred);

struct IaaReport {
  std::size_t matches = 0;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  std::size_t union_size = 0;
  double by_union = 1.0;          // matches / |A u B|
  double by_annotator_total = 1.0;  // matches / mean(|A|, |B|)
  double by_first = 1.0;          // matches / |A|, A treated as gold

  std::string summary_line() const;
};

IaaReport iaa_exact(std::span<const EntityMention> a, std::span<const EntityMention> b);

struct Split {
  std::vector<Pmid> train;
  std::vector<Pmid> test;
};

// Deterministic seeded shuffle (Fisher-Yates over a 64-bit generator) of the
// sorted ids. Throws SizeMismatch unless n_train + n_test == ids.size().
Split split(std::span<const Pmid> ids, std::size_t n_train, std::size_t n_test, std::uint64_t seed);

struct CoverageReport {
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  std::size_t intersection = 0;
  double b_covered_by_a = 0;
  double a_covered_by_b = 0;

  std::string summary_line() const;
};

CoverageReport compare_collections(const std::set<Pmid>& a, const std::set<Pmid>& b);

}  // namespace lithub
