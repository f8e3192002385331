#pragma once
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lithub/record.hpp"
#include "lithub/topics.hpp"

namespace lithub {

enum class Granularity { Day, Month, Quarter };

std::optional<Granularity> parse_granularity(std::string_view name) noexcept;
// "2020-03-15", "2020-03", "2020-Q1".
std::string period_label(Date date, Granularity granularity);

struct GrowthRow {
  std::string period;
  std::size_t new_count = 0;
  std::size_t cumulative = 0;

  bool operator==(const GrowthRow&) const = default;
};

struct GrowthSeries {
  Granularity granularity = Granularity::Month;
  std::vector<GrowthRow> rows;

  std::string csv() const;
};

// Buckets by date; empty periods between the first and last are emitted.
GrowthSeries growth(std::span<const Date> dates, Granularity granularity);

struct RatioRow {
  std::string period;
  std::size_t collection = 0;
  std::size_t baseline = 0;
  std::optional<double> ratio;  // null when the baseline count is 0
};

// Throws PeriodMismatch when a collection period is missing from the
// baseline or a baseline label does not match the series granularity.
std::vector<RatioRow> share_ratio(const GrowthSeries& collection, const std::map<std::string, std::size_t>& baseline);

struct CooccurrenceMatrix {
  std::vector<std::string> topics;
  std::vector<std::vector<std::size_t>> counts;  // diagonal = per-topic article count
};

CooccurrenceMatrix cooccurrence(std::span<const std::set<std::string>> assigned, const TopicSet& topics);
std::vector<std::size_t> per_article_distribution(std::span<const std::set<std::string>> assigned,
                                                  std::size_t topic_count);

struct TrendingItem {
  Pmid pmid = 0;
  double score = 0;

  bool operator==(const TrendingItem&) const = default;
};

// External items present in the collection, by score descending (pmid
// ascending on ties), capped at top_n.
std::vector<TrendingItem> trending(const std::set<Pmid>& collection, std::span<const TrendingItem> external,
                                   std::size_t top_n = 6);

// period<TAB>count
std::map<std::string, std::size_t> read_baseline(const std::filesystem::path& path);
// pmid<TAB>score
std::vector<TrendingItem> read_trending(const std::filesystem::path& path);

}  // namespace lithub
