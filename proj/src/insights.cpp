#include "lithub/insights.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "lithub/error.hpp"

namespace lithub {

namespace {

// Ordinal of the bucket containing a date, so gaps can be filled.
std::int64_t bucket_of(Date d, Granularity g) {
  switch (g) {
    case Granularity::Day: return d.days_since_epoch();
    case Granularity::Month: return static_cast<std::int64_t>(d.year) * 12 + (d.month - 1);
    case Granularity::Quarter: return static_cast<std::int64_t>(d.year) * 4 + (d.month - 1) / 3;
  }
  return 0;
}

Date bucket_start(std::int64_t bucket, Granularity g) {
  switch (g) {
    case Granularity::Day: return Date::from_days(bucket);
    case Granularity::Month: return Date{static_cast<int>(bucket / 12), static_cast<int>(bucket % 12) + 1, 1};
    case Granularity::Quarter: return Date{static_cast<int>(bucket / 4), static_cast<int>(bucket % 4) * 3 + 1, 1};
  }
  return {};
}

bool label_matches(const std::string& label, Granularity g) {
  auto digits = [&](std::size_t from, std::size_t n) {
    for (std::size_t i = from; i < from + n; ++i)
      if (i >= label.size() || label[i] < '0' || label[i] > '9') return false;
    return true;
  };
  switch (g) {
    case Granularity::Day: return label.size() == 10 && Date::parse(label).has_value();
    case Granularity::Month: return label.size() == 7 && digits(0, 4) && label[4] == '-' && digits(5, 2);
    case Granularity::Quarter:
      return label.size() == 7 && digits(0, 4) && label.substr(4, 2) == "-Q" && label[6] >= '1' && label[6] <= '4';
  }
  return false;
}

}  // namespace

std::optional<Granularity> parse_granularity(std::string_view name) noexcept {
  if (name == "day") return Granularity::Day;
  if (name == "month") return Granularity::Month;
  if (name == "quarter") return Granularity::Quarter;
  return std::nullopt;
}

std::string period_label(Date d, Granularity g) {
  switch (g) {
    case Granularity::Day: return d.iso();
    case Granularity::Month: return d.iso().substr(0, 7);
    case Granularity::Quarter: return std::to_string(d.year) + "-Q" + std::to_string((d.month - 1) / 3 + 1);
  }
  return {};
}

std::string GrowthSeries::csv() const {
  std::ostringstream os;
  os << "period,new,cumulative\n";
  for (const auto& r : rows) os << r.period << ',' << r.new_count << ',' << r.cumulative << '\n';
  return os.str();
}

GrowthSeries growth(std::span<const Date> dates, Granularity g) {
  GrowthSeries s;
  s.granularity = g;
  if (dates.empty()) return s;
  std::map<std::int64_t, std::size_t> buckets;
  for (const auto& d : dates) ++buckets[bucket_of(d, g)];
  std::size_t cumulative = 0;
  for (auto b = buckets.begin()->first; b <= buckets.rbegin()->first; ++b) {
    auto it = buckets.find(b);
    const std::size_t n = it == buckets.end() ? 0 : it->second;
    cumulative += n;
    s.rows.push_back(GrowthRow{period_label(bucket_start(b, g), g), n, cumulative});
  }
  return s;
}

std::vector<RatioRow> share_ratio(const GrowthSeries& collection, const std::map<std::string, std::size_t>& baseline) {
  for (const auto& [label, count] : baseline)
    if (!label_matches(label, collection.granularity))
      throw Error(Errc::PeriodMismatch, "baseline period '" + label + "' does not match the series granularity");
  std::map<std::string, std::size_t> coll;
  for (const auto& r : collection.rows) {
    if (!baseline.contains(r.period))
      throw Error(Errc::PeriodMismatch, "baseline has no count for period " + r.period);
    coll[r.period] = r.new_count;
  }
  std::vector<RatioRow> out;
  for (const auto& [period, base] : baseline) {
    RatioRow row;
    row.period = period;
    row.baseline = base;
    auto it = coll.find(period);
    row.collection = it == coll.end() ? 0 : it->second;
    if (base != 0) row.ratio = static_cast<double>(row.collection) / static_cast<double>(base);
    out.push_back(std::move(row));
  }
  return out;
}

CooccurrenceMatrix cooccurrence(std::span<const std::set<std::string>> assigned, const TopicSet& topics) {
  const std::size_t K = topics.size();
  CooccurrenceMatrix m;
  m.topics = topics.names();
  m.counts.assign(K, std::vector<std::size_t>(K, 0));
  for (const auto& set : assigned) {
    std::vector<std::size_t> idx;
    for (const auto& name : set)
      if (auto k = topics.index_of(name)) idx.push_back(*k);
    for (auto i : idx)
      for (auto j : idx) ++m.counts[i][j];
  }
  return m;
}

std::vector<std::size_t> per_article_distribution(std::span<const std::set<std::string>> assigned,
                                                  std::size_t topic_count) {
  std::vector<std::size_t> bins(topic_count + 1, 0);
  for (const auto& s : assigned) ++bins[std::min(s.size(), topic_count)];
  return bins;
}

std::vector<TrendingItem> trending(const std::set<Pmid>& collection, std::span<const TrendingItem> external,
                                   std::size_t top_n) {
  std::map<Pmid, double> best;
  for (const auto& item : external) {
    if (!collection.contains(item.pmid)) continue;
    auto [it, inserted] = best.emplace(item.pmid, item.score);
    if (!inserted) it->second = std::max(it->second, item.score);
  }
  std::vector<TrendingItem> out;
  for (const auto& [pmid, score] : best) out.push_back({pmid, score});
  std::sort(out.begin(), out.end(), [](const TrendingItem& a, const TrendingItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.pmid < b.pmid;
  });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

std::map<std::string, std::size_t> read_baseline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadInput, "cannot read " + path.string());
  std::map<std::string, std::size_t> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(Errc::BadInput, "baseline line without tab: " + line);
    out[std::string(trim(line.substr(0, tab)))] = std::stoull(line.substr(tab + 1));
  }
  return out;
}

std::vector<TrendingItem> read_trending(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadInput, "cannot read " + path.string());
  std::vector<TrendingItem> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(Errc::BadInput, "trending line without tab: " + line);
    out.push_back({std::stoll(line.substr(0, tab)), std::stod(line.substr(tab + 1))});
  }
  return out;
}

}  // namespace lithub
