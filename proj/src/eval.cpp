#include "lithub/eval.hpp"

#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "lithub/error.hpp"

namespace lithub {

Prf Prf::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  Prf r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.f1 = r.precision + r.recall == 0 ? 0.0 : 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

std::string Prf::summary_line() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "tp=%zu fp=%zu fn=%zu precision=%.6f recall=%.6f f1=%.6f", tp, fp, fn, precision,
                recall, f1);
  return buf;
}

Prf macro_average(std::span<const Prf> groups) {
  Prf out;
  if (groups.empty()) return out;
  out.precision = out.recall = out.f1 = 0;
  for (const auto& g : groups) {
    out.tp += g.tp;
    out.fp += g.fp;
    out.fn += g.fn;
    out.precision += g.precision;
    out.recall += g.recall;
    out.f1 += g.f1;
  }
  const double n = static_cast<double>(groups.size());
  out.precision /= n;
  out.recall /= n;
  out.f1 /= n;
  return out;
}

std::set<MentionKey> mention_keys(std::span<const EntityMention> mentions) {
  std::set<MentionKey> keys;
  for (const auto& m : mentions) keys.insert(MentionKey::of(m));
  return keys;
}

MentionScore score_mentions(std::span<const EntityMention> gold, std::span<const EntityMention> pred) {
  MentionScore s;
  auto g = mention_keys(gold), p = mention_keys(pred);
  s.micro = prf(g, p);
  std::map<EntityType, std::pair<std::set<MentionKey>, std::set<MentionKey>>> groups;
  for (const auto& k : g) groups[k.type].first.insert(k);
  for (const auto& k : p) groups[k.type].second.insert(k);
  std::vector<Prf> per;
  for (const auto& [type, gp] : groups) {
    s.by_type[type] = prf(gp.first, gp.second);
    per.push_back(s.by_type[type]);
  }
  s.macro = macro_average(per);
  return s;
}

std::string IaaReport::summary_line() const {
  char buf[200];
  std::snprintf(buf, sizeof buf, "matches=%zu a=%zu b=%zu union=%zu iaa_union=%.6f iaa_annotator_total=%.6f iaa_first=%.6f",
                matches, count_a, count_b, union_size, by_union, by_annotator_total, by_first);
  return buf;
}

IaaReport iaa_exact(std::span<const EntityMention> a, std::span<const EntityMention> b) {
  auto ka = mention_keys(a), kb = mention_keys(b);
  IaaReport r;
  r.count_a = ka.size();
  r.count_b = kb.size();
  for (const auto& k : ka)
    if (kb.contains(k)) ++r.matches;
  r.union_size = r.count_a + r.count_b - r.matches;
  auto ratio = [](double num, double den) { return den == 0 ? 1.0 : num / den; };
  r.by_union = ratio(r.matches, r.union_size);
  r.by_annotator_total = ratio(2.0 * r.matches, static_cast<double>(r.count_a + r.count_b));
  r.by_first = ratio(r.matches, r.count_a);
  return r;
}

Split split(std::span<const Pmid> ids, std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
  if (n_train + n_test != ids.size())
    throw Error(Errc::SizeMismatch, "train + test sizes (" + std::to_string(n_train + n_test) +
                                        ") must equal the id count (" + std::to_string(ids.size()) + ")");
  std::vector<Pmid> order(ids.begin(), ids.end());
  std::sort(order.begin(), order.end());
  std::mt19937_64 rng(seed);
  // Bounded draws by rejection so results do not depend on the standard
  // library's distribution implementation.
  auto below = [&](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = rng(); while (x >= limit);
    return x % bound;
  };
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[below(i)]);
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::string CoverageReport::summary_line() const {
  char buf[200];
  std::snprintf(buf, sizeof buf, "a=%zu b=%zu intersection=%zu b_covered_by_a=%.6f a_covered_by_b=%.6f", size_a,
                size_b, intersection, b_covered_by_a, a_covered_by_b);
  return buf;
}

CoverageReport compare_collections(const std::set<Pmid>& a, const std::set<Pmid>& b) {
  CoverageReport r;
  r.size_a = a.size();
  r.size_b = b.size();
  for (auto id : a)
    if (b.contains(id)) ++r.intersection;
  r.b_covered_by_a = b.empty() ? 1.0 : static_cast<double>(r.intersection) / static_cast<double>(b.size());
  r.a_covered_by_b = a.empty() ? 1.0 : static_cast<double>(r.intersection) / static_cast<double>(a.size());
  return r;
}

}  // namespace lithub
