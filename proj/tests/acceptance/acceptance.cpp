// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// non-zero when any criterion fails.
#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <thread>

#include "fixtures.hpp"
#include "lithub/citation.hpp"
#include "lithub/corpus_store.hpp"
#include "lithub/entities.hpp"
#include "lithub/error.hpp"
#include "lithub/eval.hpp"
#include "lithub/hub_service.hpp"
#include "lithub/insights.hpp"
#include "lithub/logistic.hpp"
#include "lithub/longcovid.hpp"
#include "lithub/pipeline.hpp"
#include "lithub/search_index.hpp"
#include "lithub/text_core.hpp"
#include "lithub/topics.hpp"
#include "lithub/triage.hpp"

using namespace lithub;
using namespace lithub::testing;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED " + what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

int failures = 0;

void criterion(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  Stopwatch sw;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.note(std::string("exception: ") + e.what());
  }
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2fs", sw.seconds());
  std::printf("%s %s (%s): %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double f1_of(std::size_t tp, std::size_t fp, std::size_t fn) {
  const double p = tp + fp == 0 ? 1.0 : double(tp) / double(tp + fp);
  const double r = tp + fn == 0 ? 1.0 : double(tp) / double(tp + fn);
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

// Relative error with a floor so near-zero gradients compare absolutely.
double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

// ---------------------------------------------------------------------------

void metric_oracle(Outcome& o) {
  std::set<int> gold{1, 2, 3, 4, 5}, pred{1, 2, 3, 9};
  auto r = prf(gold, pred);
  o.require(r.tp == 3 && r.fp == 1 && r.fn == 2, "fixture counts");
  o.require(std::abs(r.precision - 0.75) < 1e-9, "precision 0.75");
  o.require(std::abs(r.recall - 0.6) < 1e-9, "recall 0.6");
  o.require(std::abs(r.f1 - 2.0 / 3.0) < 1e-9, "f1 0.666667");
  o.note("P=" + fmt(r.precision, 6) + " R=" + fmt(r.recall, 6) + " F1=" + fmt(r.f1, 6));

  std::mt19937_64 gen(7);
  int mismatches = 0;
  for (int c = 0; c < 200; ++c) {
    std::uniform_int_distribution<int> size(0, 30), item(0, 40);
    std::vector<int> g, p;
    for (int i = size(gen); i > 0; --i) g.push_back(item(gen));
    for (int i = size(gen); i > 0; --i) p.push_back(item(gen));
    std::set<int> gs(g.begin(), g.end()), ps(p.begin(), p.end());
    // Brute-force recount over the item universe.
    std::size_t tp = 0, fp = 0, fn = 0;
    for (int x = 0; x <= 40; ++x) {
      const bool in_g = std::find(g.begin(), g.end(), x) != g.end();
      const bool in_p = std::find(p.begin(), p.end(), x) != p.end();
      tp += in_g && in_p;
      fp += !in_g && in_p;
      fn += in_g && !in_p;
    }
    auto got = prf(gs, ps);
    if (got.tp != tp || got.fp != fp || got.fn != fn || got.f1 != f1_of(tp, fp, fn)) ++mismatches;
  }
  o.require(mismatches == 0, "randomized recount (" + std::to_string(mismatches) + " mismatches)");
  o.note("200 randomized cases, " + std::to_string(mismatches) + " mismatches");
}

void iaa(Outcome& o) {
  auto a = read_mentions(fixture("iaa_a.tsv"));
  auto b = read_mentions(fixture("iaa_b.tsv"));
  auto r = iaa_exact(a, b);
  o.require(a.size() == 10 && b.size() == 10 && r.matches == 8, "10 vs 10 with 8 exact matches");
  o.require(std::abs(r.by_union - 8.0 / 12.0) < 1e-12, "union denominator 8/12");
  o.require(std::abs(r.by_annotator_total - 0.8) < 1e-12, "per-annotator denominator 0.8");
  o.note(r.summary_line());
}

void split_criterion(Outcome& o) {
  std::vector<Pmid> ids;
  for (Pmid i = 1; i <= 500; ++i) ids.push_back(i);
  auto s1 = split(ids, 400, 100, 42);
  auto s2 = split(ids, 400, 100, 42);
  std::set<Pmid> train(s1.train.begin(), s1.train.end()), test(s1.test.begin(), s1.test.end());
  std::set<Pmid> all = train;
  all.insert(test.begin(), test.end());
  bool disjoint = std::none_of(test.begin(), test.end(), [&](Pmid p) { return train.contains(p); });
  o.require(s1.train.size() == 400 && s1.test.size() == 100, "sizes 400/100");
  o.require(disjoint, "disjoint");
  o.require(all.size() == 500, "exhaustive");
  o.require(s1.train == s2.train && s1.test == s2.test, "identical across runs");
  auto s3 = split(ids, 400, 100, 43);
  o.note("seed 42 reproducible; seed 43 differs: " + std::string(s3.train != s1.train ? "yes" : "no"));
}

void ner(Outcome& o) {
  Stopwatch sw;
  auto lexicon = Lexicon::load(bundled("lexicon.tsv"));
  auto docs = read_corpus(fixture("ner_docs.jsonl"));
  std::vector<EntityMention> pred;
  for (const auto& d : docs) {
    auto m = annotate_entities(d, lexicon);
    pred.insert(pred.end(), m.begin(), m.end());
  }
  auto gold = read_mentions(fixture("ner_gold.tsv"));
  auto score = score_mentions(gold, pred);
  const double secs = sw.seconds();
  o.require(score.micro.f1 >= 0.95, "micro-F1 >= 0.95");
  o.note("micro " + score.micro.summary_line());

  auto strains = [&](const std::string& text) {
    std::size_t n = 0;
    for (const auto& m : recognize(text, lexicon))
      if (m.entry->type == EntityType::Strain) ++n;
    return n;
  };
  o.require(strains("We fit a beta distribution to the data") == 0, "beta distribution gated");
  o.require(strains("the Beta variant spread") == 1, "Beta variant recognized");
  o.require(secs < 5.0, "runtime < 5 s");
  o.note("gating ok, runtime " + fmt(secs, 3) + "s");
}

void gradients(Outcome& o) {
  auto examples = read_labeled_records(fixture("triage_train.jsonl"));
  auto fit = train_triage(examples, TrainHyper{0.05, 20, 1e-3});
  std::vector<int> y;
  for (const auto& e : examples) y.push_back(e.label ? 1 : 0);
  const auto& X = fit.features;
  auto w = fit.model.weights;
  const double b = fit.model.bias;
  const double l2 = 1e-3, h = 1e-5;
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<std::size_t> coord(0, w.size() - 1);
  auto analytic = log_loss_gradient(X, y, w, b, l2);
  double worst = 0;
  for (int c = 0; c < 5; ++c) {
    const auto j = coord(gen);
    auto wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    const double fd = (log_loss_gradient(X, y, wp, b, l2).loss - log_loss_gradient(X, y, wm, b, l2).loss) / (2 * h);
    worst = std::max(worst, rel_err(fd, analytic.grad_weights[j]));
  }
  o.require(worst < 1e-4, "triage gradient");
  o.note("triage max rel err " + fmt(worst, 8));

  auto records = read_corpus(fixture("corpus.jsonl"));
  records.resize(200);
  auto labels = read_topic_labels(fixture("corpus_topics.tsv"));
  auto topics = TopicSet::defaults();
  auto tfit = train_topics(topic_examples(records, labels), topics, TrainHyper{0.05, 20, 1e-3});
  const auto& m = tfit.model;
  auto tg = multihead_loss_gradient(tfit.features, tfit.labels, m.weights, m.biases, l2);
  std::uniform_int_distribution<std::size_t> head(0, topics.size() - 1), tcoord(0, m.vocab.size() - 1);
  double tworst = 0;
  for (int c = 0; c < 5; ++c) {
    const auto k = head(gen);
    const auto j = tcoord(gen);
    auto wp = m.weights, wm = m.weights;
    wp[k][j] += h;
    wm[k][j] -= h;
    const double fd = (multihead_loss_gradient(tfit.features, tfit.labels, wp, m.biases, l2).loss -
                       multihead_loss_gradient(tfit.features, tfit.labels, wm, m.biases, l2).loss) /
                      (2 * h);
    tworst = std::max(tworst, rel_err(fd, tg.grad_weights[k][j]));
  }
  o.require(tworst < 1e-4, "topic gradient");
  o.note("topics max rel err " + fmt(tworst, 8));
}

void triage_e2e(Outcome& o) {
  auto train = read_labeled_records(fixture("triage_train.jsonl"));
  auto fit = train_triage(train);
  bool monotone = true;
  for (std::size_t i = 1; i < fit.loss_history.size(); ++i)
    monotone = monotone && fit.loss_history[i] <= fit.loss_history[i - 1] + 1e-12;
  o.require(monotone, "training loss non-increasing");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& ex : read_labeled_records(fixture("triage_test.jsonl"))) {
    const bool got = triage(ex.record, &fit.model).relevant;
    tp += got && ex.label;
    fp += got && !ex.label;
    fn += !got && ex.label;
  }
  const double f1 = f1_of(tp, fp, fn);
  o.require(f1 >= 0.95, "held-out F1 >= 0.95");
  o.note("held-out F1 " + fmt(f1) + " (tp=" + std::to_string(tp) + " fp=" + std::to_string(fp) +
         " fn=" + std::to_string(fn) + ")");
  std::string cats;
  for (const auto& line : read_lines(fixture("triage_archetypes.jsonl"))) {
    auto rec = parse_record(line);
    const int expected = json::parse(line)["expected_category"].get<int>();
    auto d = triage(rec, &fit.model);
    const int got = static_cast<int>(d.category);
    cats += std::to_string(got);
    o.require(!d.relevant && got == expected, "archetype " + std::to_string(rec.pmid) + " -> " + std::to_string(expected));
  }
  o.note("archetype categories (background, funding, unrelated) = " + cats);
}

void topics_e2e(Outcome& o) {
  auto records = read_corpus(fixture("corpus.jsonl"));
  auto labels = read_topic_labels(fixture("corpus_topics.tsv"));
  std::vector<Pmid> ids;
  for (const auto& r : records) ids.push_back(r.pmid);
  auto s = split(ids, 800, 200, 2023);
  std::map<Pmid, const CitationRecord*> by_id;
  for (const auto& r : records) by_id[r.pmid] = &r;
  std::vector<CitationRecord> train, test;
  for (auto p : s.train) train.push_back(*by_id[p]);
  for (auto p : s.test) test.push_back(*by_id[p]);
  auto fit = train_topics(topic_examples(train, labels), TopicSet::defaults());

  const auto before = featurize_call_count();
  std::vector<TopicAnnotation> ann;
  for (const auto& r : test) ann.push_back(annotate_topics(r, &fit.model));
  const auto calls = featurize_call_count() - before;

  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& gold = labels.at(test[i].pmid);
    std::set<std::string> g(gold.begin(), gold.end()), p(ann[i].assigned.begin(), ann[i].assigned.end());
    for (const auto& t : p) (g.contains(t) ? tp : fp)++;
    for (const auto& t : g) fn += !p.contains(t);
  }
  const double f1 = f1_of(tp, fp, fn);
  o.require(f1 >= 0.85, "held-out micro-F1 >= 0.85");
  o.require(calls == test.size(), "one featurization per record");
  o.note("micro-F1 " + fmt(f1) + ", featurizations " + std::to_string(calls) + " for " + std::to_string(test.size()) +
         " records");
}

struct SearchFixture {
  std::vector<CitationRecord> records;
  std::map<Pmid, DocumentFacets> facets;
  SearchIndex index;
};

SearchFixture search_fixture() {
  SearchFixture f;
  f.records = read_corpus(fixture("corpus.jsonl"));
  auto labels = read_topic_labels(fixture("corpus_topics.tsv"));
  auto lexicon = Lexicon::load(bundled("lexicon.tsv"));
  for (const auto& r : f.records) {
    auto& fc = f.facets[r.pmid];
    fc.topics.insert(labels.at(r.pmid).begin(), labels.at(r.pmid).end());
    for (const auto& m : annotate_entities(r, lexicon)) {
      if (m.type == EntityType::Strain) fc.strains.insert(m.concept_id);
      if (m.type == EntityType::Vaccine) fc.vaccines.insert(m.concept_id);
    }
  }
  for (const auto& m : read_mentions(fixture("corpus_drugs.tsv"))) f.facets[m.pmid].drugs.insert(m.concept_id);
  f.index = SearchIndex::build(f.records, f.facets);
  return f;
}

// Naive scan: every query token present in the document, every facet filter
// satisfied by some value, date in range.
std::set<Pmid> naive_scan(const SearchFixture& f, const FacetQuery& q) {
  std::set<std::string> terms;
  for (const auto& t : tokenize(q.text)) terms.insert(t.surface);
  std::set<Pmid> out;
  for (const auto& r : f.records) {
    std::set<std::string> words;
    for (const auto& t : tokenize(r.title + " " + r.abstract)) words.insert(t.surface);
    bool ok = std::all_of(terms.begin(), terms.end(), [&](const std::string& t) { return words.contains(t); });
    const auto& fc = f.facets.at(r.pmid);
    for (const auto& [facet, values] : q.filters) {
      const std::set<std::string>* have = nullptr;
      std::set<std::string> journal{r.journal};
      switch (facet) {
        case Facet::Topic: have = &fc.topics; break;
        case Facet::Variant: have = &fc.strains; break;
        case Facet::Vaccine: have = &fc.vaccines; break;
        case Facet::Drug: have = &fc.drugs; break;
        case Facet::Journal: have = &journal; break;
      }
      ok = ok && std::any_of(values.begin(), values.end(), [&](const std::string& v) { return have->contains(v); });
    }
    if (q.from) ok = ok && r.pub_date >= *q.from;
    if (q.to) ok = ok && r.pub_date <= *q.to;
    if (ok) out.insert(r.pmid);
  }
  return out;
}

FacetQuery random_query(std::mt19937_64& gen, const SearchFixture& f) {
  static const std::vector<std::string> words{"covid-19", "treatment", "masks", "pcr", "variant", "vaccine",
                                              "patients", "cohort", "spread", "ace2", "curve", "case"};
  std::vector<std::string> journals;
  for (std::size_t i = 0; i < 40; ++i) journals.push_back(f.records[i].journal);
  static const std::vector<std::string> strains{"STRAIN:Alpha", "STRAIN:Beta", "STRAIN:Gamma", "STRAIN:Delta",
                                                "STRAIN:Omicron"};
  static const std::vector<std::string> vaccines{"VAX:BNT162b2", "VAX:mRNA-1273", "VAX:Ad26.COV2.S", "VAX:ChAdOx1",
                                                 "VAX:CoronaVac"};
  static const std::vector<std::string> drugs{"DRUG:Remdesivir", "DRUG:Dexamethasone", "DRUG:Tocilizumab"};
  const auto topics = TopicSet::defaults().names();
  std::uniform_real_distribution<double> u(0, 1);
  auto pick = [&](const std::vector<std::string>& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(gen)]; };
  FacetQuery q;
  if (u(gen) < 0.5) q.text = pick(words);
  if (u(gen) < 0.2) q.text += " " + pick(words);
  if (u(gen) < 0.4) q.filters[Facet::Topic].insert(pick(topics));
  if (u(gen) < 0.15) q.filters[Facet::Topic].insert(pick(topics));
  if (u(gen) < 0.3) q.filters[Facet::Variant].insert(pick(strains));
  if (u(gen) < 0.3) q.filters[Facet::Vaccine].insert(pick(vaccines));
  if (u(gen) < 0.15) q.filters[Facet::Drug].insert(pick(drugs));
  if (u(gen) < 0.15) q.filters[Facet::Journal].insert(pick(journals));
  if (u(gen) < 0.3) q.from = Date{2021, 1 + int(u(gen) * 12), 1};
  if (u(gen) < 0.3) q.to = Date{2022, 1 + int(u(gen) * 12), 28};
  q.sort = u(gen) < 0.5 ? SortOrder::Relevance : SortOrder::DateDesc;
  return q;
}

std::set<Pmid> hit_set(const std::vector<SearchHit>& hits) {
  std::set<Pmid> s;
  for (const auto& h : hits) s.insert(h.pmid);
  return s;
}

void search_oracle(Outcome& o) {
  auto f = search_fixture();
  std::mt19937_64 gen(99);
  int mismatches = 0;
  std::size_t nonempty = 0;
  for (int i = 0; i < 100; ++i) {
    auto q = random_query(gen, f);
    auto got = hit_set(f.index.all_hits(q));
    auto want = naive_scan(f, q);
    if (got != want) ++mismatches;
    nonempty += !want.empty();
  }
  o.require(mismatches == 0, "100 random queries equal naive scan");
  o.note("naive-scan mismatches " + std::to_string(mismatches) + "/100 (" + std::to_string(nonempty) + " non-empty)");

  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    auto q = random_query(gen, f);
    auto narrower = q;
    auto extra = random_query(gen, f);
    for (const auto& [facet, values] : extra.filters)
      if (!narrower.filters.contains(facet)) narrower.filters[facet] = values;
    if (extra.from) narrower.from = std::max(extra.from, narrower.from);
    if (!extra.text.empty()) narrower.text += " " + extra.text;
    auto wide = hit_set(f.index.all_hits(q));
    auto narrow = hit_set(f.index.all_hits(narrower));
    if (!std::includes(wide.begin(), wide.end(), narrow.begin(), narrow.end())) ++violations;
  }
  o.require(violations == 0, "filter monotonicity");
  o.note("monotonicity violations " + std::to_string(violations) + "/1000");

  FacetQuery all;
  all.text = "covid-19";
  all.sort = SortOrder::Relevance;
  auto full = f.index.all_hits(all);
  std::vector<SearchHit> concat;
  all.page_size = 37;
  for (all.page = 1;; ++all.page) {
    auto page = f.index.search(all).page;
    if (page.empty()) break;
    concat.insert(concat.end(), page.begin(), page.end());
  }
  o.require(concat == full, "pagination concatenation");

  FacetQuery co;
  co.filters[Facet::Variant] = {"STRAIN:Omicron"};
  co.filters[Facet::Vaccine] = {"VAX:BNT162b2"};
  auto co_hits = hit_set(f.index.all_hits(co));
  auto expected_ids = read_pmids(fixture("comention_omicron_bnt162b2.txt"));
  std::set<Pmid> expected(expected_ids.begin(), expected_ids.end());
  o.require(co_hits == expected, "Omicron and BNT162b2 co-mention set");
  o.note("pagination over " + std::to_string(full.size()) + " hits ok; co-mention hits " +
         std::to_string(co_hits.size()) + "/" + std::to_string(expected.size()));
}

void stats(Outcome& o) {
  auto records = read_corpus(fixture("corpus.jsonl"));
  std::vector<Date> dates;
  for (const auto& r : records) dates.push_back(r.pub_date);
  auto g = growth(dates, Granularity::Day);
  bool monotone = true;
  for (std::size_t i = 1; i < g.rows.size(); ++i) monotone = monotone && g.rows[i].cumulative >= g.rows[i - 1].cumulative;
  o.require(monotone, "cumulative non-decreasing");
  o.require(!g.rows.empty() && g.rows.back().cumulative == records.size(), "cumulative ends at collection size");

  auto labels = read_topic_labels(fixture("corpus_topics.tsv"));
  std::vector<std::set<std::string>> sets;
  for (const auto& r : records) sets.emplace_back(labels.at(r.pmid).begin(), labels.at(r.pmid).end());
  auto m = cooccurrence(sets, TopicSet::defaults());
  bool symmetric = true, bounded = true;
  for (std::size_t i = 0; i < m.counts.size(); ++i)
    for (std::size_t j = 0; j < m.counts.size(); ++j) {
      symmetric = symmetric && m.counts[i][j] == m.counts[j][i];
      bounded = bounded && m.counts[i][j] <= std::min(m.counts[i][i], m.counts[j][j]);
    }
  o.require(symmetric, "co-occurrence symmetric");
  o.require(bounded, "entry <= min of diagonals");

  std::set<Pmid> collection;
  for (const auto& r : records) collection.insert(r.pmid);
  auto external = read_trending(fixture("trending.tsv"));
  auto top = trending(collection, external, 6);
  bool subset = top.size() <= 6;
  for (const auto& t : top)
    subset = subset && collection.contains(t.pmid) &&
             std::any_of(external.begin(), external.end(), [&](const TrendingItem& e) { return e.pmid == t.pmid; });
  o.require(subset, "trending within collection and external list");

  auto a = read_pmids(fixture("coverage_a.txt")), b = read_pmids(fixture("coverage_b.txt"));
  auto cov = compare_collections({a.begin(), a.end()}, {b.begin(), b.end()});
  o.require(cov.size_a == 90 && cov.size_b == 22 && cov.intersection == 20, "coverage fixture 90/22/20");
  o.require(std::abs(cov.b_covered_by_a - 20.0 / 22.0) < 1e-9, "B coverage ~0.909");
  o.note(std::to_string(g.rows.size()) + " daily rows ending at " + std::to_string(g.rows.back().cumulative) +
         "; trending " + std::to_string(top.size()) + "; B-coverage " + fmt(cov.b_covered_by_a, 3));
}

void hitl(Outcome& o) {
  auto pool = read_corpus(fixture("longcovid_pool.jsonl"));
  auto held = read_corpus(fixture("longcovid_heldout.jsonl"));
  auto labels = read_binary_labels(fixture("longcovid_labels.tsv"));
  auto seeds = read_seed_labels(fixture("longcovid_seeds.tsv"));
  auto lexicon = std::make_shared<const Lexicon>(Lexicon::load(bundled("longcovid_lexicon.tsv")));
  LoopConfig config;

  LongCovidLoop loop(pool, seeds, lexicon, nullptr, config);
  auto heldout_f1 = [&](const LongCovidLoop& l) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& r : held) {
      const bool got = l.predict(r).p >= 0.5;
      const bool want = labels.at(r.pmid) == 1;
      tp += got && want;
      fp += got && !want;
      fn += !got && want;
    }
    return f1_of(tp, fp, fn);
  };

  std::vector<double> f1s;
  std::vector<std::size_t> marks;
  std::int64_t clock = 1'700'000'000;
  for (int it = 1; it <= 3; ++it) {
    for (const auto& item : loop.next_review_batch(25))
      loop.record_decision(item.pmid, labels.at(item.pmid) == 1, it % 2 ? "curator-a" : "curator-b", Timestamp{clock++});
    loop.run_iteration();
    marks.push_back(loop.state()->log.size());
    f1s.push_back(heldout_f1(loop));
  }
  o.require(loop.state()->log.size() == 75, "75 logged decisions");
  o.require(f1s[2] >= f1s[0], "F1 after iteration 3 >= iteration 1");
  o.require(f1s[2] >= 0.75, "F1 after iteration 3 >= 0.75");
  o.note("held-out F1 by iteration " + fmt(f1s[0]) + " / " + fmt(f1s[1]) + " / " + fmt(f1s[2]));

  auto state = loop.state();
  bool supremacy = true;
  for (const auto& d : state->log) {
    const auto& item = state->items.at(d.pmid);
    supremacy = supremacy && item.status == (d.accepted ? ReviewStatus::Accepted : ReviewStatus::Rejected) &&
                item.decided_by == d.curator;
  }
  o.require(supremacy, "no logged decision flipped");

  auto replayed = LongCovidLoop::replay(pool, seeds, lexicon, nullptr, config, state->log, marks);
  auto rs = replayed->state();
  const bool same = rs->unigram && state->unigram && rs->unigram->weights == state->unigram->weights &&
                    rs->bigram->weights == state->bigram->weights && rs->meta.weights == state->meta.weights &&
                    rs->meta.bias == state->meta.bias && rs->iteration == state->iteration;
  o.require(same, "replay reproduces identical weights");

  // Name-free positives: no synonym-lexicon hit in title or abstract.
  std::size_t positives = 0, name_free = 0, held_name_free = 0, recovered = 0;
  std::set<double> name_free_p;
  for (const auto* set : {&pool, &held}) {
    for (const auto& r : *set) {
      if (labels.at(r.pmid) != 1) continue;
      ++positives;
      if (!synonym_spans(r, lexicon.get()).empty()) continue;
      ++name_free;
      if (set == &held) {
        ++held_name_free;
        const double p = loop.predict(r).p;
        name_free_p.insert(p);
        recovered += p >= 0.5;
      }
    }
  }
  const double share = double(name_free) / double(positives);
  o.require(share >= 0.30, "name-free share >= 30%");
  o.require(2 * recovered >= held_name_free, "recovers >= half of held-out name-free positives");
  o.require(name_free_p.size() > 1, "prediction varies with s1 = 0");
  o.note("name-free " + std::to_string(name_free) + "/" + std::to_string(positives) + " (" + fmt(100 * share, 1) +
         "%); recovered " + std::to_string(recovered) + "/" + std::to_string(held_name_free) + " held-out");
}

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

void pipeline(Outcome& o, const HubConfig& config) {
  const HubPaths paths{config.data_dir};
  auto first = run_daily(fixture("corpus.jsonl"), config);
  o.require(first.status == RunStatus::Succeeded && first.published_snapshot, "first run publishes");
  const auto snap_dir = paths.snapshots() / *first.published_snapshot;
  const auto before = directory_bytes(snap_dir);
  const auto current_before = slurp(paths.current());

  auto second = run_daily(fixture("corpus.jsonl"), config);
  o.require(second.status == RunStatus::Succeeded, "second run succeeds");
  o.require(!second.published_snapshot, "second run is a no-op");
  o.require(second.ingest.n_duplicate == 1000 && second.ingest.n_new == 0, "second run all duplicates");
  o.require(slurp(paths.current()) == current_before && directory_bytes(snap_dir) == before,
            "collection, annotations and index byte-identical");
  std::size_t n_snaps = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(paths.snapshots())) ++n_snaps;
  o.require(n_snaps == 1, "one snapshot directory");

  FacetQuery probe;
  probe.text = "covid-19";
  const auto hits_before = SnapshotDirectory(config.data_dir).load_current()->index.all_hits(probe);

  PipelineOptions failing;
  failing.fail_stage = "entities";
  auto failed = run_daily(fixture("delta_small.jsonl"), config, failing);
  o.require(failed.status == RunStatus::Failed && failed.failed_stage == "entities", "status failed(entities)");
  o.require(slurp(paths.current()) == current_before, "CURRENT unchanged after failure");
  const auto hits_after = SnapshotDirectory(config.data_dir).load_current()->index.all_hits(probe);
  o.require(hits_after == hits_before, "search results unchanged after failure");

  auto resumed = run_daily(fixture("delta_small.jsonl"), config);
  o.require(resumed.status == RunStatus::Succeeded, "rerun after failure succeeds");
  bool chained = resumed.stages.size() == kPipelineStages.size();
  for (std::size_t i = 1; chained && i < resumed.stages.size(); ++i)
    chained = resumed.stages[i].input == resumed.stages[i - 1].output;
  o.require(chained, "stage counts chain");
  const std::size_t triage_in = resumed.stages.size() > 2 ? resumed.stages[1].input : 0;
  const std::size_t topics_in = resumed.stages.size() > 2 ? resumed.stages[2].input : 0;
  o.require(triage_in == 10 && topics_in == 7, "delta of 10 with 7 relevant feeds 7 to topics");
  o.note("snapshot " + *first.published_snapshot + " stable across rerun; failed(" + failed.failed_stage +
         ") left it serving; resumed run triage in=" + std::to_string(triage_in) + " topics in=" +
         std::to_string(topics_in));
}

std::multimap<std::string, std::string> to_params(const FacetQuery& q) {
  std::multimap<std::string, std::string> p;
  if (!q.text.empty()) p.emplace("q", q.text);
  for (const auto& [facet, values] : q.filters)
    for (const auto& v : values) p.emplace(std::string(facet_name(facet)), v);
  if (q.from) p.emplace("from", q.from->iso());
  if (q.to) p.emplace("to", q.to->iso());
  p.emplace("page", std::to_string(q.page));
  p.emplace("size", std::to_string(q.page_size));
  p.emplace("sort", q.sort == SortOrder::Relevance ? "relevance" : "date_desc");
  return p;
}

void api(Outcome& o, const HubConfig& config) {
  HubService service(config);
  std::thread server([&] { service.serve("127.0.0.1", 0); });
  service.wait_until_listening();
  httplib::Client client("127.0.0.1", service.bound_port());
  auto view = service.live();
  const auto& snap = *view.snapshot;
  std::mt19937_64 gen(5);
  std::size_t probes = 0, mismatches = 0;
  std::vector<std::string> failed_probes;
  auto check = [&](bool ok, const std::string& what) {
    ++probes;
    if (!ok) {
      ++mismatches;
      if (failed_probes.size() < 5) failed_probes.push_back(what);
    }
  };
  auto get_json = [&](const std::string& path, const httplib::Params& params = {}) {
    auto res = client.Get(path, params, httplib::Headers{});
    if (!res) throw std::runtime_error("no response for " + path);
    if (res->get_header_value("X-Snapshot-Id") != snap.id) throw std::runtime_error("missing snapshot header");
    return std::make_pair(res->status, json::parse(res->body));
  };

  SearchFixture dummy;
  dummy.records = snap.record_list();
  for (int i = 0; i < 20; ++i) {
    auto q = random_query(gen, dummy);
    q.page = 1 + i % 2;
    q.page_size = 10;
    auto params = to_params(q);
    auto [status, body] = get_json("/api/search", httplib::Params(params.begin(), params.end()));
    auto lib = snap.index.search(q);
    bool same = status == 200 && body["total"] == lib.total && body["hits"].size() == lib.page.size();
    for (std::size_t k = 0; same && k < lib.page.size(); ++k)
      same = body["hits"][k]["pmid"] == lib.page[k].pmid && body["hits"][k]["score"] == lib.page[k].score;
    for (const auto& [facet, values] : lib.facet_counts)
      for (const auto& [value, n] : values) same = same && body["facet_counts"][std::string(facet_name(facet))][value] == n;
    check(same, "search " + std::to_string(i));
  }
  {
    auto [status, body] = get_json("/api/stats/overview");
    std::set<std::string> journals, topics;
    for (const auto& [pmid, r] : snap.records) journals.insert(r.journal);
    for (const auto& [pmid, a] : snap.topics) topics.insert(a.assigned.begin(), a.assigned.end());
    check(status == 200 && body["publications"] == snap.records.size() && body["journals"] == journals.size() &&
              body["topics"] == topics.size(),
          "overview");
    o.note("overview " + body.dump());
  }
  std::vector<Pmid> ids;
  for (const auto& [pmid, r] : snap.records) ids.push_back(pmid);
  for (int i = 0; i < 12; ++i) {
    const Pmid pmid = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(gen)];
    auto [status, body] = get_json("/api/doc/" + std::to_string(pmid));
    const auto& rec = snap.records.at(pmid);
    bool same = status == 200 && parse_record(body["record"].dump()) == rec;
    const auto& ms = snap.mentions.count(pmid) ? snap.mentions.at(pmid) : std::vector<EntityMention>{};
    same = same && body["mentions"].size() == ms.size();
    for (std::size_t k = 0; same && k < ms.size(); ++k)
      same = body["mentions"][k]["start"] == ms[k].start && body["mentions"][k]["end"] == ms[k].end &&
             body["mentions"][k]["concept"] == ms[k].concept_id;
    same = same && body["topics"]["assigned"] == json(snap.topics.at(pmid).assigned);
    check(same, "doc " + std::to_string(pmid));
  }
  for (int i = 0; i < 6; ++i) {
    const Pmid pmid = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(gen)];
    const auto style = i % 2 ? CitationStyle::Ris : CitationStyle::Text;
    auto res = client.Get("/api/doc/" + std::to_string(pmid) + "/cite?style=" + (i % 2 ? "ris" : "text"));
    check(res && res->status == 200 && res->body == cite(snap.records.at(pmid), style), "cite " + std::to_string(pmid));
  }
  {
    std::vector<Date> dates;
    for (const auto& [pmid, r] : snap.records) dates.push_back(r.pub_date);
    for (const char* gname : {"day", "month", "quarter"}) {
      auto [status, body] = get_json("/api/stats/growth", {{"granularity", gname}});
      auto lib = growth(dates, *parse_granularity(gname));
      bool same = status == 200 && body["rows"].size() == lib.rows.size();
      for (std::size_t k = 0; same && k < lib.rows.size(); ++k)
        same = body["rows"][k]["period"] == lib.rows[k].period && body["rows"][k]["new"] == lib.rows[k].new_count &&
               body["rows"][k]["cumulative"] == lib.rows[k].cumulative;
      check(same, std::string("growth ") + gname);
    }
  }
  {
    std::vector<std::set<std::string>> sets;
    for (const auto& [pmid, r] : snap.records)
      sets.emplace_back(snap.topics.at(pmid).assigned.begin(), snap.topics.at(pmid).assigned.end());
    auto lib = cooccurrence(sets, TopicSet(snap.topic_names));
    auto [status, body] = get_json("/api/stats/cooccurrence");
    check(status == 200 && body["counts"] == json(lib.counts), "cooccurrence");
  }
  {
    std::set<Pmid> members(ids.begin(), ids.end());
    auto lib = trending(members, read_trending(fixture("trending.tsv")), 6);
    auto [status, body] = get_json("/api/stats/trending");
    bool same = status == 200 && body["items"].size() == lib.size();
    for (std::size_t k = 0; same && k < lib.size(); ++k) same = body["items"][k]["pmid"] == lib[k].pmid;
    check(same, "trending");
  }
  for (std::size_t k : {1, 5, 10, 20}) {
    auto lib = view.loop->next_review_batch(k);
    auto [status, body] = get_json("/api/review/queue", {{"k", std::to_string(k)}});
    bool same = status == 200 && body["items"].size() == lib.size();
    for (std::size_t i = 0; same && i < lib.size(); ++i)
      same = body["items"][i]["pmid"] == lib[i].pmid && body["items"][i]["priority"] == lib[i].priority;
    check(same, "queue k=" + std::to_string(k));
  }
  {
    FacetQuery q;
    q.filters[Facet::Variant] = {"STRAIN:Omicron"};
    q.filters[Facet::Vaccine] = {"VAX:BNT162b2"};
    auto lib = snap.index.all_hits(q);
    auto res = client.Get("/api/export?format=jsonl&variant=STRAIN:Omicron&vaccine=VAX:BNT162b2");
    std::size_t lines = 0;
    bool same = res && res->status == 200;
    std::istringstream in(same ? res->body : "");
    for (std::string line; same && std::getline(in, line); ++lines)
      same = lines < lib.size() && parse_record(line) == snap.records.at(lib[lines].pmid);
    check(same && lines == lib.size(), "export jsonl");
  }
  auto bad = client.Get("/api/search?page=0");
  check(bad && bad->status == 400 && json::parse(bad->body)["code"] == "BadPage" &&
            json::parse(bad->body)["parameter"] == "page",
        "page=0 -> 400 BadPage");

  service.stop();
  server.join();
  o.require(probes >= 50, "at least 50 probes");
  o.require(mismatches == 0, "API equals library");
  std::string failed_list;
  for (const auto& f : failed_probes) failed_list += " " + f;
  o.note(std::to_string(probes) + " probes, " + std::to_string(mismatches) + " mismatches" + failed_list);
}

}  // namespace

int main() {
  std::printf("lithub acceptance suite\n");
  criterion("metric-oracle", metric_oracle);
  criterion("iaa", iaa);
  criterion("split", split_criterion);
  criterion("ner", ner);
  criterion("gradient-checks", gradients);
  criterion("triage-end-to-end", triage_e2e);
  criterion("topics", topics_e2e);
  criterion("search-oracle", search_oracle);
  criterion("stats", stats);
  criterion("human-in-the-loop", hitl);

  TempDir tmp;
  Stopwatch fixture_clock;
  HubConfig config;
  bool prepared = false;
  try {
    config = HubConfig::load(prepare_hub(tmp.path()));
    prepared = true;
  } catch (const std::exception& e) {
    std::printf("setup failed: %s\n", e.what());
  }
  criterion("pipeline", [&](Outcome& o) {
    o.require(prepared, "hub setup");
    if (prepared) pipeline(o, config);
  });
  criterion("api", [&](Outcome& o) {
    o.require(prepared, "hub setup");
    if (prepared) api(o, config);
    const double total = fixture_clock.seconds();
    o.require(total < 120.0, "fixture pipeline + API suite < 2 minutes");
    o.note("pipeline + API wall time " + fmt(total, 1) + "s");
  });
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
