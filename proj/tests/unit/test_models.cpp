#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "helpers.hpp"
#include "lithub/logistic.hpp"
#include "lithub/topics.hpp"
#include "lithub/triage.hpp"

using namespace lithub;
using namespace lithub::testing;

namespace {

std::vector<LabeledRecord> toy_triage_set() {
  std::vector<LabeledRecord> out;
  for (int i = 0; i < 20; ++i) {
    const bool pos = i % 2 == 0;
    auto r = make_record(100 + i, pos ? "COVID-19 ward outcomes" : "Soil nitrogen cycling",
                         pos ? "Patients with SARS-CoV-2 infection were followed." : "Plots were sampled in spring.");
    out.push_back({r, pos});
  }
  return out;
}

// Model that scores every keyword-bearing record far below threshold.
LinearModel rejecting_model() {
  std::vector<std::string> texts{"covid-19 placeholder"};
  LinearModel m;
  m.vocab = Vocabulary::build_from_texts(texts, 1);
  m.weights.assign(m.vocab.size(), 0.0);
  m.bias = -8;
  return m;
}

double fd_check(const std::function<double(double)>& loss_at, double h = 1e-5) {
  return (loss_at(h) - loss_at(-h)) / (2 * h);
}

}  // namespace

TEST(Logistic, Sigmoid) {
  EXPECT_EQ(sigmoid(0), 0.5);
  EXPECT_NEAR(sigmoid(2) + sigmoid(-2), 1.0, 1e-15);
  EXPECT_GT(sigmoid(800), 0.999);
  EXPECT_LT(sigmoid(-800), 1e-300);
  EXPECT_TRUE(std::isfinite(sigmoid(-800)));
}

TEST(Logistic, LossAtZeroIsLn2) {
  std::vector<SparseVector> X{{{{0, 1.0}}}, {{{1, 2.0}}}};
  std::vector<int> y{1, 0};
  std::vector<double> w{0, 0};
  auto g = log_loss_gradient(X, y, w, 0, 0);
  EXPECT_NEAR(g.loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(g.grad_weights[0], -0.25, 1e-15);
  EXPECT_NEAR(g.grad_weights[1], 0.5, 1e-15);
  EXPECT_NEAR(g.grad_bias, 0.0, 1e-15);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  std::vector<SparseVector> X;
  std::vector<int> y;
  for (int i = 0; i < 30; ++i) {
    SparseVector v;
    for (std::uint32_t j = 0; j < 6; ++j)
      if ((i + j) % 3) v.entries.push_back({j, nd(gen)});
    X.push_back(v);
    y.push_back(i % 2);
  }
  std::vector<double> w(6);
  for (auto& x : w) x = nd(gen);
  const double b = 0.3, l2 = 0.01;
  auto g = log_loss_gradient(X, y, w, b, l2);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double fd = fd_check([&](double h) {
      auto wh = w;
      wh[j] += h;
      return log_loss_gradient(X, y, wh, b, l2).loss;
    });
    EXPECT_NEAR(fd, g.grad_weights[j], 1e-6 * std::max(1.0, std::abs(fd)));
  }
  const double fdb = fd_check([&](double h) { return log_loss_gradient(X, y, w, b + h, l2).loss; });
  EXPECT_NEAR(fdb, g.grad_bias, 1e-7);
}

TEST(Logistic, SingleClassAndBadHyper) {
  std::vector<SparseVector> X{{{{0, 1.0}}}, {{{0, 2.0}}}};
  std::vector<int> ones{1, 1}, mixed{1, 0};
  EXPECT_EQ(code_of([&] { fit_logistic(X, ones, 1, {}); }), Errc::SingleClassDataset);
  EXPECT_EQ(code_of([&] { fit_logistic(X, mixed, 1, TrainHyper{0, 10, 0}); }), Errc::BadInput);
  EXPECT_EQ(code_of([&] { fit_logistic(X, mixed, 1, TrainHyper{0.1, 0, 0}); }), Errc::BadInput);
}

TEST(Logistic, NonFiniteLossDetected) {
  std::vector<SparseVector> X{{{{0, 1e200}}}, {{{0, -1e200}}}};
  std::vector<int> y{1, 0};
  EXPECT_EQ(code_of([&] { fit_logistic(X, y, 1, TrainHyper{1e10, 5, 0}); }), Errc::NonFiniteLoss);
}

TEST(Logistic, MultiheadGradientMatchesFiniteDifferences) {
  std::vector<SparseVector> X{{{{0, 1.0}, {2, 0.5}}}, {{{1, 1.5}}}, {{{0, -0.5}, {1, 0.25}}}, {{{2, 2.0}}}};
  std::vector<int> labels{1, 0, 0, 1, 1, 1, 0, 0};  // 4 x 2
  std::vector<std::vector<double>> W{{0.1, -0.2, 0.3}, {-0.4, 0.5, 0.05}};
  std::vector<double> b{0.1, -0.1};
  auto g = multihead_loss_gradient(X, labels, W, b, 0.01);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t j = 0; j < 3; ++j) {
      const double fd = fd_check([&](double h) {
        auto Wh = W;
        Wh[k][j] += h;
        return multihead_loss_gradient(X, labels, Wh, b, 0.01).loss;
      });
      EXPECT_NEAR(fd, g.grad_weights[k][j], 1e-7);
    }
}

TEST(Logistic, MultiheadEqualsIndependentHeads) {
  std::vector<SparseVector> X{{{{0, 1.0}}}, {{{1, 1.0}}}, {{{0, 1.0}, {1, 1.0}}}, {{}}};
  std::vector<int> labels{1, 0, 0, 1, 1, 1, 0, 0};
  auto joint = fit_multihead(X, labels, 2, 2, TrainHyper{0.5, 50, 0.001});
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<int> y;
    for (std::size_t i = 0; i < 4; ++i) y.push_back(labels[i * 2 + k]);
    auto single = fit_logistic(X, y, 2, TrainHyper{0.5, 50, 0.001});
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(joint.weights[k][j], single.weights[j], 1e-12);
    EXPECT_NEAR(joint.biases[k], single.bias, 1e-12);
  }
}

TEST(Logistic, DegenerateHead) {
  std::vector<SparseVector> X{{{{0, 1.0}}}, {{{0, 2.0}}}};
  std::vector<int> labels{1, 1, 0, 1};
  EXPECT_EQ(code_of([&] { fit_multihead(X, labels, 2, 1, {}); }), Errc::DegenerateTopic);
}

TEST(Keywords, Prefilter) {
  auto kw = KeywordList::defaults();
  auto r = make_record(1, "Tuberculosis outcomes", "Cases rose after COVID-19 in the region.");
  auto hits = keyword_prefilter(r, kw);
  EXPECT_TRUE(hits.abstract);
  EXPECT_FALSE(hits.title);
  EXPECT_TRUE(hits.only_abstract());

  auto flu = make_record(2, "Influenza season", "Vaccination uptake among adults.");
  EXPECT_FALSE(keyword_prefilter(flu, kw).any());

  auto funded = make_record(3, "Hip fracture", "Surgery outcomes.");
  funded.funding_text = "Funded by a SARS-CoV-2 research grant.";
  EXPECT_TRUE(keyword_prefilter(funded, kw).only_funding());
}

TEST(Keywords, TokenBoundaries) {
  KeywordList kw({"covid-19", "long covid"});
  EXPECT_TRUE(kw.matches("symptoms of long COVID persist"));
  EXPECT_FALSE(kw.matches("longcovid"));
  EXPECT_FALSE(kw.matches("covid-199 variant"));
}

TEST(Triage, SeparableToyReachesFullAccuracy) {
  auto data = toy_triage_set();
  auto fit = train_triage(data, TrainHyper{0.05, 200, 1e-4});
  for (const auto& ex : data) EXPECT_EQ(fit.model.probability(ex.record) >= 0.5, ex.label) << ex.record.pmid;
  for (std::size_t i = 1; i < fit.loss_history.size(); ++i) EXPECT_LE(fit.loss_history[i], fit.loss_history[i - 1]);
}

TEST(Triage, OnlyPositives) {
  auto data = toy_triage_set();
  std::erase_if(data, [](const LabeledRecord& e) { return !e.label; });
  EXPECT_EQ(code_of([&] { train_triage(data); }), Errc::SingleClassDataset);
}

TEST(Triage, ModelMissing) {
  EXPECT_EQ(code_of([] { triage(make_record(1, "x"), nullptr); }), Errc::ModelMissing);
}

TEST(Triage, BackgroundSentenceIsCategory2) {
  auto model = rejecting_model();
  auto r = make_record(35926511, "Tuberculosis is caused by the bacterium Mycobacterium tuberculosis",
                       "Tuberculosis remains a leading cause of death. Notifications fell after COVID-19 disrupted "
                       "services. We model incidence.");
  auto d = triage(r, &model);
  EXPECT_FALSE(d.relevant);
  EXPECT_EQ(d.category, ExclusionCategory::BackgroundOnly);
}

TEST(Triage, FundingOnlyIsCategory3) {
  auto model = rejecting_model();
  auto r = make_record(2, "Hip fracture", "Surgery outcomes.");
  r.funding_text = "Supported by a COVID-19 relief grant.";
  auto d = triage(r, &model);
  EXPECT_FALSE(d.relevant);
  EXPECT_EQ(d.category, ExclusionCategory::OtherField);
}

TEST(Triage, NoKeywordIsCategory1WithZeroScore) {
  auto model = rejecting_model();
  auto d = triage(make_record(3, "Influenza season", "Vaccination uptake."), &model);
  EXPECT_FALSE(d.relevant);
  EXPECT_EQ(d.category, ExclusionCategory::UnrelatedFindings);
  EXPECT_EQ(d.score, 0.0);
}

TEST(Triage, MultipleSentencesOrNoCueIsCategory1) {
  auto model = rejecting_model();
  auto two = make_record(4, "Asthma", "COVID-19 changed care. Clinics reopened after COVID-19 waves.");
  EXPECT_EQ(triage(two, &model).category, ExclusionCategory::UnrelatedFindings);
  auto uncued = make_record(5, "Asthma", "Inhaler adherence was measured. COVID-19 testing was routine.");
  EXPECT_EQ(triage(uncued, &model).category, ExclusionCategory::UnrelatedFindings);
}

TEST(Triage, CategoryPartitionAndDeterminism) {
  auto fit = train_triage(read_labeled_records(fixture("triage_train.jsonl")));
  for (const auto& ex : read_labeled_records(fixture("triage_test.jsonl"))) {
    auto a = triage(ex.record, &fit.model);
    EXPECT_EQ(a, triage(ex.record, &fit.model));
    if (a.relevant)
      EXPECT_EQ(a.category, ExclusionCategory::None);
    else
      EXPECT_NE(a.category, ExclusionCategory::None);
  }
}

TEST(Triage, PositiveWeightTokenNeverLowersScore) {
  auto fit = train_triage(read_labeled_records(fixture("triage_train.jsonl")));
  const auto& m = fit.model;
  std::vector<std::string> positive;
  for (const auto& [term, e] : m.vocab.terms())
    if (m.weights[e.index] > 0 && positive.size() < 25) positive.push_back(term);
  ASSERT_FALSE(positive.empty());
  for (const auto& ex : read_labeled_records(fixture("triage_test.jsonl"))) {
    for (const auto& term : positive) {
      auto r = ex.record;
      const double before = m.probability(r);
      r.abstract += " " + term;
      EXPECT_GE(m.probability(r), before) << term;
    }
  }
}

TEST(Triage, ModelSaveLoadRoundTrip) {
  TempDir dir;
  auto fit = train_triage(toy_triage_set());
  fit.model.save(dir / "m.txt");
  auto loaded = LinearModel::load(dir / "m.txt");
  EXPECT_EQ(loaded.weights, fit.model.weights);
  EXPECT_EQ(loaded.bias, fit.model.bias);
  EXPECT_EQ(loaded.trained_on, fit.model.trained_on);
  for (const auto& ex : toy_triage_set()) EXPECT_EQ(loaded.probability(ex.record), fit.model.probability(ex.record));
}

TEST(Triage, SentenceSplit) {
  auto s = split_sentences("One. Two? Three! B.1.351 stays. Tail");
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[3], "B.1.351 stays.");
  EXPECT_EQ(s[4], "Tail");
}

namespace {

// Topic t present iff its marker token appears.
std::vector<TopicExample> marker_corpus() {
  const std::vector<std::string> markers{"zzdrug", "zzmask", "zzpcr", "zzace"};
  const TopicSet topics({"Treatment", "Prevention", "Diagnosis", "Mechanism"});
  std::vector<TopicExample> out;
  for (int i = 0; i < 64; ++i) {
    std::string text = "covid-19 study";
    std::vector<std::string> assigned;
    for (int k = 0; k < 4; ++k)
      if ((i >> k) & 1 || (i % 5 == k)) {
        text += " " + markers[k];
        assigned.push_back(topics[k]);
      }
    out.push_back({make_record(500 + i, text), assigned});
  }
  return out;
}

}  // namespace

TEST(Topics, MarkerCorpusRecoveredExactly) {
  auto data = marker_corpus();
  const TopicSet topics({"Treatment", "Prevention", "Diagnosis", "Mechanism"});
  auto fit = train_topics(data, topics, TrainHyper{0.5, 300, 1e-4});
  for (const auto& ex : data) {
    auto a = annotate_topics(ex.record, &fit.model);
    EXPECT_EQ(a.assigned, ex.topics) << ex.record.title;
  }
}

TEST(Topics, DegenerateTopicNamed) {
  auto data = marker_corpus();
  const TopicSet topics({"Treatment", "Prevention", "Diagnosis", "Mechanism", "Long COVID"});
  try {
    train_topics(data, topics);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateTopic);
    EXPECT_STREQ(e.what(), "Long COVID");
  }
}

TEST(Topics, UnknownLabel) {
  auto data = marker_corpus();
  data[0].topics.push_back("Astrology");
  EXPECT_EQ(code_of([&] { train_topics(data, TopicSet({"Treatment", "Prevention", "Diagnosis", "Mechanism"})); }),
            Errc::BadInput);
}

TEST(Topics, LongCovidAndDiagnosisTogether) {
  auto records = read_corpus(fixture("corpus.jsonl"));
  auto labels = read_topic_labels(fixture("corpus_topics.tsv"));
  auto fit = train_topics(topic_examples(records, labels), TopicSet::defaults());
  auto both = make_record(1, "Persistent sequelae after COVID-19: diagnostic PCR assay sensitivity",
                          "Lingering post-acute symptoms were assessed with a diagnostic assay of high specificity.");
  auto a = annotate_topics(both, &fit.model);
  EXPECT_NE(std::find(a.assigned.begin(), a.assigned.end(), "Long COVID"), a.assigned.end());
  EXPECT_NE(std::find(a.assigned.begin(), a.assigned.end(), "Diagnosis"), a.assigned.end());
}

TEST(Topics, ScoresEqualSingleHeadComputation) {
  auto data = marker_corpus();
  auto fit = train_topics(data, TopicSet({"Treatment", "Prevention", "Diagnosis", "Mechanism"}));
  const auto& m = fit.model;
  for (const auto& ex : data) {
    auto a = annotate_topics(ex.record, &m);
    auto x = featurize(document_text(ex.record), m.vocab, m.scheme);
    for (std::size_t k = 0; k < m.topics.size(); ++k)
      EXPECT_EQ(a.scores[k], sigmoid(dot(x, m.weights[k]) + m.biases[k]));
  }
}

TEST(Topics, AllBelowThresholdAssignsNothing) {
  auto data = marker_corpus();
  auto fit = train_topics(data, TopicSet({"Treatment", "Prevention", "Diagnosis", "Mechanism"}));
  fit.model.thresholds.assign(4, 0.999999);
  EXPECT_TRUE(annotate_topics(make_record(1, "covid-19 study"), &fit.model).assigned.empty());
}

TEST(Topics, RaisingThresholdNeverAdds) {
  auto data = marker_corpus();
  auto fit = train_topics(data, TopicSet({"Treatment", "Prevention", "Diagnosis", "Mechanism"}));
  auto raised = fit.model;
  for (auto& t : raised.thresholds) t = std::min(0.95, t + 0.3);
  for (const auto& ex : data) {
    auto lo = annotate_topics(ex.record, &fit.model).assigned;
    for (const auto& t : annotate_topics(ex.record, &raised).assigned)
      EXPECT_NE(std::find(lo.begin(), lo.end(), t), lo.end());
  }
}

TEST(Topics, ModelMissing) {
  EXPECT_EQ(code_of([] { annotate_topics(make_record(1, "x"), nullptr); }), Errc::ModelMissing);
}

TEST(Topics, Distribution) {
  std::vector<TopicAnnotation> anns(3);
  anns[0].assigned = {"A"};
  anns[1].assigned = {"B"};
  anns[2].assigned = {"A", "B"};
  auto h = topic_distribution(anns, 8);
  ASSERT_EQ(h.size(), 9u);
  EXPECT_EQ(h[1], 2u);
  EXPECT_EQ(h[2], 1u);
  EXPECT_EQ(h[0], 0u);
  auto empty = topic_distribution({}, 8);
  EXPECT_EQ(std::count(empty.begin(), empty.end(), 0u), 9);
}

TEST(Topics, DistributionOnFixtureConserves) {
  auto labels = read_topic_labels(fixture("corpus_topics.tsv"));
  std::vector<TopicAnnotation> anns;
  std::size_t total = 0;
  std::map<std::size_t, std::size_t> brute;
  for (const auto& [pmid, l] : labels) {
    TopicAnnotation a;
    a.pmid = pmid;
    a.assigned = l;
    anns.push_back(a);
    total += l.size();
    ++brute[l.size()];
  }
  auto h = topic_distribution(anns, 8);
  std::size_t articles = 0, assignments = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    articles += h[i];
    assignments += i * h[i];
    EXPECT_EQ(h[i], brute.count(i) ? brute[i] : 0u);
  }
  EXPECT_EQ(articles, labels.size());
  EXPECT_EQ(assignments, total);
}

TEST(Topics, TuneThresholdsStaysOnGrid) {
  auto data = marker_corpus();
  auto fit = train_topics(data, TopicSet({"Treatment", "Prevention", "Diagnosis", "Mechanism"}));
  tune_thresholds(fit.model, data);
  for (double t : fit.model.thresholds) {
    EXPECT_GE(t, 0.05 - 1e-12);
    EXPECT_LE(t, 0.95 + 1e-12);
    EXPECT_NEAR(std::round(t * 20), t * 20, 1e-9);
  }
}

TEST(Topics, SaveLoadRoundTrip) {
  TempDir dir;
  auto data = marker_corpus();
  auto fit = train_topics(data, TopicSet({"Treatment", "Prevention", "Diagnosis", "Mechanism"}));
  fit.model.save(dir / "t.model");
  auto loaded = MultiLabelModel::load(dir / "t.model");
  EXPECT_EQ(loaded.topics, fit.model.topics);
  for (const auto& ex : data)
    EXPECT_EQ(annotate_topics(ex.record, &loaded), annotate_topics(ex.record, &fit.model));
}
