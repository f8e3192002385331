#include "lithub/longcovid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lithub/error.hpp"

namespace lithub {

namespace {

std::size_t count_phrases(const TokenStream& tokens, const std::vector<std::vector<std::string>>& phrases) {
  std::size_t count = 0, i = 0;
  while (i < tokens.size()) {
    std::size_t best = 0;
    for (const auto& p : phrases) {
      if (p.empty() || i + p.size() > tokens.size() || p.size() <= best) continue;
      bool hit = true;
      for (std::size_t k = 0; k < p.size() && hit; ++k) hit = tokens[i + k].surface == p[k];
      if (hit) best = p.size();
    }
    if (best == 0) {
      ++i;
    } else {
      ++count;
      i += best;
    }
  }
  return count;
}

SparseVector dense_features(const SignalVector& v) {
  SparseVector x;
  for (std::uint32_t i = 0; i < kSignalCount; ++i) x.entries.emplace_back(i, v[i]);
  return x;
}

double priority_of(double p) { return 1.0 - std::abs(2.0 * p - 1.0); }

}  // namespace

std::string_view signal_name(std::size_t i) noexcept {
  static constexpr std::array<std::string_view, kSignalCount> names{
      "synonym_mentions", "title_mention", "triage_probability", "unigram_probability",
      "bigram_probability", "symptom_density", "persistence_cues", "journal_prior"};
  return i < names.size() ? names[i] : "unknown";
}

void JournalStats::add(const std::string& journal, bool positive) {
  auto& slot = by_journal_[journal];
  slot.first += positive;
  slot.second += 1;
  positives_ += positive;
  total_ += 1;
}

void JournalStats::remove(const std::string& journal, bool positive) {
  auto it = by_journal_.find(journal);
  if (it == by_journal_.end() || it->second.second == 0) return;
  it->second.first -= positive;
  it->second.second -= 1;
  positives_ -= positive;
  total_ -= 1;
  if (it->second.second == 0) by_journal_.erase(it);
}

double JournalStats::base_rate() const {
  return total_ == 0 ? 0.5 : static_cast<double>(positives_) / static_cast<double>(total_);
}

double JournalStats::prior(const std::string& journal) const {
  auto it = by_journal_.find(journal);
  if (it == by_journal_.end()) return base_rate();
  return (static_cast<double>(it->second.first) + 1.0) / (static_cast<double>(it->second.second) + 2.0);
}

std::vector<std::vector<std::string>> SignalResources::default_persistence_cues() {
  std::vector<std::vector<std::string>> cues;
  for (const char* phrase : {"months after", "weeks after", "persistent", "persisting", "persistence", "sequelae",
                             "long-term", "post-acute", "lingering", "prolonged", "chronic"}) {
    std::vector<std::string> toks;
    for (auto& t : tokenize(phrase)) toks.push_back(std::move(t.surface));
    cues.push_back(std::move(toks));
  }
  return cues;
}

SignalVector compute_signals(const CitationRecord& record, const SignalResources& res) {
  SignalVector s{};
  const auto title = tokenize(record.title);
  const auto abstract = tokenize(record.abstract);
  if (res.lexicon != nullptr) {
    std::size_t symptoms = 0;
    for (const auto* toks : {&title, &abstract}) {
      for (const auto& m : recognize(*toks, *res.lexicon)) {
        if (m.entry->type == EntityType::LongCovid) {
          s[0] += 1;
          if (toks == &title) s[1] = 1;
        } else if (m.entry->type == EntityType::Symptom) {
          ++symptoms;
        }
      }
    }
    const auto n_tokens = title.size() + abstract.size();
    s[5] = n_tokens == 0 ? 0.0 : 100.0 * static_cast<double>(symptoms) / static_cast<double>(n_tokens);
  }
  s[2] = res.triage ? res.triage->probability(record) : 0.5;
  s[3] = res.unigram ? res.unigram->probability(record) : 0.5;
  s[4] = res.bigram ? res.bigram->probability(record) : 0.5;
  s[6] = static_cast<double>(count_phrases(title, res.persistence_cues) + count_phrases(abstract, res.persistence_cues));
  s[7] = res.journals ? res.journals->prior(record.journal) : res.default_base_rate;
  return s;
}

std::vector<SynonymSpan> synonym_spans(const CitationRecord& record, const Lexicon* lexicon) {
  std::vector<SynonymSpan> out;
  if (lexicon == nullptr) return out;
  for (auto field : {TextField::Title, TextField::Abstract}) {
    const auto& text = field == TextField::Title ? record.title : record.abstract;
    for (const auto& m : recognize(text, *lexicon))
      if (m.entry->type == EntityType::LongCovid) out.push_back({field, m.start, m.end});
  }
  return out;
}

SignalScaling SignalScaling::observe(std::span<const SignalVector> corpus) {
  SignalScaling sc;
  for (std::size_t i = 0; i < kSignalCount; ++i) {
    sc.min[i] = 0;
    sc.max[i] = 1;
  }
  for (std::size_t i : {0u, 5u, 6u}) {
    if (corpus.empty()) continue;
    double lo = corpus[0][i], hi = corpus[0][i];
    for (const auto& v : corpus) {
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
    }
    sc.min[i] = lo;
    sc.max[i] = hi;
  }
  return sc;
}

SignalVector SignalScaling::apply(const SignalVector& raw) const {
  SignalVector out{};
  for (std::size_t i = 0; i < kSignalCount; ++i) {
    const double span = max[i] - min[i];
    out[i] = span <= 0 ? 0.0 : std::clamp((raw[i] - min[i]) / span, 0.0, 1.0);
  }
  return out;
}

MetaModel MetaModel::uniform(SignalScaling scaling) {
  MetaModel m;
  m.weights.fill(1.0 / kSignalCount);
  m.bias = 0;
  m.scaling = scaling;
  return m;
}

Aggregate aggregate(const SignalVector& signals, const MetaModel& meta) {
  for (std::size_t i = 0; i < kSignalCount; ++i)
    if (!std::isfinite(signals[i]))
      throw Error(Errc::NonFiniteSignal, std::string(signal_name(i)) + " is not finite");
  const auto scaled = meta.scaling.apply(signals);
  double z = meta.bias;
  for (std::size_t i = 0; i < kSignalCount; ++i) z += meta.weights[i] * scaled[i];
  Aggregate a;
  a.p = sigmoid(z);
  a.priority = priority_of(a.p);
  return a;
}

std::string_view review_status_name(ReviewStatus s) noexcept {
  switch (s) {
    case ReviewStatus::Pending: return "pending";
    case ReviewStatus::Accepted: return "accepted";
    case ReviewStatus::Rejected: return "rejected";
  }
  return "pending";
}

LongCovidLoop::LongCovidLoop(std::vector<CitationRecord> pool, std::map<Pmid, bool> seeds,
                             std::shared_ptr<const Lexicon> lexicon, std::shared_ptr<const LinearModel> triage_model,
                             LoopConfig config)
    : pool_(std::move(pool)),
      seeds_(std::move(seeds)),
      lexicon_(std::move(lexicon)),
      triage_(std::move(triage_model)),
      config_(config) {
  std::sort(pool_.begin(), pool_.end(), [](const auto& a, const auto& b) { return a.pmid < b.pmid; });
  for (const auto& r : pool_) by_pmid_[r.pmid] = &r;
  auto s = std::make_shared<State>();
  s->lexicon_version = lexicon_ ? lexicon_->version() : 0;
  for (const auto& r : pool_) {
    ReviewItem item;
    item.pmid = r.pmid;
    item.pub_date = r.pub_date;
    if (auto seed = seeds_.find(r.pmid); seed != seeds_.end()) {
      item.status = seed->second ? ReviewStatus::Accepted : ReviewStatus::Rejected;
      item.decided_by = "seed";
    }
    s->items.emplace(r.pmid, std::move(item));
  }
  bool pos = false, neg = false;
  for (const auto& [pmid, label] : seeds_)
    if (by_pmid_.contains(pmid)) (label ? pos : neg) = true;
  if (pos && neg) {
    retrain(*s);
  } else {
    std::vector<SignalVector> raw;
    for (auto& [pmid, item] : s->items) {
      item.signals = compute_signals(*by_pmid_.at(pmid), resources(*s));
      raw.push_back(item.signals);
    }
    s->meta = MetaModel::uniform(SignalScaling::observe(raw));
    for (auto& [pmid, item] : s->items) {
      auto a = aggregate(item.signals, s->meta);
      item.p = a.p;
      item.priority = a.priority;
    }
  }
  state_ = std::move(s);
}

std::shared_ptr<const LongCovidLoop::State> LongCovidLoop::state() const {
  std::scoped_lock lock(publish_);
  return state_;
}

SignalResources LongCovidLoop::resources(const State& s) const {
  SignalResources r;
  r.lexicon = lexicon_.get();
  r.triage = triage_.get();
  r.unigram = s.unigram ? &*s.unigram : nullptr;
  r.bigram = s.bigram ? &*s.bigram : nullptr;
  r.journals = s.journals.total() > 0 ? &s.journals : nullptr;
  return r;
}

void LongCovidLoop::retrain(State& s) const {
  // Labels: seeds plus every logged decision, in pmid order.
  std::map<Pmid, bool> labels;
  for (const auto& [pmid, label] : seeds_)
    if (by_pmid_.contains(pmid)) labels[pmid] = label;
  for (const auto& d : s.log) labels[d.pmid] = d.accepted;
  std::vector<LabeledRecord> examples;
  for (const auto& [pmid, label] : labels) examples.push_back({*by_pmid_.at(pmid), label});
  std::size_t positives = 0;
  for (const auto& e : examples) positives += e.label;
  if (positives == 0 || positives == examples.size())
    throw Error(Errc::SingleClassDataset, "Long COVID labels need both classes");

  s.journals = JournalStats{};
  for (const auto& e : examples) s.journals.add(e.record.journal, e.label);
  s.unigram = train_linear(examples, config_.sub_model_hyper, config_.min_df, 1).model;
  s.bigram = train_linear(examples, config_.sub_model_hyper, config_.min_df, 2).model;

  // Out-of-fold model probabilities and leave-one-out journal priors for the
  // labelled articles, so the meta-model does not learn from fitted scores.
  const std::size_t folds = std::max<std::size_t>(2, config_.folds);
  std::vector<std::array<double, 2>> oof(examples.size(), {0.5, 0.5});
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<LabeledRecord> train;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < examples.size(); ++i) (i % folds == f ? held.push_back(i) : train.push_back(examples[i]));
    if (held.empty()) continue;
    std::size_t pos = 0;
    for (const auto& e : train) pos += e.label;
    if (pos == 0 || pos == train.size()) {
      for (auto i : held) oof[i] = {s.unigram->probability(examples[i].record), s.bigram->probability(examples[i].record)};
      continue;
    }
    auto uni = train_linear(train, config_.sub_model_hyper, config_.min_df, 1).model;
    auto bi = train_linear(train, config_.sub_model_hyper, config_.min_df, 2).model;
    for (auto i : held) oof[i] = {uni.probability(examples[i].record), bi.probability(examples[i].record)};
  }

  auto res = resources(s);
  std::vector<SignalVector> corpus_signals;
  for (auto& [pmid, item] : s.items) {
    item.signals = compute_signals(*by_pmid_.at(pmid), res);
    corpus_signals.push_back(item.signals);
  }
  const auto scaling = SignalScaling::observe(corpus_signals);

  std::vector<SparseVector> meta_x;
  std::vector<int> meta_y;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& rec = examples[i].record;
    auto sig = s.items.contains(rec.pmid) ? s.items.at(rec.pmid).signals : compute_signals(rec, res);
    sig[3] = oof[i][0];
    sig[4] = oof[i][1];
    JournalStats loo = s.journals;
    loo.remove(rec.journal, examples[i].label);
    sig[7] = loo.prior(rec.journal);
    meta_x.push_back(dense_features(scaling.apply(sig)));
    meta_y.push_back(examples[i].label ? 1 : 0);
  }
  auto fit = fit_logistic(meta_x, meta_y, kSignalCount, config_.meta_hyper);
  std::copy(fit.weights.begin(), fit.weights.end(), s.meta.weights.begin());
  s.meta.bias = fit.bias;
  s.meta.scaling = scaling;

  for (auto& [pmid, item] : s.items) {
    auto a = aggregate(item.signals, s.meta);
    item.p = a.p;
    item.priority = a.priority;
  }
}

std::vector<ReviewItem> LongCovidLoop::next_review_batch(std::size_t k) const {
  auto s = state();
  std::vector<const ReviewItem*> pending;
  for (const auto& [pmid, item] : s->items)
    if (item.status == ReviewStatus::Pending) pending.push_back(&item);
  std::sort(pending.begin(), pending.end(), [](const ReviewItem* a, const ReviewItem* b) {
    if (a->priority != b->priority) return a->priority > b->priority;
    if (a->pub_date != b->pub_date) return a->pub_date > b->pub_date;
    return a->pmid < b->pmid;
  });
  std::vector<ReviewItem> out;
  for (std::size_t i = 0; i < pending.size() && i < k; ++i) out.push_back(*pending[i]);
  return out;
}

ReviewItem LongCovidLoop::record_decision(Pmid pmid, bool accept, const std::string& curator, Timestamp now) {
  if (curator.empty() || curator.find_first_of("\t\n\r") != std::string::npos)
    throw Error(Errc::BadInput, "curator id must be non-empty without tabs or newlines");
  std::scoped_lock writer(writer_);
  auto current = state();
  auto it = current->items.find(pmid);
  if (it == current->items.end()) throw Error(Errc::NotFound, "pmid " + std::to_string(pmid) + " is not in the queue");
  if (it->second.status != ReviewStatus::Pending)
    throw Error(Errc::AlreadyDecided, "pmid " + std::to_string(pmid) + " was already " +
                                          std::string(review_status_name(it->second.status)));
  auto next = std::make_shared<State>(*current);
  auto& item = next->items.at(pmid);
  item.status = accept ? ReviewStatus::Accepted : ReviewStatus::Rejected;
  item.decided_by = curator;
  item.decided_at = now;
  item.iteration = next->iteration;
  next->log.push_back(Decision{pmid, accept, curator, now, next->iteration});
  ReviewItem result = item;
  std::scoped_lock lock(publish_);
  state_ = std::move(next);
  return result;
}

void LongCovidLoop::run_iteration() {
  std::scoped_lock writer(writer_);
  auto current = state();
  if (current->log.size() == current->log_size_at_last_iteration)
    throw Error(Errc::NoNewLabels, "no decisions since the last iteration");
  auto next = std::make_shared<State>(*current);
  retrain(*next);
  next->iteration += 1;
  next->log_size_at_last_iteration = next->log.size();
  std::scoped_lock lock(publish_);
  state_ = std::move(next);
}

Membership LongCovidLoop::collection_membership(double threshold) const {
  auto s = state();
  Membership m;
  for (const auto& [pmid, item] : s->items) {
    if (item.status == ReviewStatus::Accepted) {
      m.members.insert(pmid);
    } else if (item.status == ReviewStatus::Pending && item.p >= threshold) {
      m.members.insert(pmid);
      m.provisional.insert(pmid);
    }
  }
  return m;
}

SignalVector LongCovidLoop::signals_for(const CitationRecord& record) const {
  auto s = state();
  return compute_signals(record, resources(*s));
}

Aggregate LongCovidLoop::predict(const CitationRecord& record) const {
  auto s = state();
  return aggregate(compute_signals(record, resources(*s)), s->meta);
}

std::unique_ptr<LongCovidLoop> LongCovidLoop::replay(std::vector<CitationRecord> pool, std::map<Pmid, bool> seeds,
                                                     std::shared_ptr<const Lexicon> lexicon,
                                                     std::shared_ptr<const LinearModel> triage_model,
                                                     LoopConfig config, std::span<const Decision> log,
                                                     std::span<const std::size_t> iteration_marks) {
  auto loop = std::make_unique<LongCovidLoop>(std::move(pool), std::move(seeds), std::move(lexicon),
                                              std::move(triage_model), config);
  std::size_t mark = 0;
  auto run_marks = [&](std::size_t position) {
    while (mark < iteration_marks.size() && iteration_marks[mark] <= position) {
      loop->run_iteration();
      ++mark;
    }
  };
  for (std::size_t i = 0; i < log.size(); ++i) {
    run_marks(i);
    loop->record_decision(log[i].pmid, log[i].accepted, log[i].curator, log[i].at);
  }
  run_marks(log.size());
  return loop;
}

std::string format_decision(const Decision& d) {
  std::ostringstream os;
  os << d.pmid << '\t' << (d.accepted ? "accepted" : "rejected") << '\t' << d.curator << '\t' << d.at.iso() << '\t'
     << d.iteration;
  return os.str();
}

void append_decision(const std::filesystem::path& path, const Decision& d) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(Errc::StoreUnavailable, "cannot append to " + path.string());
  out << format_decision(d) << '\n';
}

void append_iteration_mark(const std::filesystem::path& path, std::size_t log_size, std::size_t iteration) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(Errc::StoreUnavailable, "cannot append to " + path.string());
  out << "#iteration\t" << log_size << '\t' << iteration << '\n';
}

DecisionLog DecisionLog::read(const std::filesystem::path& path) {
  DecisionLog log;
  std::ifstream in(path);
  if (!in) return log;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols[0] == "#iteration") {
      log.iteration_marks.push_back(std::stoull(cols.at(1)));
      continue;
    }
    if (cols.size() != 5) throw Error(Errc::BadInput, "decision log line malformed: " + line);
    Decision d;
    d.pmid = std::stoll(cols[0]);
    if (cols[1] != "accepted" && cols[1] != "rejected") throw Error(Errc::BadInput, "bad label in: " + line);
    d.accepted = cols[1] == "accepted";
    d.curator = cols[2];
    auto ts = Timestamp::parse(cols[3]);
    if (!ts) throw Error(Errc::BadInput, "bad timestamp in: " + line);
    d.at = *ts;
    d.iteration = std::stoull(cols[4]);
    log.decisions.push_back(std::move(d));
  }
  return log;
}

std::map<Pmid, bool> read_seed_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadInput, "cannot read " + path.string());
  std::map<Pmid, bool> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(Errc::BadInput, "seed line without tab: " + line);
    std::string label(trim(line.substr(tab + 1)));
    bool positive;
    if (label == "1" || label == "accept" || label == "accepted") positive = true;
    else if (label == "0" || label == "reject" || label == "rejected") positive = false;
    else throw Error(Errc::BadInput, "bad seed label '" + label + "'");
    out[std::stoll(line.substr(0, tab))] = positive;
  }
  return out;
}

}  // namespace lithub
